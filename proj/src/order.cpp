#include "isomech/order.hpp"

#include <algorithm>
#include <string>

namespace isomech {
namespace {

void require_same_size(const Ranking& a, const Ranking& b, const char* who) {
  if (a.size() != b.size()) {
    throw ValidationError(std::string(who) + ": permutations of different lengths");
  }
}

bool upward_swap_by_key(const Ranking& pi, const Ranking& nu, const std::vector<int>& key) {
  int first = -1, second = -1;
  for (int k = 0; k < pi.size(); ++k) {
    if (pi[k] == nu[k]) continue;
    if (first < 0) {
      first = k;
    } else if (second < 0) {
      second = k;
    } else {
      return false;
    }
  }
  if (second < 0) return false;
  const auto rank = [&](int item) { return key[static_cast<std::size_t>(item)]; };
  return pi[first] == nu[second] && pi[second] == nu[first] && rank(pi[first]) < rank(pi[second]);
}

}  // namespace

bool is_upward_swap(const Ranking& pi, const Ranking& nu) {
  require_same_size(pi, nu, "is_upward_swap");
  return upward_swap_by_key(pi, nu, Ranking::identity(pi.size()).perm());
}

bool is_upward_swap(const Ranking& pi, const Ranking& nu, const Ranking& truth) {
  require_same_size(pi, nu, "is_upward_swap");
  require_same_size(pi, truth, "is_upward_swap");
  return upward_swap_by_key(pi, nu, truth.position());
}

SwapChain upward_swap_chain(const Ranking& truth, const Ranking& target) {
  require_same_size(truth, target, "upward_swap_chain");
  const int n = target.size();
  const std::vector<int> true_rank = truth.position();

  // Work on true ranks so the truthful ranking becomes 0, 1, ..., n-1.
  std::vector<int> ranks(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) ranks[static_cast<std::size_t>(k)] = true_rank[static_cast<std::size_t>(target[k])];

  auto to_items = [&](const std::vector<int>& r) {
    std::vector<int> items(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) items[k] = truth[r[k]];
    return Ranking(std::move(items));
  };

  std::vector<Ranking> reversed{to_items(ranks)};
  for (int slot = n - 1; slot >= 1; --slot) {
    const auto it = std::find(ranks.begin(), ranks.begin() + slot + 1, slot);
    if (it == ranks.begin() + slot) continue;
    std::iter_swap(it, ranks.begin() + slot);
    reversed.push_back(to_items(ranks));
  }
  return SwapChain{{reversed.rbegin(), reversed.rend()}};
}

}  // namespace isomech
