#include "isomech/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "isomech/error.hpp"

namespace isomech {
namespace {

void require_finite(const Eigen::Ref<const Eigen::VectorXd>& x, const char* who) {
  if (x.size() == 0) throw ValidationError(std::string(who) + ": empty score vector");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw ValidationError(std::string(who) + ": non-finite score at index " +
                            std::to_string(i + 1));
    }
  }
}

Eigen::VectorXd gather(const Eigen::Ref<const Eigen::VectorXd>& x, const Ranking& r) {
  Eigen::VectorXd y(r.size());
  for (int k = 0; k < r.size(); ++k) y[k] = x[r[k]];
  return y;
}

Eigen::VectorXd scatter(const Eigen::VectorXd& y, const Ranking& r) {
  Eigen::VectorXd x(r.size());
  for (int k = 0; k < r.size(); ++k) x[r[k]] = y[k];
  return x;
}

void enumerate_blocks(const std::vector<int>& sizes, std::size_t level, std::vector<int>& remaining,
                      std::vector<std::vector<int>>& current, std::vector<CoarseRanking>& out) {
  if (level == sizes.size()) {
    out.emplace_back(current);
    return;
  }
  const int need = sizes[level];
  const int avail = static_cast<int>(remaining.size());
  // choose `need` of the remaining items via an index combination
  std::vector<int> pick(static_cast<std::size_t>(need));
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    std::vector<int> block, rest;
    std::size_t p = 0;
    for (int i = 0; i < avail; ++i) {
      if (p < pick.size() && pick[p] == i) {
        block.push_back(remaining[static_cast<std::size_t>(i)]);
        ++p;
      } else {
        rest.push_back(remaining[static_cast<std::size_t>(i)]);
      }
    }
    current.push_back(block);
    enumerate_blocks(sizes, level + 1, rest, current, out);
    current.pop_back();

    int i = need - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == avail - need + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < need; ++j) {
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

}  // namespace

Ranking::Ranking(std::vector<int> perm) : perm_(std::move(perm)) {
  std::vector<char> seen(perm_.size(), 0);
  for (int v : perm_) {
    if (v < 0 || v >= size()) {
      throw ValidationError("ranking: index " + std::to_string(v + 1) + " out of range 1.." +
                            std::to_string(size()));
    }
    if (seen[static_cast<std::size_t>(v)]) {
      throw ValidationError("ranking: index " + std::to_string(v + 1) + " appears twice");
    }
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

Ranking Ranking::from_one_based(const std::vector<int>& perm) {
  std::vector<int> p(perm);
  for (int& v : p) --v;
  return Ranking(std::move(p));
}

Ranking Ranking::identity(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  return Ranking(std::move(p));
}

std::vector<int> Ranking::one_based() const {
  std::vector<int> p(perm_);
  for (int& v : p) ++v;
  return p;
}

std::vector<int> Ranking::position() const {
  std::vector<int> pos(perm_.size());
  for (int k = 0; k < size(); ++k) pos[static_cast<std::size_t>(perm_[static_cast<std::size_t>(k)])] = k;
  return pos;
}

CoarseRanking::CoarseRanking(std::vector<std::vector<int>> blocks) : blocks_(std::move(blocks)) {
  n_ = 0;
  for (const auto& b : blocks_) {
    if (b.empty()) throw ValidationError("coarse ranking: empty block");
    n_ += static_cast<int>(b.size());
  }
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  for (auto& b : blocks_) {
    for (int v : b) {
      if (v < 0 || v >= n_) {
        throw ValidationError("coarse ranking: index " + std::to_string(v + 1) +
                              " out of range 1.." + std::to_string(n_));
      }
      if (seen[static_cast<std::size_t>(v)]) {
        throw ValidationError("coarse ranking: index " + std::to_string(v + 1) + " appears twice");
      }
      seen[static_cast<std::size_t>(v)] = 1;
    }
    std::sort(b.begin(), b.end());
  }
}

CoarseRanking CoarseRanking::from_one_based(const std::vector<std::vector<int>>& blocks) {
  auto b = blocks;
  for (auto& block : b)
    for (int& v : block) --v;
  return CoarseRanking(std::move(b));
}

CoarseRanking CoarseRanking::singletons(const Ranking& ranking) {
  std::vector<std::vector<int>> b;
  for (int v : ranking.perm()) b.push_back({v});
  return CoarseRanking(std::move(b));
}

CoarseRanking CoarseRanking::from_ranking(const Ranking& truth, const std::vector<int>& sizes) {
  std::vector<std::vector<int>> b;
  int k = 0;
  for (int s : sizes) {
    if (s < 1) throw ValidationError("coarse ranking: block sizes must be positive");
    std::vector<int> block;
    for (int j = 0; j < s; ++j) {
      if (k >= truth.size()) throw ValidationError("coarse ranking: sizes exceed n");
      block.push_back(truth[k++]);
    }
    b.push_back(std::move(block));
  }
  if (k != truth.size()) throw ValidationError("coarse ranking: sizes do not sum to n");
  return CoarseRanking(std::move(b));
}

std::vector<int> CoarseRanking::sizes() const {
  std::vector<int> s;
  for (const auto& b : blocks_) s.push_back(static_cast<int>(b.size()));
  return s;
}

std::vector<CoarseRanking> all_coarse_rankings(const std::vector<int>& sizes) {
  int n = 0;
  for (int s : sizes) {
    if (s < 1) throw ValidationError("coarse ranking: block sizes must be positive");
    n += s;
  }
  std::vector<int> items(static_cast<std::size_t>(n));
  std::iota(items.begin(), items.end(), 0);
  std::vector<std::vector<int>> current;
  std::vector<CoarseRanking> out;
  enumerate_blocks(sizes, 0, items, current, out);
  return out;
}

std::vector<Ranking> all_rankings(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::vector<Ranking> out;
  do {
    out.emplace_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

IsotonicFit project_descending(const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& weights) {
  require_finite(x, "project_descending");
  if (weights.size() != x.size()) throw ValidationError("project_descending: weight length mismatch");
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0) || !std::isfinite(weights[i])) {
      throw ValidationError("project_descending: weights must be positive");
    }
  }
  IsotonicFit fit;
  fit.input = x;
  fit.order = Ranking::identity(static_cast<int>(x.size()));
  fit.constraint = fit.order;
  fit.mu_hat = pava_descending(x, weights, &fit.pools);
  return fit;
}

IsotonicFit project_descending(const Eigen::Ref<const Eigen::VectorXd>& x) {
  return project_descending(x, Eigen::VectorXd::Ones(x.size()));
}

IsotonicFit isotonic_mechanism(const Eigen::Ref<const Eigen::VectorXd>& x, const Ranking& ranking) {
  require_finite(x, "isotonic_mechanism");
  if (x.size() != ranking.size()) {
    throw ValidationError("isotonic_mechanism: " + std::to_string(x.size()) + " scores but a ranking of " +
                          std::to_string(ranking.size()) + " items");
  }
  IsotonicFit fit;
  fit.input = x;
  fit.constraint = ranking;
  fit.order = ranking;
  fit.mu_hat = scatter(pava_descending(gather(x, ranking), &fit.pools), ranking);
  return fit;
}

Ranking coarse_to_permutation(const CoarseRanking& blocks, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != blocks.size()) {
    throw ValidationError("coarse_to_permutation: " + std::to_string(x.size()) +
                          " scores but a partition of " + std::to_string(blocks.size()) + " items");
  }
  std::vector<int> perm;
  perm.reserve(static_cast<std::size_t>(blocks.size()));
  for (const auto& b : blocks.blocks()) {
    std::vector<int> block(b);  // already ascending by index
    std::stable_sort(block.begin(), block.end(), [&](int i, int j) { return x[i] > x[j]; });
    perm.insert(perm.end(), block.begin(), block.end());
  }
  return Ranking(std::move(perm));
}

IsotonicFit coarse_isotonic_mechanism(const Eigen::Ref<const Eigen::VectorXd>& x,
                                      const CoarseRanking& blocks) {
  require_finite(x, "coarse_isotonic_mechanism");
  IsotonicFit fit = isotonic_mechanism(x, coarse_to_permutation(blocks, x));
  fit.constraint = blocks;
  return fit;
}

IsotonicFit ranking_constrained_mle(const Family& f, const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Ranking& ranking) {
  require_finite(x, "ranking_constrained_mle");
  if (x.size() != ranking.size()) throw ValidationError("ranking_constrained_mle: length mismatch");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < f.mean_lower() || x[i] > f.mean_upper()) {
      throw ValidationError("ranking_constrained_mle: score " + std::to_string(x[i]) + " at index " +
                            std::to_string(i + 1) + " outside the support hull of " + f.name());
    }
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Block minimizer of sum_i [b(theta) - theta x_i] solves b'(theta) = block mean.
  auto block_theta = [&](double block_mean) {
    if (f.mean_is_interior(block_mean)) return natural_param(f, block_mean);
    return block_mean <= f.mean_lower() ? -kInf : kInf;
  };
  struct Block {
    double sum;
    double count;
    double theta;
    Eigen::Index start;
  };

  const Eigen::VectorXd y = gather(x, ranking);
  const Eigen::Index n = y.size();
  std::vector<Block> stack;
  stack.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    stack.push_back({y[i], 1.0, block_theta(y[i]), i});
    while (stack.size() >= 2 && stack.back().theta > stack[stack.size() - 2].theta) {
      const Block top = stack.back();
      stack.pop_back();
      Block& b = stack.back();
      b.sum += top.sum;
      b.count += top.count;
      b.theta = block_theta(b.sum / b.count);
    }
  }

  IsotonicFit fit;
  fit.input = x;
  fit.constraint = ranking;
  fit.order = ranking;
  Eigen::VectorXd mu_sorted(n), theta_sorted(n);
  for (std::size_t b = 0; b < stack.size(); ++b) {
    const Eigen::Index end = b + 1 < stack.size() ? stack[b + 1].start : n;
    const double theta = stack[b].theta;
    double mu;
    if (std::isfinite(theta)) {
      mu = mean(f, theta);
    } else {
      mu = theta < 0 ? f.mean_lower() : f.mean_upper();
    }
    mu_sorted.segment(stack[b].start, end - stack[b].start).setConstant(mu);
    theta_sorted.segment(stack[b].start, end - stack[b].start).setConstant(theta);
    fit.pools.push_back({stack[b].start, end, mu});
  }
  fit.mu_hat = scatter(mu_sorted, ranking);
  fit.theta_hat = scatter(theta_sorted, ranking);
  return fit;
}

}  // namespace isomech
