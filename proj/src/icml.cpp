#include "isomech/icml.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "isomech/isotonic.hpp"
#include "isomech/random.hpp"

namespace isomech {

SurrogateReport surrogate_eval(const std::vector<ReviewRecord>& reviews,
                               const std::vector<AuthorRecord>& authors, std::uint64_t seed) {
  SurrogateReport report;

  std::map<std::string, std::vector<const ReviewRecord*>> by_submission;
  for (const auto& r : reviews) by_submission[r.submission_id].push_back(&r);

  // std::map iterates ids in sorted order, so the tie-break stream is stable.
  Rng rng = substream(seed, {0x69636d6cULL});
  std::map<std::string, SubmissionSurrogate> usable;
  for (const auto& [id, list] : by_submission) {
    if (list.size() < 2) {
      ++report.submissions_skipped;
      report.log.push_back("submission " + id + ": fewer than 2 reviews, skipped");
      continue;
    }
    int lowest = list.front()->confidence;
    for (const auto* r : list) lowest = std::min(lowest, r->confidence);
    std::vector<int> candidates;
    for (std::size_t j = 0; j < list.size(); ++j) {
      if (list[j]->confidence == lowest) candidates.push_back(static_cast<int>(j));
    }
    int chosen = candidates.front();
    if (candidates.size() > 1) {
      std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
      chosen = candidates[pick(rng)];
      report.tie_breaks.push_back({id, chosen, static_cast<int>(candidates.size())});
    }
    SubmissionSurrogate s;
    double rest = 0.0;
    for (std::size_t j = 0; j < list.size(); ++j) {
      if (static_cast<int>(j) == chosen) {
        s.observed = list[j]->score;
      } else {
        rest += list[j]->score;
      }
    }
    s.surrogate = rest / static_cast<double>(list.size() - 1);
    usable.emplace(id, s);
  }
  report.submissions_used = static_cast<int>(usable.size());

  struct Errors {
    double raw = 0.0, im = 0.0;
    int count = 0;
  };
  std::map<int, Errors> per_n;
  int max_n = 0;

  for (const auto& a : authors) {
    const std::size_t m = a.submission_ids.size();
    bool malformed = m == 0 || a.ranking.size() != m ||
                     std::set<std::string>(a.submission_ids.begin(), a.submission_ids.end()).size() != m;
    if (!malformed) {
      std::vector<int> sorted(a.ranking);
      std::sort(sorted.begin(), sorted.end());
      const bool all_first = std::all_of(sorted.begin(), sorted.end(), [](int p) { return p == 1; });
      if (all_first && m > 1) {
        ++report.authors_uninformative;
        report.log.push_back("author " + a.author_id + ": all submissions ranked first, skipped");
        continue;
      }
      for (std::size_t j = 0; j < m; ++j) malformed = malformed || sorted[j] != static_cast<int>(j + 1);
    }
    if (malformed) {
      ++report.authors_malformed;
      report.log.push_back("author " + a.author_id + ": ranking is not a permutation of 1..n, skipped");
      continue;
    }

    // keep usable submissions, ordered best first by reported position
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a.ranking[x] < a.ranking[y]; });
    std::vector<const SubmissionSurrogate*> kept;
    for (std::size_t j : order) {
      auto it = usable.find(a.submission_ids[j]);
      if (it != usable.end()) kept.push_back(&it->second);
    }
    const int n = static_cast<int>(kept.size());
    if (n < 2) {
      ++report.authors_too_few;
      report.log.push_back("author " + a.author_id + ": fewer than 2 usable submissions, skipped");
      continue;
    }
    Eigen::VectorXd observed(n), truth(n);
    for (int j = 0; j < n; ++j) {
      observed[j] = kept[static_cast<std::size_t>(j)]->observed;
      truth[j] = kept[static_cast<std::size_t>(j)]->surrogate;
    }
    const Eigen::VectorXd adjusted = isotonic_mechanism(observed, Ranking::identity(n)).mu_hat;
    Errors& e = per_n[n];
    e.raw += (observed - truth).squaredNorm() / n;
    e.im += (adjusted - truth).squaredNorm() / n;
    ++e.count;
    ++report.authors_used;
    max_n = std::max(max_n, n);
  }

  for (int n = 2; n <= max_n; ++n) {
    SurrogateRow row;
    row.n = n;
    auto it = per_n.find(n);
    if (it != per_n.end()) {
      row.sample_size = it->second.count;
      row.mse_raw = it->second.raw / it->second.count;
      row.mse_im = it->second.im / it->second.count;
      if (*row.mse_raw > 0) row.improvement = (*row.mse_raw - *row.mse_im) / *row.mse_raw;
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace isomech
