#pragma once

// Surrogate-ground-truth evaluation on conference review data.
//
// For each submission with m >= 2 reviews, the least confident review is the
// observed score and the mean of the other m - 1 reviews is the surrogate
// truth. Each author's reported ranking drives the Isotonic Mechanism on the
// observed scores, and both errors are averaged over authors with the same
// number of submissions.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace isomech {

struct ReviewRecord {
  std::string submission_id;
  double score = 0.0;
  int confidence = 0;
};

struct AuthorRecord {
  std::string author_id;
  std::vector<std::string> submission_ids;
  /// ranking[j] is the reported position of submission_ids[j]; 1 = best.
  std::vector<int> ranking;
};

struct SurrogateRow {
  int n = 0;
  int sample_size = 0;  // authors with n usable submissions
  std::optional<double> mse_raw;  // empty when no author has n submissions
  std::optional<double> mse_im;
  std::optional<double> improvement;  // (raw - im) / raw; empty if raw == 0
};

struct TieBreak {
  std::string submission_id;
  int chosen_review = 0;  // 0-based among the submission's reviews in input order
  int candidates = 0;     // reviews sharing the lowest confidence
};

struct SurrogateReport {
  std::vector<SurrogateRow> rows;  // n = 2 .. largest observed n
  int submissions_used = 0;
  int submissions_skipped = 0;         // fewer than 2 reviews (or none)
  int authors_used = 0;
  int authors_malformed = 0;           // ranking not a permutation of 1..n
  int authors_uninformative = 0;       // every submission ranked first
  int authors_too_few = 0;             // fewer than 2 usable submissions
  std::vector<TieBreak> tie_breaks;    // seeded choices, for replay
  std::vector<std::string> log;
};

struct SubmissionSurrogate {
  double observed = 0.0;   // least confident score
  double surrogate = 0.0;  // mean of the remaining scores
};

SurrogateReport surrogate_eval(const std::vector<ReviewRecord>& reviews,
                               const std::vector<AuthorRecord>& authors, std::uint64_t seed);

}  // namespace isomech
