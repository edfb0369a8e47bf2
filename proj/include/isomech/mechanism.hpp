#pragma once

// Author utility under the Isotonic Mechanism and Monte-Carlo estimates of
// its expectation for full and coarse reported rankings.
//
// Every estimate draws trial t from the substream keyed by (seed, t); rankings
// compared in one call share the sampled scores of each trial (common random
// numbers), and results never depend on the worker count.

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "isomech/expfam.hpp"
#include "isomech/isotonic.hpp"

namespace isomech {

/// Nondecreasing convex utility U.
struct UtilityFn {
  enum class Kind { ReluSquare, Identity, Exponential, Hinge };
  Kind kind = Kind::ReluSquare;
  double param = 0.0;  // alpha >= 0 for Exponential, threshold t for Hinge

  static UtilityFn relu_square() { return {Kind::ReluSquare, 0.0}; }
  static UtilityFn identity() { return {Kind::Identity, 0.0}; }
  static UtilityFn exponential(double alpha);
  static UtilityFn hinge(double threshold) { return {Kind::Hinge, threshold}; }
  /// "relu_square", "identity", "exp:<alpha>", "hinge:<t>".
  static UtilityFn parse(const std::string& spec);
  std::string name() const;

  double operator()(double x) const;
};

struct UtilityEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
};

struct MonteCarloOptions {
  int scores_per_item = 3;
  std::int64_t trials = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = available parallelism
};

/// sum_i U(mu_hat_i)
double realized_utility(const Eigen::Ref<const Eigen::VectorXd>& mu_hat, const UtilityFn& u);

/// Averaged review scores for one trial: `scores_per_item` draws per item at
/// its mean, averaged. Shared by every Monte-Carlo routine in the library.
Eigen::VectorXd draw_scores(const Family& f, const Eigen::Ref<const Eigen::VectorXd>& mu_star,
                            int scores_per_item, Rng& rng);

/// Per-trial realized utilities, one column per constraint, with common
/// random numbers across columns. Shape trials x constraints.size().
Eigen::MatrixXd utility_samples(const Family& f, const Eigen::Ref<const Eigen::VectorXd>& mu_star,
                                const std::vector<Constraint>& constraints, const UtilityFn& u,
                                const MonteCarloOptions& opts);

UtilityEstimate summarize(const Eigen::Ref<const Eigen::VectorXd>& samples, std::uint64_t seed);

UtilityEstimate expected_utility(const Family& f, const Eigen::Ref<const Eigen::VectorXd>& mu_star,
                                 const Ranking& ranking, const UtilityFn& u,
                                 const MonteCarloOptions& opts);

UtilityEstimate expected_utility_coarse(const Family& f,
                                        const Eigen::Ref<const Eigen::VectorXd>& mu_star,
                                        const CoarseRanking& blocks, const UtilityFn& u,
                                        const MonteCarloOptions& opts);

struct RankedUtility {
  Ranking ranking;
  UtilityEstimate estimate;
  /// Paired (common random number) estimate of Util(this) - Util(best).
  UtilityEstimate gap_to_best;
};

inline constexpr int kMaxEnumeratedItems = 8;

/// Every ranking of n <= 8 items, sorted by descending estimated utility.
std::vector<RankedUtility> rank_all_utilities(const Family& f,
                                              const Eigen::Ref<const Eigen::VectorXd>& mu_star,
                                              const UtilityFn& u, const MonteCarloOptions& opts);

/// The truthful ranking of mu_star: descending means, ties by ascending index.
Ranking truthful_ranking(const Eigen::Ref<const Eigen::VectorXd>& mu_star);

}  // namespace isomech
