#pragma once

// Estimation-error studies: error curves over n, log-log rate fits of the
// total risk, and the synthetic review study driven by a pool of scores.

#include <Eigen/Core>
#include <cstdint>
#include <variant>
#include <vector>

#include "isomech/expfam.hpp"

namespace isomech {

/// mu_i = hi - (hi - lo) (i - 1) / (n - 1), i = 1..n. Requires n >= 2.
struct LinearRamp {
  double hi = 9.0;
  double lo = 3.0;
};

/// mu_i drawn with replacement from `pool`, fresh for every trial.
struct PoolResample {
  std::vector<double> pool;
};

/// A fixed mean vector; its length must match every n in the grid.
struct ExplicitMeans {
  Eigen::VectorXd mu;
};

using MeanGenerator = std::variant<LinearRamp, PoolResample, ExplicitMeans>;

Eigen::VectorXd linear_ramp(int n, double hi, double lo);

struct EstimationConfig {
  Family family = Family::binomial(10);
  std::vector<int> n_grid;
  MeanGenerator generator = LinearRamp{};
  int scores_per_item = 3;
  std::int64_t trials = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct EstimationPoint {
  int n = 0;
  double mse_im = 0.0;   // mean of |mu_hat - mu*|^2 / n
  double mse_raw = 0.0;  // mean of |X - mu*|^2 / n
  double std_im = 0.0;   // across-trial standard deviations
  double std_raw = 0.0;
  double se_im = 0.0;    // standard errors of the means
  double se_raw = 0.0;
  double se_gap = 0.0;   // paired standard error of mse_raw - mse_im
  std::int64_t trials = 0;
};

/// Truthful-ranking Isotonic Mechanism error versus raw-score error, per n.
/// Trial t at size n uses the substream keyed by (seed, n, t).
std::vector<EstimationPoint> estimation_error_curve(const EstimationConfig& cfg);

struct RatePoint {
  int n = 0;
  double risk = 0.0;  // E |mu_hat - mu*|^2 (total, not per coordinate)
  double std_error = 0.0;
};

struct RateReport {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<RatePoint> points;
};

/// Monte-Carlo total risk of the truthful mechanism on the midpoint ramp
/// mu_i = v_max - (v_max - v_min)(i - 1/2)/n, with a least-squares fit of
/// log risk against log n. The ramp stands in for the supremum over the cone.
RateReport rate_check(const Family& f, const ScoreBounds& bounds, const std::vector<int>& n_grid,
                      std::int64_t trials, std::uint64_t seed, int scores_per_item = 1,
                      unsigned threads = 0);

struct SyntheticRow {
  int n = 0;
  double mean_mse_im = 0.0;
  double std_mse_im = 0.0;
  double mean_mse_raw = 0.0;
  double std_mse_raw = 0.0;
  double improvement = 0.0;  // (mean_raw - mean_im) / mean_raw
};

/// True scores resampled from `score_pool` (values in [0, 10]); each observed
/// score is the mean of 3 Binomial(10, mu/10) draws.
std::vector<SyntheticRow> synthetic_icml_study(const std::vector<double>& score_pool,
                                               const std::vector<int>& n_grid, std::int64_t trials,
                                               std::uint64_t seed, unsigned threads = 0);

/// `size` values uniform on [lo, hi], reproducible from `seed`.
std::vector<double> uniform_pool(std::size_t size, double lo, double hi, std::uint64_t seed);

}  // namespace isomech
