#include "isomech/estimation.hpp"

#include <Eigen/QR>
#include <cmath>
#include <string>

#include "isomech/error.hpp"
#include "isomech/isotonic.hpp"
#include "isomech/mechanism.hpp"
#include "isomech/parallel.hpp"
#include "isomech/stats.hpp"

namespace isomech {
namespace {

struct TrialErrors {
  std::vector<double> im;
  std::vector<double> raw;
};

void check_in_range(const Family& f, const Eigen::VectorXd& mu) {
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (!std::isfinite(mu[i]) || mu[i] < f.mean_lower() || mu[i] > f.mean_upper() ||
        (f.kind() == FamilyKind::Gamma && mu[i] <= 0)) {
      throw InvalidParameter("mu_star value " + std::to_string(mu[i]) + " outside the mean range of " +
                             f.name());
    }
  }
}

Eigen::VectorXd make_means(const MeanGenerator& gen, int n, Rng& rng) {
  if (const auto* ramp = std::get_if<LinearRamp>(&gen)) return linear_ramp(n, ramp->hi, ramp->lo);
  if (const auto* pool = std::get_if<PoolResample>(&gen)) {
    std::uniform_int_distribution<std::size_t> pick(0, pool->pool.size() - 1);
    Eigen::VectorXd mu(n);
    for (int i = 0; i < n; ++i) mu[i] = pool->pool[pick(rng)];
    return mu;
  }
  return std::get<ExplicitMeans>(gen).mu;
}

// Per-trial squared errors (divided by n when `per_coordinate`).
TrialErrors run_trials(const Family& f, const MeanGenerator& gen, int n, int scores_per_item,
                       std::int64_t trials, std::uint64_t seed, unsigned threads,
                       bool per_coordinate) {
  TrialErrors e{std::vector<double>(static_cast<std::size_t>(trials)),
                std::vector<double>(static_cast<std::size_t>(trials))};
  const double scale = per_coordinate ? 1.0 / n : 1.0;
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    Rng rng = substream(seed, {static_cast<std::uint64_t>(n), t});
    const Eigen::VectorXd mu = make_means(gen, n, rng);
    const Eigen::VectorXd x = draw_scores(f, mu, scores_per_item, rng);
    const Eigen::VectorXd mu_hat = isotonic_mechanism(x, truthful_ranking(mu)).mu_hat;
    e.im[t] = (mu_hat - mu).squaredNorm() * scale;
    e.raw[t] = (x - mu).squaredNorm() * scale;
  });
  return e;
}

void validate_generator(const Family& f, const MeanGenerator& gen, const std::vector<int>& n_grid) {
  if (n_grid.empty()) throw InvalidParameter("n-grid is empty");
  for (int n : n_grid) {
    if (n < 1) throw InvalidParameter("n-grid entries must be positive");
    if (std::holds_alternative<LinearRamp>(gen) && n < 2) {
      throw InvalidParameter("linear ramp needs n >= 2");
    }
    if (const auto* ex = std::get_if<ExplicitMeans>(&gen); ex && ex->mu.size() != n) {
      throw InvalidParameter("explicit mean vector length differs from n = " + std::to_string(n));
    }
  }
  if (const auto* ramp = std::get_if<LinearRamp>(&gen)) {
    check_in_range(f, linear_ramp(2, ramp->hi, ramp->lo));
  } else if (const auto* pool = std::get_if<PoolResample>(&gen)) {
    if (pool->pool.empty()) throw InvalidParameter("score pool is empty");
    check_in_range(f, Eigen::Map<const Eigen::VectorXd>(pool->pool.data(),
                                                        static_cast<Eigen::Index>(pool->pool.size())));
  } else {
    check_in_range(f, std::get<ExplicitMeans>(gen).mu);
  }
}

}  // namespace

Eigen::VectorXd linear_ramp(int n, double hi, double lo) {
  if (n < 2) throw InvalidParameter("linear ramp needs n >= 2");
  Eigen::VectorXd mu(n);
  for (int i = 0; i < n; ++i) mu[i] = hi - (hi - lo) * i / (n - 1);
  return mu;
}

std::vector<EstimationPoint> estimation_error_curve(const EstimationConfig& cfg) {
  validate_generator(cfg.family, cfg.generator, cfg.n_grid);
  if (cfg.trials < 1) throw InvalidParameter("trials must be >= 1");
  if (cfg.scores_per_item < 1) throw InvalidParameter("scores_per_item must be >= 1");
  std::vector<EstimationPoint> out;
  for (int n : cfg.n_grid) {
    const TrialErrors e = run_trials(cfg.family, cfg.generator, n, cfg.scores_per_item, cfg.trials,
                                     cfg.seed, cfg.threads, true);
    std::vector<double> gap(e.im.size());
    for (std::size_t t = 0; t < gap.size(); ++t) gap[t] = e.raw[t] - e.im[t];
    const MeanSe im = mean_se(e.im), raw = mean_se(e.raw), g = mean_se(gap);
    out.push_back({n, im.mean, raw.mean, im.std_dev, raw.std_dev, im.std_error, raw.std_error,
                   g.std_error, cfg.trials});
  }
  return out;
}

RateReport rate_check(const Family& f, const ScoreBounds& bounds, const std::vector<int>& n_grid,
                      std::int64_t trials, std::uint64_t seed, int scores_per_item,
                      unsigned threads) {
  validate_bounds(f, bounds);
  if (trials < 1) throw InvalidParameter("trials must be >= 1");
  int distinct = 0;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw InvalidParameter("n-grid entries must be positive");
    bool seen = false;
    for (std::size_t j = 0; j < i; ++j) seen = seen || n_grid[j] == n_grid[i];
    if (!seen) ++distinct;
  }
  if (distinct < 2) throw InvalidParameter("rate_check: n-grid needs at least two distinct sizes");

  RateReport report;
  for (int n : n_grid) {
    Eigen::VectorXd mu(n);
    for (int i = 0; i < n; ++i) mu[i] = bounds.v_max - (bounds.v_max - bounds.v_min) * (i + 0.5) / n;
    const TrialErrors e =
        run_trials(f, ExplicitMeans{mu}, n, scores_per_item, trials, seed, threads, false);
    const MeanSe s = mean_se(e.im);
    report.points.push_back({n, s.mean, s.std_error});
  }

  // ordinary least squares of log risk on log n
  Eigen::MatrixXd design(static_cast<Eigen::Index>(report.points.size()), 2);
  Eigen::VectorXd target(design.rows());
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    const auto& p = report.points[static_cast<std::size_t>(i)];
    if (!(p.risk > 0)) throw InvalidParameter("rate_check: zero risk at n = " + std::to_string(p.n));
    design(i, 0) = 1.0;
    design(i, 1) = std::log(static_cast<double>(p.n));
    target[i] = std::log(p.risk);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(target);
  report.intercept = coef[0];
  report.slope = coef[1];
  return report;
}

std::vector<SyntheticRow> synthetic_icml_study(const std::vector<double>& score_pool,
                                               const std::vector<int>& n_grid, std::int64_t trials,
                                               std::uint64_t seed, unsigned threads) {
  for (double v : score_pool) {
    if (!(v >= 0.0 && v <= 10.0)) {
      throw InvalidParameter("score pool value " + std::to_string(v) + " outside [0, 10]");
    }
  }
  EstimationConfig cfg;
  cfg.family = Family::binomial(10);
  cfg.n_grid = n_grid;
  cfg.generator = PoolResample{score_pool};
  cfg.scores_per_item = 3;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.threads = threads;
  std::vector<SyntheticRow> rows;
  for (const EstimationPoint& p : estimation_error_curve(cfg)) {
    const double improvement = p.mse_raw > 0 ? (p.mse_raw - p.mse_im) / p.mse_raw : 0.0;
    rows.push_back({p.n, p.mse_im, p.std_im, p.mse_raw, p.std_raw, improvement});
  }
  return rows;
}

std::vector<double> uniform_pool(std::size_t size, double lo, double hi, std::uint64_t seed) {
  Rng rng = substream(seed, {0x706f6f6cULL});
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> pool(size);
  for (double& v : pool) v = u(rng);
  return pool;
}

}  // namespace isomech
