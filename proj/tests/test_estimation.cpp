#include <doctest.h>

#include <cmath>

#include "isomech/error.hpp"
#include "isomech/estimation.hpp"
#include "isomech/isotonic.hpp"
#include "isomech/mechanism.hpp"
#include "isomech/random.hpp"

using namespace isomech;

TEST_CASE("linear ramp") {
  const Eigen::VectorXd r = linear_ramp(4, 9, 3);
  CHECK(r[0] == 9.0);
  CHECK(r[1] == doctest::Approx(7.0));
  CHECK(r[3] == 3.0);
  CHECK_THROWS_AS(linear_ramp(1, 9, 3), InvalidParameter);
}

TEST_CASE("noiseless scores give zero error") {
  EstimationConfig cfg;
  cfg.family = Family::gaussian(1e-12);
  cfg.n_grid = {10, 50};
  cfg.trials = 50;
  for (const EstimationPoint& p : estimation_error_curve(cfg)) {
    CHECK(p.mse_im < 1e-6);
    CHECK(p.mse_raw < 1e-6);
  }
}

TEST_CASE("adjusted scores beat raw scores on the ramp") {
  EstimationConfig cfg;
  cfg.n_grid = {100};
  cfg.trials = 2000;
  cfg.seed = 3;
  const EstimationPoint p = estimation_error_curve(cfg).front();
  CHECK(p.mse_raw - p.mse_im >= 5 * p.se_gap);

  // raw error is the average score variance over the ramp, divided by the
  // number of averaged reviews
  const Eigen::VectorXd mu = linear_ramp(100, 9, 3);
  double expected = 0;
  for (int i = 0; i < 100; ++i) expected += mu[i] * (10 - mu[i]) / 10 / 3;
  expected /= 100;
  CHECK(std::abs(p.mse_raw - expected) < 5 * p.se_raw);
}

TEST_CASE("error curves are deterministic and thread independent") {
  EstimationConfig a;
  a.family = Family::poisson();
  a.n_grid = {10, 30};
  a.trials = 300;
  a.seed = 9;
  a.threads = 1;
  EstimationConfig b = a;
  b.threads = 4;
  const auto ra = estimation_error_curve(a), rb = estimation_error_curve(b);
  for (std::size_t k = 0; k < ra.size(); ++k) {
    CHECK(ra[k].mse_im == rb[k].mse_im);
    CHECK(ra[k].mse_raw == rb[k].mse_raw);
  }
}

TEST_CASE("adjusted error is consistent and raw error is flat") {
  EstimationConfig cfg;
  cfg.n_grid = {64, 512, 4096};
  cfg.trials = 150;
  cfg.seed = 4;
  const auto pts = estimation_error_curve(cfg);
  CHECK(pts.back().mse_im < pts.front().mse_im / 4);
  double lo = pts.front().mse_raw, hi = lo;
  for (const auto& p : pts) {
    lo = std::min(lo, p.mse_raw);
    hi = std::max(hi, p.mse_raw);
  }
  CHECK(hi / lo - 1 < 0.10);
}

TEST_CASE("configuration errors") {
  EstimationConfig cfg;
  cfg.n_grid = {};
  CHECK_THROWS_AS(estimation_error_curve(cfg), InvalidParameter);
  cfg.n_grid = {10};
  cfg.generator = LinearRamp{12, 3};
  CHECK_THROWS_AS(estimation_error_curve(cfg), InvalidParameter);
  cfg.generator = ExplicitMeans{Eigen::VectorXd::Constant(5, 2.0)};
  CHECK_THROWS_AS(estimation_error_curve(cfg), InvalidParameter);
  cfg.generator = PoolResample{{}};
  CHECK_THROWS_AS(estimation_error_curve(cfg), InvalidParameter);
  CHECK_THROWS_AS(rate_check(Family::binomial(10), {0, 10}, {64, 64}, 10, 0), InvalidParameter);
}

TEST_CASE("Gaussian risk grows like the cube root of n") {
  const RateReport r = rate_check(Family::gaussian(1.0), {0, 6}, {64, 128, 256, 512, 1024, 2048, 4096}, 150, 2);
  CHECK(r.slope > 1.0 / 3 - 0.15);
  CHECK(r.slope < 1.0 / 3 + 0.15);
}

TEST_CASE("constant truth: risk grows at most logarithmically") {
  const std::vector<int> grid = {64, 256, 1024, 4096};
  const RateReport r = rate_check(Family::binomial(10), {5, 5}, grid, 200, 6);
  const double sigma_sq = 2.5;
  const double c1 = r.points.front().risk / (sigma_sq * std::log(64.0));
  for (const RatePoint& p : r.points) CHECK(p.risk <= 2 * c1 * sigma_sq * std::log(static_cast<double>(p.n)));
}

TEST_CASE("synthetic study on a constant pool") {
  const auto rows = synthetic_icml_study({5.0}, {2, 5}, 200, 1, 0);
  for (const auto& r : rows) CHECK(r.mean_mse_im <= r.mean_mse_raw);
  // pathwise: the constant truth lies in the cone of any ranking
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    const Eigen::VectorXd mu = Eigen::VectorXd::Constant(6, 5.0);
    const Eigen::VectorXd x = draw_scores(Family::binomial(10), mu, 3, rng);
    CHECK((isotonic_mechanism(x, truthful_ranking(mu)).mu_hat - mu).squaredNorm() <= (x - mu).squaredNorm() + 1e-12);
  }
}

TEST_CASE("synthetic study on a uniform pool") {
  const auto pool = uniform_pool(2000, 3, 8, 11);
  for (double v : pool) {
    CHECK(v >= 3);
    CHECK(v <= 8);
  }
  const auto rows = synthetic_icml_study(pool, {2, 17}, 2000, 12, 0);
  CHECK(rows.front().improvement > 0.05);
  CHECK(rows.back().improvement - rows.front().improvement >= 0.20);
  CHECK_THROWS_AS(synthetic_icml_study({11.0}, {2}, 10, 1, 0), InvalidParameter);
}
