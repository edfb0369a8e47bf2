#include <doctest.h>

#include <random>

#include "isomech/error.hpp"
#include "isomech/isotonic.hpp"
#include "isomech/pava.hpp"
#include "oracles.hpp"

using namespace isomech;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("ranking validation and conversions") {
  const Ranking r = Ranking::from_one_based({2, 3, 1});
  CHECK(r.perm() == std::vector<int>{1, 2, 0});
  CHECK(r.one_based() == std::vector<int>{2, 3, 1});
  CHECK(r.position() == std::vector<int>{2, 0, 1});
  CHECK_THROWS_AS(Ranking({0, 0, 1}), ValidationError);
  CHECK_THROWS_AS(Ranking({0, 3}), ValidationError);
  CHECK_THROWS_AS(Ranking::from_one_based({0, 1}), ValidationError);
  CHECK(all_rankings(4).size() == 24);
  CHECK(all_rankings(3).front() == Ranking::identity(3));
}

TEST_CASE("coarse ranking validation") {
  const CoarseRanking c = CoarseRanking::from_one_based({{2, 1}, {3}});
  CHECK(c.blocks()[0] == std::vector<int>{0, 1});
  CHECK(c.sizes() == std::vector<int>{2, 1});
  CHECK_THROWS_AS(CoarseRanking({{0}, {0, 1}}), ValidationError);
  CHECK_THROWS_AS(CoarseRanking({{0}, {}}), ValidationError);
  CHECK_THROWS_AS(CoarseRanking({{0}, {2}}), ValidationError);
  CHECK(all_coarse_rankings({1, 3}).size() == 4);
  CHECK(all_coarse_rankings({2, 2}).size() == 6);
  const CoarseRanking t = CoarseRanking::from_ranking(Ranking::from_one_based({3, 1, 2, 4}), {1, 3});
  CHECK(t.blocks()[0] == std::vector<int>{2});
  CHECK(t.blocks()[1] == std::vector<int>{0, 1, 3});
}

TEST_CASE("projection onto the descending cone") {
  CHECK(project_descending(vec({3, 2, 1})).mu_hat == vec({3, 2, 1}));
  CHECK(project_descending(vec({2, 3, 1})).mu_hat.isApprox(vec({2.5, 2.5, 1})));
  CHECK(project_descending(vec({1, 1, 1})).mu_hat == vec({1, 1, 1}));
  CHECK_THROWS_AS(project_descending(Eigen::VectorXd(0)), ValidationError);
  const IsotonicFit fit = project_descending(vec({2, 3, 1}));
  REQUIRE(fit.pools.size() == 2);
  CHECK(fit.pools[0].start == 0);
  CHECK(fit.pools[0].end == 2);
  CHECK_THROWS_AS(project_descending(vec({1, NAN})), std::invalid_argument);
}

TEST_CASE("weighted projection") {
  const Eigen::VectorXd x = vec({1, 4, 2});
  CHECK(project_descending(x, Eigen::VectorXd::Ones(3)).mu_hat == project_descending(x).mu_hat);
  // weights 1 and 3 pool to (1 + 12) / 4
  const Eigen::VectorXd y = project_descending(vec({1, 4}), vec({1, 3})).mu_hat;
  CHECK(y[0] == doctest::Approx(3.25));
  CHECK(y[1] == doctest::Approx(3.25));
  CHECK_THROWS_AS(project_descending(x, vec({1, 0, 1})), std::invalid_argument);
}

TEST_CASE("isotonic mechanism examples") {
  CHECK(isotonic_mechanism(vec({1, 2, 3}), Ranking::from_one_based({3, 2, 1})).mu_hat == vec({1, 2, 3}));
  CHECK(isotonic_mechanism(vec({1, 2, 3}), Ranking::from_one_based({1, 2, 3})).mu_hat.isApprox(vec({2, 2, 2})));
  CHECK(isotonic_mechanism(vec({8, 7, 6, 4}), Ranking::identity(4)).mu_hat == vec({8, 7, 6, 4}));
  CHECK_THROWS_AS(isotonic_mechanism(vec({1, 2}), Ranking::identity(3)), ValidationError);
}

TEST_CASE("coarse mechanism examples") {
  const CoarseRanking b12_3 = CoarseRanking::from_one_based({{1, 2}, {3}});
  CHECK(coarse_isotonic_mechanism(vec({5, 4, 1}), b12_3).mu_hat == vec({5, 4, 1}));
  CHECK(coarse_isotonic_mechanism(vec({1, 3}), CoarseRanking::from_one_based({{1}, {2}})).mu_hat.isApprox(vec({2, 2})));
  const Eigen::VectorXd x = vec({0.3, -2, 7, 1});
  CHECK(coarse_isotonic_mechanism(x, CoarseRanking({{0, 1, 2, 3}})).mu_hat == x);

  CHECK(coarse_to_permutation(CoarseRanking::from_one_based({{2}, {1}}), vec({9, 0})) == Ranking::from_one_based({2, 1}));
  CHECK(coarse_to_permutation(CoarseRanking::from_one_based({{1, 2, 3}}), vec({1, 3, 2})) == Ranking::from_one_based({2, 3, 1}));
  CHECK(coarse_to_permutation(b12_3, vec({5, 5, 0})) == Ranking::from_one_based({1, 2, 3}));
}

TEST_CASE("ranking-constrained MLE") {
  const IsotonicFit fit = ranking_constrained_mle(Family::binomial(10), vec({4, 6}), Ranking::identity(2));
  CHECK(fit.mu_hat.isApprox(vec({5, 5})));
  REQUIRE(fit.theta_hat);
  CHECK(std::abs((*fit.theta_hat)[0]) < 1e-12);
  CHECK(std::abs((*fit.theta_hat)[1]) < 1e-12);

  const IsotonicFit g = ranking_constrained_mle(Family::gaussian(1.0), vec({1, 3, 0}), Ranking::identity(3));
  CHECK(g.theta_hat->isApprox(g.mu_hat));

  // boundary data: the pooled mean at 0 gives theta = -inf
  const IsotonicFit p = ranking_constrained_mle(Family::poisson(), vec({2, 0}), Ranking::identity(2));
  CHECK((*p.theta_hat)[1] == -std::numeric_limits<double>::infinity());
  CHECK(p.mu_hat[1] == 0.0);
  CHECK_THROWS_AS(ranking_constrained_mle(Family::binomial(10), vec({11, 2}), Ranking::identity(2)), std::invalid_argument);
}

TEST_CASE("MLE and projection coincide") {
  std::mt19937_64 rng(99);
  const std::vector<std::pair<Family, std::pair<double, double>>> fams = {
      {Family::gaussian(2.0), {-5, 5}}, {Family::binomial(10), {0, 10}}, {Family::poisson(), {0, 12}},
      {Family::gamma(2.0), {0.1, 9}}};
  for (const auto& [f, range] : fams) {
    for (int t = 0; t < 200; ++t) {
      const int n = 1 + static_cast<int>(rng() % 12);
      const Eigen::VectorXd x = oracle::random_vector(rng, n, range.first, range.second);
      const Ranking pi = oracle::random_ranking(rng, n);
      const Eigen::VectorXd a = ranking_constrained_mle(f, x, pi).mu_hat;
      const Eigen::VectorXd b = isotonic_mechanism(x, pi).mu_hat;
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("projection matches the pooling-pattern oracle") {
  std::mt19937_64 rng(1);
  for (int n = 1; n <= 8; ++n) {
    for (int t = 0; t < 200; ++t) {
      Eigen::VectorXd x = oracle::random_vector(rng, n, -5, 5);
      if (t % 4 == 0) x = x.array().round();  // exercise ties
      const Ranking pi = oracle::random_ranking(rng, n);
      const Eigen::VectorXd got = isotonic_mechanism(x, pi).mu_hat;
      CHECK((got - oracle::ranking_projection(x, pi)).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("coarse projection matches the refinement oracle") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const Eigen::VectorXd x = oracle::random_vector(rng, n, 0, 10);
    std::vector<int> sizes;
    for (int left = n; left > 0;) {
      const int s = 1 + static_cast<int>(rng() % static_cast<unsigned>(left));
      sizes.push_back(s);
      left -= s;
    }
    const CoarseRanking blocks = CoarseRanking::from_ranking(oracle::random_ranking(rng, n), sizes);
    const Eigen::VectorXd got = coarse_isotonic_mechanism(x, blocks).mu_hat;
    CHECK((got - oracle::coarse_projection(x, blocks)).squaredNorm() <= 1e-18 + 1e-12 * x.squaredNorm());
  }
}

TEST_CASE("projection properties") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + static_cast<int>(rng() % 40);
    const Eigen::VectorXd x = oracle::random_vector(rng, n, -10, 10);
    const Eigen::VectorXd y = oracle::random_vector(rng, n, -10, 10);
    const Eigen::VectorXd px = project_descending(x).mu_hat;
    const Eigen::VectorXd py = project_descending(y).mu_hat;
    // idempotent, bit for bit
    CHECK(project_descending(px).mu_hat == px);
    // non-expansive
    CHECK((px - py).norm() <= (x - y).norm() * (1 + 1e-12));
    // preserves the total
    CHECK(std::abs(px.sum() - x.sum()) <= 1e-10 * std::max(1.0, x.cwiseAbs().sum()));
    // feasible output
    for (int i = 0; i + 1 < n; ++i) CHECK(px[i] >= px[i + 1]);
    // feasible input is returned unchanged
    Eigen::VectorXd sorted = x;
    std::sort(sorted.data(), sorted.data() + n, std::greater<>());
    CHECK(project_descending(sorted).mu_hat == sorted);
  }
}

TEST_CASE("projection under a truthful ranking does not increase expected error") {
  // Proposition-style check: fixed mu* in the cone, Gaussian noise
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::VectorXd mu(10);
  for (int i = 0; i < 10; ++i) mu[i] = 10 - 0.5 * i;
  const int trials = 10000;
  std::vector<double> gap(trials);
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd x = mu;
    for (int i = 0; i < 10; ++i) x[i] += noise(rng);
    gap[static_cast<std::size_t>(t)] = (x - mu).squaredNorm() - (project_descending(x).mu_hat - mu).squaredNorm();
  }
  double m = 0;
  for (double g : gap) m += g;
  m /= trials;
  double v = 0;
  for (double g : gap) v += (g - m) * (g - m);
  const double se = std::sqrt(v / (trials - 1) / trials);
  CHECK(m >= -3 * se);
  // pathwise too, since mu lies in the cone
  for (double g : gap) CHECK(g >= -1e-9);
}
