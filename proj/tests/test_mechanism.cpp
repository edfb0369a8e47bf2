#include <doctest.h>

#include <random>

#include "isomech/error.hpp"
#include "isomech/mechanism.hpp"
#include "isomech/order.hpp"
#include "oracles.hpp"

using namespace isomech;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

MonteCarloOptions options(std::int64_t trials, std::uint64_t seed) {
  MonteCarloOptions o;
  o.trials = trials;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("utility functions") {
  CHECK(realized_utility(vec({1, 2}), UtilityFn::identity()) == 3.0);
  CHECK(realized_utility(vec({-1, 2}), UtilityFn::relu_square()) == 4.0);
  for (const UtilityFn& u : {UtilityFn::identity(), UtilityFn::relu_square(), UtilityFn::hinge(0.0)}) {
    CHECK(realized_utility(vec({0, 0, 0}), u) == 0.0);
  }
  CHECK(UtilityFn::parse("exp:0.25").param == 0.25);
  CHECK(UtilityFn::parse("hinge:-1.5")(0.0) == doctest::Approx(1.5));
  CHECK(UtilityFn::parse(UtilityFn::exponential(1e-7).name()).param == 1e-7);
  CHECK_THROWS_AS(UtilityFn::parse("cubic"), ValidationError);
  CHECK_THROWS_AS(UtilityFn::exponential(-1), InvalidParameter);
}

TEST_CASE("every utility kind is nondecreasing and convex") {
  for (const UtilityFn& u : {UtilityFn::identity(), UtilityFn::relu_square(), UtilityFn::exponential(0.7),
                             UtilityFn::hinge(1.0)}) {
    for (int g = 0; g <= 200; ++g) {
      const double x = -10 + 0.1 * g, h = 0.05;
      CHECK(u(x + h) >= u(x) - 1e-12);
      CHECK(u(x + h) + u(x - h) - 2 * u(x) >= -1e-9 * std::max(1.0, std::abs(u(x))));
    }
  }
}

TEST_CASE("noiseless truthful report recovers the true utility") {
  const Eigen::VectorXd mu = vec({8, 7, 6, 4});
  const UtilityEstimate e =
      expected_utility(Family::gaussian(1e-12), mu, Ranking::identity(4), UtilityFn::relu_square(), options(2000, 1));
  CHECK(std::abs(e.mean - (64 + 49 + 36 + 16)) < 1e-4);
}

TEST_CASE("common random numbers are deterministic across runs and thread counts") {
  const Eigen::VectorXd mu = vec({8, 7, 6, 4});
  MonteCarloOptions a = options(5000, 42), b = options(5000, 42);
  a.threads = 1;
  b.threads = 3;
  const Ranking pi = Ranking::from_one_based({2, 1, 4, 3});
  const UtilityEstimate ea = expected_utility(Family::poisson(), mu, pi, UtilityFn::relu_square(), a);
  const UtilityEstimate eb = expected_utility(Family::poisson(), mu, pi, UtilityFn::relu_square(), b);
  CHECK(ea.mean == eb.mean);
  CHECK(ea.std_error == eb.std_error);
  const UtilityEstimate ec = expected_utility(Family::poisson(), mu, pi, UtilityFn::relu_square(), options(5000, 43));
  CHECK(ea.mean != ec.mean);

  // a column of the joint sampler equals the single-ranking estimate
  const Eigen::MatrixXd s = utility_samples(Family::poisson(), mu, {Ranking::identity(4), pi}, UtilityFn::relu_square(), a);
  CHECK(summarize(s.col(1), 42).mean == ea.mean);
}

TEST_CASE("coarse estimates reduce to full ones") {
  const Eigen::VectorXd mu = vec({8, 7, 6, 4});
  const MonteCarloOptions o = options(3000, 5);
  const Ranking pi = Ranking::from_one_based({1, 3, 2, 4});
  const UtilityEstimate full = expected_utility(Family::binomial(10), mu, pi, UtilityFn::relu_square(), o);
  const UtilityEstimate coarse =
      expected_utility_coarse(Family::binomial(10), mu, CoarseRanking::singletons(pi), UtilityFn::relu_square(), o);
  CHECK(full.mean == coarse.mean);

  // one block: no constraint, so the estimate is the raw score utility
  const UtilityEstimate free =
      expected_utility_coarse(Family::binomial(10), mu, CoarseRanking({{0, 1, 2, 3}}), UtilityFn::identity(), options(20000, 6));
  CHECK(std::abs(free.mean - mu.sum()) < 4 * free.std_error);
}

TEST_CASE("truthful coarse ranking is the best block assignment") {
  const Eigen::VectorXd mu = vec({8, 7, 6, 4});
  const auto candidates = all_coarse_rankings({1, 3});
  std::vector<Constraint> cs(candidates.begin(), candidates.end());
  const Eigen::MatrixXd s = utility_samples(Family::binomial(10), mu, cs, UtilityFn::relu_square(), options(100000, 7));
  const CoarseRanking truth = CoarseRanking::from_ranking(Ranking::identity(4), {1, 3});
  Eigen::Index t = -1;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (candidates[k] == truth) t = static_cast<Eigen::Index>(k);
  }
  REQUIRE(t >= 0);
  const Eigen::VectorXd means = s.colwise().mean();
  for (Eigen::Index k = 0; k < means.size(); ++k) CHECK(means[t] >= means[k]);
}

TEST_CASE("ranking enumeration") {
  const auto one = rank_all_utilities(Family::poisson(), vec({3}), UtilityFn::relu_square(), options(100, 1));
  CHECK(one.size() == 1);
  const auto all = rank_all_utilities(Family::binomial(10), vec({8, 7, 6, 4}), UtilityFn::relu_square(), options(20000, 3));
  REQUIRE(all.size() == 24);
  CHECK(all.front().ranking == Ranking::identity(4));
  CHECK(all.front().gap_to_best.mean == 0.0);
  for (std::size_t k = 1; k < all.size(); ++k) CHECK(all[k - 1].estimate.mean >= all[k].estimate.mean);
  CHECK_THROWS_AS(rank_all_utilities(Family::poisson(), Eigen::VectorXd::Ones(9), UtilityFn::identity(), options(1, 1)),
                  InvalidParameter);
}

TEST_CASE("truthful ranking helper") {
  CHECK(truthful_ranking(vec({1, 5, 3})) == Ranking::from_one_based({2, 3, 1}));
  CHECK(truthful_ranking(vec({2, 2, 1})) == Ranking::from_one_based({1, 2, 3}));
}

TEST_CASE("an upward swap never lowers expected utility") {
  std::mt19937_64 rng(21);
  const std::vector<std::pair<Family, std::pair<double, double>>> fams = {
      {Family::gaussian(1.0), {0, 6}}, {Family::binomial(10), {1, 9}}, {Family::poisson(), {1, 9}},
      {Family::gamma(2.0), {1, 6}}};
  for (const auto& [f, range] : fams) {
    for (int t = 0; t < 20; ++t) {
      const int n = 3 + static_cast<int>(rng() % 2);
      Eigen::VectorXd mu = oracle::random_vector(rng, n, range.first, range.second);
      std::sort(mu.data(), mu.data() + n, std::greater<>());
      const Ranking nu = oracle::random_ranking(rng, n);
      // swap a pair that is in the wrong order under nu
      int i = -1, j = -1;
      for (int a = 0; a < n && i < 0; ++a) {
        for (int b = a + 1; b < n; ++b) {
          if (nu[a] > nu[b]) {
            i = a;
            j = b;
            break;
          }
        }
      }
      if (i < 0) continue;
      std::vector<int> p = nu.perm();
      std::swap(p[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(j)]);
      const Ranking pi(p);
      REQUIRE(is_upward_swap(pi, nu));
      const Eigen::MatrixXd s = utility_samples(f, mu, {pi, nu}, UtilityFn::relu_square(), options(4000, 100 + t));
      const Eigen::VectorXd gap = s.col(0) - s.col(1);
      const UtilityEstimate g = summarize(gap, 0);
      CHECK(g.mean >= -3 * g.std_error);
    }
  }
}

TEST_CASE("mu_star outside the mean range is rejected") {
  CHECK_THROWS_AS(expected_utility(Family::binomial(10), vec({11, 2}), Ranking::identity(2), UtilityFn::identity(), options(10, 1)),
                  InvalidParameter);
  CHECK_THROWS_AS(expected_utility(Family::poisson(), vec({3, 2}), Ranking::identity(3), UtilityFn::identity(), options(10, 1)),
                  std::invalid_argument);
}
