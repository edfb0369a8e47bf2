#pragma once

// Slow, independent reference computations used by the tests.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "isomech/expfam.hpp"
#include "isomech/isotonic.hpp"

namespace oracle {

// Projection of y onto {z_1 >= ... >= z_n} by trying every split of 1..n into
// contiguous runs, averaging each run, and keeping the best feasible candidate.
inline Eigen::VectorXd chain_projection(const Eigen::VectorXd& y) {
  const int n = static_cast<int>(y.size());
  if (n == 0) return y;
  Eigen::VectorXd best = y;
  double best_dist = std::numeric_limits<double>::infinity();
  const unsigned patterns = 1U << (n - 1);
  Eigen::VectorXd cand(n);
  for (unsigned mask = 0; mask < patterns; ++mask) {
    int start = 0;
    for (int i = 0; i < n; ++i) {
      const bool cut = i == n - 1 || ((mask >> i) & 1U);
      if (!cut) continue;
      const double avg = y.segment(start, i - start + 1).mean();
      cand.segment(start, i - start + 1).setConstant(avg);
      start = i + 1;
    }
    bool feasible = true;
    for (int i = 0; i + 1 < n; ++i) feasible = feasible && cand[i] >= cand[i + 1] - 1e-12;
    if (!feasible) continue;
    const double d = (cand - y).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = cand;
    }
  }
  return best;
}

// Projection onto the cone of `ranking` (ranking[0] largest), in item order.
inline Eigen::VectorXd ranking_projection(const Eigen::VectorXd& x, const isomech::Ranking& ranking) {
  const int n = ranking.size();
  Eigen::VectorXd y(n);
  for (int k = 0; k < n; ++k) y[k] = x[ranking[k]];
  const Eigen::VectorXd z = chain_projection(y);
  Eigen::VectorXd out(n);
  for (int k = 0; k < n; ++k) out[ranking[k]] = z[k];
  return out;
}

// The block-order cone is the union of the cones of every total order that
// refines it, so its projection is the nearest of those projections.
inline Eigen::VectorXd coarse_projection(const Eigen::VectorXd& x, const isomech::CoarseRanking& blocks) {
  std::vector<std::vector<int>> perms;
  for (auto b : blocks.blocks()) perms.push_back(b);
  Eigen::VectorXd best = x;
  double best_dist = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t)> rec = [&](std::size_t level) {
    if (level == perms.size()) {
      std::vector<int> order;
      for (const auto& p : perms) order.insert(order.end(), p.begin(), p.end());
      const Eigen::VectorXd cand = ranking_projection(x, isomech::Ranking(order));
      const double d = (cand - x).squaredNorm();
      if (d < best_dist) {
        best_dist = d;
        best = cand;
      }
      return;
    }
    std::sort(perms[level].begin(), perms[level].end());
    do {
      rec(level + 1);
    } while (std::next_permutation(perms[level].begin(), perms[level].end()));
  };
  rec(0);
  return best;
}

// Densities written out directly from the textbook parameterizations.
inline double gaussian_logpdf(double mean, double var, double x) {
  return -0.5 * std::log(2 * M_PI * var) - (x - mean) * (x - mean) / (2 * var);
}
inline double gamma_logpdf(double shape, double rate, double x) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1) * std::log(x) - rate * x;
}
inline double binomial_logpmf(int m, double p, int x) {
  return std::lgamma(m + 1.0) - std::lgamma(x + 1.0) - std::lgamma(m - x + 1.0) + x * std::log(p) +
         (m - x) * std::log1p(-p);
}
inline double poisson_logpmf(double lambda, int x) {
  return x * std::log(lambda) - lambda - std::lgamma(x + 1.0);
}

// Composite Simpson rule on [a, b] with `panels` (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// KL(p_theta1 || p_theta2) by quadrature or summation over the support.
inline double kl(const isomech::Family& f, double t1, double t2) {
  using isomech::FamilyKind;
  switch (f.kind()) {
    case FamilyKind::Gaussian: {
      const double v = f.parameter();
      const double m1 = v * t1, m2 = v * t2;
      const double sd = std::sqrt(v);
      const double lo = std::min(m1, m2) - 40 * sd, hi = std::max(m1, m2) + 40 * sd;
      return simpson(
          [&](double x) {
            const double l1 = gaussian_logpdf(m1, v, x);
            return std::exp(l1) * (l1 - gaussian_logpdf(m2, v, x));
          },
          lo, hi, 200000);
    }
    case FamilyKind::Binomial: {
      const int m = f.trials();
      const double p1 = 1 / (1 + std::exp(-t1)), p2 = 1 / (1 + std::exp(-t2));
      double s = 0;
      for (int x = 0; x <= m; ++x) {
        const double l1 = binomial_logpmf(m, p1, x);
        s += std::exp(l1) * (l1 - binomial_logpmf(m, p2, x));
      }
      return s;
    }
    case FamilyKind::Poisson: {
      const double l1 = std::exp(t1), l2 = std::exp(t2);
      const int top = static_cast<int>(l1 + 40 * std::sqrt(l1) + 200);
      double s = 0;
      for (int x = 0; x <= top; ++x) {
        const double a = poisson_logpmf(l1, x);
        s += std::exp(a) * (a - poisson_logpmf(l2, x));
      }
      return s;
    }
    case FamilyKind::Gamma: {
      const double shape = f.parameter();
      const double r1 = -t1, r2 = -t2;
      // substitute x = e^u so the integrand is smooth near zero
      const double center = std::log(shape / r1);
      return simpson(
          [&](double u) {
            const double x = std::exp(u);
            const double l1 = gamma_logpdf(shape, r1, x);
            return std::exp(l1) * (l1 - gamma_logpdf(shape, r2, x)) * x;
          },
          center - 30, center + 6, 200000);
    }
  }
  return 0;
}

// Central difference of b' at theta.
inline double curvature(const isomech::Family& f, double theta, double h = 1e-5) {
  return (isomech::mean(f, theta + h) - isomech::mean(f, theta - h)) / (2 * h);
}

// Descending sort positions: ranking of v, ties by ascending index.
inline std::vector<int> sorted_order(const Eigen::VectorXd& v) {
  std::vector<int> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] > v[b]; });
  return idx;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline isomech::Ranking random_ranking(std::mt19937_64& rng, int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return isomech::Ranking(p);
}

}  // namespace oracle
