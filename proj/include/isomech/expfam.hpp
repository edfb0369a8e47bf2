#pragma once

// Canonical-form exponential families p_theta(x) = exp(theta x - b(theta)) c(x)
// for the four score models used by the mechanism: Gaussian with known
// variance, Binomial with m trials, Poisson, and Gamma with known shape.
//
// The carrier c(x) has no standalone representation; it enters only through
// log_density.

#include <Eigen/Core>
#include <string>

#include "isomech/random.hpp"

namespace isomech {

enum class FamilyKind { Gaussian, Binomial, Poisson, Gamma };

/// One exponential family. The fixed parameter (Gaussian variance, Binomial
/// trials, Gamma shape) belongs to the family, not to the per-item theta.
class Family {
 public:
  static Family gaussian(double variance);
  static Family binomial(int trials);
  static Family poisson();
  static Family gamma(double shape);

  FamilyKind kind() const { return kind_; }
  /// sigma^2 for Gaussian, m for Binomial and Gamma, unused for Poisson.
  double parameter() const { return param_; }
  int trials() const { return static_cast<int>(param_); }

  std::string name() const;

  /// True if theta lies in the natural-parameter domain (Gamma: theta < 0).
  bool in_domain(double theta) const;
  /// Closed range of attainable means [lo, hi]; hi may be +inf.
  double mean_lower() const;
  double mean_upper() const;
  /// True if mu lies strictly inside the image of b'.
  bool mean_is_interior(double mu) const;

  friend bool operator==(const Family&, const Family&) = default;

 private:
  Family(FamilyKind kind, double param) : kind_(kind), param_(param) {}
  FamilyKind kind_;
  double param_;
};

/// Mean-scale score bounds [v_min, v_max].
struct ScoreBounds {
  double v_min = 0.0;
  double v_max = 0.0;
};

/// Throws InvalidParameter unless the bounds are admissible for f.
void validate_bounds(const Family& f, const ScoreBounds& bounds);
/// (b')^{-1}(v_min); -inf when v_min sits on the lower image boundary.
double theta_min(const Family& f, const ScoreBounds& bounds);
/// (b')^{-1}(v_max); +inf when v_max sits on the upper image boundary.
double theta_max(const Family& f, const ScoreBounds& bounds);

struct VarianceCertificate {
  double v_tilde_min = 0.0;
  double v_tilde_max = 0.0;
  double c_int = 0.0;
  double c_var = 0.0;
  double sigma_sq = 0.0;
};

double log_partition(const Family& f, double theta);
/// b'(theta), the mean.
double mean(const Family& f, double theta);
/// (b')^{-1}(mu). Boundary and out-of-range means throw InvalidParameter.
double natural_param(const Family& f, double mu);
/// b''(theta), the variance.
double variance(const Family& f, double theta);
/// b''((b')^{-1}(mu)) in closed form; defined on the closed mean range.
double variance_at_mean(const Family& f, double mu);

double sample(const Family& f, double theta, Rng& rng);
/// Draw at a mean-scale parameter. Unlike sample(), accepts boundary means
/// (Binomial 0 or m, Poisson 0), where the draw is degenerate.
double sample_at_mean(const Family& f, double mu, Rng& rng);

/// Log density (log mass for discrete families). Outside the support this is
/// -inf rather than an error.
double log_density(const Family& f, double theta, double x);

/// KL(p_theta1 || p_theta2) = (theta1 - theta2) b'(theta1) - b(theta1) + b(theta2).
double kl_divergence(const Family& f, double theta1, double theta2);

/// KL between product measures with independent coordinates: the sum of the
/// coordinate-wise divergences.
double kl_divergence(const Family& f, const Eigen::Ref<const Eigen::VectorXd>& theta1,
                     const Eigen::Ref<const Eigen::VectorXd>& theta2);

/// max of b'' over [theta_min, theta_max], in closed form.
double sigma_max(const Family& f, const ScoreBounds& bounds);

inline constexpr int kDefaultVarianceGrid = 1024;

/// Closed-form certificate for the variance lower bound on a sub-interval,
/// confirmed on a uniform grid of `grid_points` means. Throws
/// AssumptionViolated carrying the first offending mean.
VarianceCertificate verify_variance_assumption(const Family& f, const ScoreBounds& bounds,
                                               int grid_points = kDefaultVarianceGrid);

}  // namespace isomech
