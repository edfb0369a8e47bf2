#include "isomech/expfam.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>

#include "isomech/error.hpp"

namespace isomech {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + e^t) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void require_domain(const Family& f, double theta) {
  if (!f.in_domain(theta)) {
    throw InvalidParameter(f.name() + ": theta = " + std::to_string(theta) +
                           " outside the natural-parameter domain");
  }
}

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

Family Family::gaussian(double variance) {
  if (!(variance > 0) || !std::isfinite(variance)) {
    throw InvalidParameter("gaussian: variance must be positive and finite");
  }
  return Family(FamilyKind::Gaussian, variance);
}

Family Family::binomial(int trials) {
  if (trials < 1) throw InvalidParameter("binomial: trials must be a positive integer");
  return Family(FamilyKind::Binomial, trials);
}

Family Family::poisson() { return Family(FamilyKind::Poisson, 0.0); }

Family Family::gamma(double shape) {
  if (!(shape > 0) || !std::isfinite(shape)) {
    throw InvalidParameter("gamma: shape must be positive and finite");
  }
  return Family(FamilyKind::Gamma, shape);
}

std::string Family::name() const {
  switch (kind_) {
    case FamilyKind::Gaussian: return "gaussian(variance=" + fmt_num(param_) + ")";
    case FamilyKind::Binomial: return "binomial(m=" + std::to_string(trials()) + ")";
    case FamilyKind::Poisson: return "poisson";
    case FamilyKind::Gamma: return "gamma(m=" + fmt_num(param_) + ")";
  }
  return "unknown";
}

bool Family::in_domain(double theta) const {
  if (std::isnan(theta) || std::isinf(theta)) return false;
  return kind_ != FamilyKind::Gamma || theta < 0.0;
}

double Family::mean_lower() const { return kind_ == FamilyKind::Gaussian ? -kInf : 0.0; }

double Family::mean_upper() const { return kind_ == FamilyKind::Binomial ? param_ : kInf; }

bool Family::mean_is_interior(double mu) const {
  return std::isfinite(mu) && mu > mean_lower() && mu < mean_upper();
}

double log_partition(const Family& f, double theta) {
  require_domain(f, theta);
  switch (f.kind()) {
    case FamilyKind::Gaussian: return 0.5 * f.parameter() * theta * theta;
    case FamilyKind::Binomial: return f.parameter() * softplus(theta);
    case FamilyKind::Poisson: return std::exp(theta);
    case FamilyKind::Gamma: return -f.parameter() * std::log(-theta);
  }
  return 0.0;
}

double mean(const Family& f, double theta) {
  require_domain(f, theta);
  switch (f.kind()) {
    case FamilyKind::Gaussian: return f.parameter() * theta;
    case FamilyKind::Binomial: return f.parameter() * sigmoid(theta);
    case FamilyKind::Poisson: return std::exp(theta);
    case FamilyKind::Gamma: return -f.parameter() / theta;
  }
  return 0.0;
}

double natural_param(const Family& f, double mu) {
  if (!f.mean_is_interior(mu)) {
    throw InvalidParameter(f.name() + ": mean " + fmt_num(mu) +
                           " is not inside the open image of b' (no finite theta)");
  }
  switch (f.kind()) {
    case FamilyKind::Gaussian: return mu / f.parameter();
    case FamilyKind::Binomial: return std::log(mu) - std::log(f.parameter() - mu);
    case FamilyKind::Poisson: return std::log(mu);
    case FamilyKind::Gamma: return -f.parameter() / mu;
  }
  return 0.0;
}

double variance(const Family& f, double theta) {
  require_domain(f, theta);
  switch (f.kind()) {
    case FamilyKind::Gaussian: return f.parameter();
    case FamilyKind::Binomial: {
      const double e = std::exp(-std::abs(theta));
      return f.parameter() * e / ((1.0 + e) * (1.0 + e));
    }
    case FamilyKind::Poisson: return std::exp(theta);
    case FamilyKind::Gamma: return f.parameter() / (theta * theta);
  }
  return 0.0;
}

double variance_at_mean(const Family& f, double mu) {
  if (!(mu >= f.mean_lower() && mu <= f.mean_upper())) {
    throw InvalidParameter(f.name() + ": mean " + fmt_num(mu) + " outside the mean range");
  }
  switch (f.kind()) {
    case FamilyKind::Gaussian: return f.parameter();
    case FamilyKind::Binomial: return mu * (1.0 - mu / f.parameter());
    case FamilyKind::Poisson: return mu;
    case FamilyKind::Gamma: return mu * mu / f.parameter();
  }
  return 0.0;
}

double sample(const Family& f, double theta, Rng& rng) {
  require_domain(f, theta);
  switch (f.kind()) {
    case FamilyKind::Gaussian:
      return std::normal_distribution<double>(f.parameter() * theta, std::sqrt(f.parameter()))(rng);
    case FamilyKind::Binomial:
      return std::binomial_distribution<int>(f.trials(), sigmoid(theta))(rng);
    case FamilyKind::Poisson:
      return static_cast<double>(std::poisson_distribution<long long>(std::exp(theta))(rng));
    case FamilyKind::Gamma:
      // shape m, scale beta = -1/theta; libstdc++ uses Marsaglia-Tsang rejection.
      return std::gamma_distribution<double>(f.parameter(), -1.0 / theta)(rng);
  }
  return 0.0;
}

double sample_at_mean(const Family& f, double mu, Rng& rng) {
  if (!(mu >= f.mean_lower() && mu <= f.mean_upper()) || std::isnan(mu)) {
    throw InvalidParameter(f.name() + ": mean " + fmt_num(mu) + " outside the mean range");
  }
  switch (f.kind()) {
    case FamilyKind::Gaussian:
      return std::normal_distribution<double>(mu, std::sqrt(f.parameter()))(rng);
    case FamilyKind::Binomial:
      return std::binomial_distribution<int>(f.trials(), mu / f.parameter())(rng);
    case FamilyKind::Poisson:
      if (mu == 0.0) return 0.0;
      return static_cast<double>(std::poisson_distribution<long long>(mu)(rng));
    case FamilyKind::Gamma:
      if (mu == 0.0) throw InvalidParameter("gamma: mean must be positive");
      return std::gamma_distribution<double>(f.parameter(), mu / f.parameter())(rng);
  }
  return 0.0;
}

double log_density(const Family& f, double theta, double x) {
  require_domain(f, theta);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!std::isfinite(x)) return kNegInf;
  switch (f.kind()) {
    case FamilyKind::Gaussian: {
      const double s2 = f.parameter();
      const double d = x - s2 * theta;
      return -0.5 * d * d / s2 - 0.5 * std::log(2.0 * M_PI * s2);
    }
    case FamilyKind::Binomial: {
      const double m = f.parameter();
      if (x < 0 || x > m || x != std::floor(x)) return kNegInf;
      return std::lgamma(m + 1) - std::lgamma(x + 1) - std::lgamma(m - x + 1) + theta * x -
             m * softplus(theta);
    }
    case FamilyKind::Poisson:
      if (x < 0 || x != std::floor(x)) return kNegInf;
      return theta * x - std::exp(theta) - std::lgamma(x + 1);
    case FamilyKind::Gamma: {
      if (x <= 0) return kNegInf;
      const double m = f.parameter();
      return theta * x + m * std::log(-theta) + (m - 1) * std::log(x) - std::lgamma(m);
    }
  }
  return kNegInf;
}

double kl_divergence(const Family& f, double theta1, double theta2) {
  require_domain(f, theta1);
  require_domain(f, theta2);
  if (theta1 == theta2) return 0.0;
  double kl = 0.0;
  // Each branch is (theta1 - theta2) b'(theta1) - b(theta1) + b(theta2),
  // rearranged to avoid cancellation.
  switch (f.kind()) {
    case FamilyKind::Gaussian: {
      const double d = theta1 - theta2;
      kl = 0.5 * f.parameter() * d * d;
      break;
    }
    case FamilyKind::Binomial: {
      const double p1 = sigmoid(theta1);
      const double log_p_ratio = softplus(-theta2) - softplus(-theta1);
      const double log_q_ratio = softplus(theta2) - softplus(theta1);
      kl = f.parameter() * (p1 * log_p_ratio + (1.0 - p1) * log_q_ratio);
      break;
    }
    case FamilyKind::Poisson: {
      const double d = theta2 - theta1;
      kl = std::exp(theta1) * (std::expm1(d) - d);
      break;
    }
    case FamilyKind::Gamma: {
      const double r1 = theta2 / theta1 - 1.0;
      kl = f.parameter() * (r1 - std::log1p(r1));
      break;
    }
  }
  return std::max(kl, 0.0);  // roundoff only
}

double kl_divergence(const Family& f, const Eigen::Ref<const Eigen::VectorXd>& theta1,
                     const Eigen::Ref<const Eigen::VectorXd>& theta2) {
  if (theta1.size() != theta2.size()) throw ValidationError("kl_divergence: length mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < theta1.size(); ++i) total += kl_divergence(f, theta1[i], theta2[i]);
  return total;
}

void validate_bounds(const Family& f, const ScoreBounds& b) {
  if (!std::isfinite(b.v_min) || !std::isfinite(b.v_max) || b.v_min > b.v_max) {
    throw InvalidParameter("score bounds must be finite with v_min <= v_max");
  }
  switch (f.kind()) {
    case FamilyKind::Gaussian: break;
    case FamilyKind::Binomial:
      if (b.v_min < 0 || b.v_max > f.parameter()) {
        throw InvalidParameter(f.name() + ": bounds must lie in [0, m]");
      }
      break;
    case FamilyKind::Poisson:
    case FamilyKind::Gamma:
      if (!(b.v_min > 0)) throw InvalidParameter(f.name() + ": bounds require v_min > 0");
      break;
  }
}

double theta_min(const Family& f, const ScoreBounds& b) {
  validate_bounds(f, b);
  return f.mean_is_interior(b.v_min) ? natural_param(f, b.v_min) : -kInf;
}

double theta_max(const Family& f, const ScoreBounds& b) {
  validate_bounds(f, b);
  return f.mean_is_interior(b.v_max) ? natural_param(f, b.v_max) : kInf;
}

double sigma_max(const Family& f, const ScoreBounds& b) {
  validate_bounds(f, b);
  switch (f.kind()) {
    case FamilyKind::Gaussian: return f.parameter();
    case FamilyKind::Binomial: {
      const double half = 0.5 * f.parameter();
      if (b.v_min <= half && half <= b.v_max) return f.parameter() / 4.0;
      return std::max(variance_at_mean(f, b.v_min), variance_at_mean(f, b.v_max));
    }
    case FamilyKind::Poisson: return b.v_max;
    case FamilyKind::Gamma: return b.v_max * b.v_max / f.parameter();
  }
  return 0.0;
}

VarianceCertificate verify_variance_assumption(const Family& f, const ScoreBounds& b,
                                               int grid_points) {
  if (grid_points < 2) throw InvalidParameter("verify_variance_assumption: grid_points >= 2");
  VarianceCertificate cert;
  cert.sigma_sq = sigma_max(f, b);
  if (!(cert.sigma_sq > 0)) throw InvalidParameter(f.name() + ": zero variance on the bounds");
  const double width = b.v_max - b.v_min;
  switch (f.kind()) {
    case FamilyKind::Gaussian:
      cert.v_tilde_min = b.v_min;
      cert.v_tilde_max = b.v_max;
      cert.c_int = 1.0;
      cert.c_var = 1.0;
      break;
    case FamilyKind::Binomial:
      // middle half of the interval; b'' is concave in mu so its minimum
      // over the sub-interval sits at an endpoint
      cert.v_tilde_min = b.v_min + 0.25 * width;
      cert.v_tilde_max = b.v_max - 0.25 * width;
      cert.c_int = 0.5;
      cert.c_var = std::min(variance_at_mean(f, cert.v_tilde_min),
                            variance_at_mean(f, cert.v_tilde_max)) /
                   cert.sigma_sq;
      break;
    case FamilyKind::Poisson:
    case FamilyKind::Gamma:
      cert.v_tilde_min = std::max(b.v_min, 0.5 * b.v_max);
      cert.v_tilde_max = b.v_max;
      cert.c_int = 0.5;
      cert.c_var = f.kind() == FamilyKind::Poisson ? 0.5 : 0.25;
      break;
  }

  if (cert.v_tilde_max - cert.v_tilde_min < cert.c_int * width * (1.0 - 1e-12)) {
    throw AssumptionViolated("sub-interval shorter than C_int * (v_max - v_min)", cert.v_tilde_min);
  }
  const double floor = cert.c_var * cert.sigma_sq * (1.0 - 1e-12);
  for (int g = 0; g < grid_points; ++g) {
    const double t = static_cast<double>(g) / (grid_points - 1);
    const double mu = cert.v_tilde_min + t * (cert.v_tilde_max - cert.v_tilde_min);
    const double curvature =
        f.mean_is_interior(mu) ? variance(f, natural_param(f, mu)) : variance_at_mean(f, mu);
    if (curvature < floor) {
      throw AssumptionViolated(f.name() + ": b''(theta(mu)) = " + fmt_num(curvature) +
                                   " below C_var * sigma^2 = " + fmt_num(floor) +
                                   " at mu = " + fmt_num(mu),
                               mu);
    }
  }
  return cert;
}

}  // namespace isomech
