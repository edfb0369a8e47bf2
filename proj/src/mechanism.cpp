#include "isomech/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <string>

#include "isomech/error.hpp"
#include "isomech/parallel.hpp"
#include "isomech/stats.hpp"

namespace isomech {
namespace {

void validate_mu_star(const Family& f, const Eigen::Ref<const Eigen::VectorXd>& mu_star) {
  if (mu_star.size() == 0) throw InvalidParameter("mu_star: empty");
  for (Eigen::Index i = 0; i < mu_star.size(); ++i) {
    const double m = mu_star[i];
    if (!std::isfinite(m) || m < f.mean_lower() || m > f.mean_upper() ||
        (f.kind() == FamilyKind::Gamma && m <= 0)) {
      throw InvalidParameter("mu_star[" + std::to_string(i + 1) + "] = " + std::to_string(m) +
                             " outside the mean range of " + f.name());
    }
  }
}

int constraint_size(const Constraint& c) {
  return std::visit([](const auto& r) { return r.size(); }, c);
}

IsotonicFit apply(const Constraint& c, const Eigen::VectorXd& x) {
  if (const auto* r = std::get_if<Ranking>(&c)) return isotonic_mechanism(x, *r);
  return coarse_isotonic_mechanism(x, std::get<CoarseRanking>(c));
}

}  // namespace

namespace {

// Shortest text that parses back to the same double.
std::string exact(double v) {
  char buf[32];
  for (int digits = 6; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace

UtilityFn UtilityFn::exponential(double alpha) {
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw InvalidParameter("exp utility: alpha >= 0");
  return {Kind::Exponential, alpha};
}

UtilityFn UtilityFn::parse(const std::string& spec) {
  if (spec == "relu_square") return relu_square();
  if (spec == "identity") return identity();
  const auto colon = spec.find(':');
  if (colon != std::string::npos) {
    const std::string head = spec.substr(0, colon);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(spec.substr(colon + 1), &used);
      if (used != spec.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("utility: bad parameter in \"" + spec + "\"");
    }
    if (head == "exp") return exponential(value);
    if (head == "hinge") return hinge(value);
  }
  throw ValidationError("utility: unknown kind \"" + spec +
                        "\" (expected relu_square, identity, exp:<alpha>, hinge:<t>)");
}

std::string UtilityFn::name() const {
  switch (kind) {
    case Kind::ReluSquare: return "relu_square";
    case Kind::Identity: return "identity";
    case Kind::Exponential: return "exp:" + exact(param);
    case Kind::Hinge: return "hinge:" + exact(param);
  }
  return "unknown";
}

double UtilityFn::operator()(double x) const {
  switch (kind) {
    case Kind::ReluSquare: {
      const double r = std::max(x, 0.0);
      return r * r;
    }
    case Kind::Identity: return x;
    case Kind::Exponential: return std::exp(param * x);
    case Kind::Hinge: return std::max(x - param, 0.0);
  }
  return 0.0;
}

double realized_utility(const Eigen::Ref<const Eigen::VectorXd>& mu_hat, const UtilityFn& u) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < mu_hat.size(); ++i) total += u(mu_hat[i]);
  return total;
}

Eigen::VectorXd draw_scores(const Family& f, const Eigen::Ref<const Eigen::VectorXd>& mu_star,
                            int scores_per_item, Rng& rng) {
  Eigen::VectorXd x(mu_star.size());
  for (Eigen::Index i = 0; i < mu_star.size(); ++i) {
    double s = 0.0;
    for (int r = 0; r < scores_per_item; ++r) s += sample_at_mean(f, mu_star[i], rng);
    x[i] = s / scores_per_item;
  }
  return x;
}

Eigen::MatrixXd utility_samples(const Family& f, const Eigen::Ref<const Eigen::VectorXd>& mu_star,
                                const std::vector<Constraint>& constraints, const UtilityFn& u,
                                const MonteCarloOptions& opts) {
  validate_mu_star(f, mu_star);
  if (opts.trials < 1) throw InvalidParameter("trials must be >= 1");
  if (opts.scores_per_item < 1) throw InvalidParameter("scores_per_item must be >= 1");
  for (const auto& c : constraints) {
    if (constraint_size(c) != mu_star.size()) {
      throw ValidationError("constraint size does not match mu_star");
    }
  }
  Eigen::MatrixXd out(opts.trials, static_cast<Eigen::Index>(constraints.size()));
  parallel_for(static_cast<std::size_t>(opts.trials), opts.threads, [&](std::size_t t) {
    Rng rng = substream(opts.seed, {t});
    const Eigen::VectorXd x = draw_scores(f, mu_star, opts.scores_per_item, rng);
    for (std::size_t c = 0; c < constraints.size(); ++c) {
      out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) =
          realized_utility(apply(constraints[c], x).mu_hat, u);
    }
  });
  return out;
}

UtilityEstimate summarize(const Eigen::Ref<const Eigen::VectorXd>& samples, std::uint64_t seed) {
  const Eigen::VectorXd copy = samples;
  const MeanSe s = mean_se({copy.data(), static_cast<std::size_t>(copy.size())});
  return {s.mean, s.std_error, copy.size(), seed};
}

UtilityEstimate expected_utility(const Family& f, const Eigen::Ref<const Eigen::VectorXd>& mu_star,
                                 const Ranking& ranking, const UtilityFn& u,
                                 const MonteCarloOptions& opts) {
  const Eigen::MatrixXd s = utility_samples(f, mu_star, {ranking}, u, opts);
  return summarize(s.col(0), opts.seed);
}

UtilityEstimate expected_utility_coarse(const Family& f,
                                        const Eigen::Ref<const Eigen::VectorXd>& mu_star,
                                        const CoarseRanking& blocks, const UtilityFn& u,
                                        const MonteCarloOptions& opts) {
  const Eigen::MatrixXd s = utility_samples(f, mu_star, {blocks}, u, opts);
  return summarize(s.col(0), opts.seed);
}

std::vector<RankedUtility> rank_all_utilities(const Family& f,
                                              const Eigen::Ref<const Eigen::VectorXd>& mu_star,
                                              const UtilityFn& u, const MonteCarloOptions& opts) {
  const auto n = mu_star.size();
  if (n > kMaxEnumeratedItems) {
    throw InvalidParameter("rank_all_utilities: n = " + std::to_string(n) +
                           " exceeds 8 (n! rankings); use expected_utility on selected rankings");
  }
  const std::vector<Ranking> rankings = all_rankings(static_cast<int>(n));
  const std::vector<Constraint> constraints(rankings.begin(), rankings.end());
  const Eigen::MatrixXd samples = utility_samples(f, mu_star, constraints, u, opts);

  std::vector<RankedUtility> out;
  for (std::size_t r = 0; r < rankings.size(); ++r) {
    out.push_back({rankings[r], summarize(samples.col(static_cast<Eigen::Index>(r)), opts.seed), {}});
  }
  std::vector<std::size_t> order(out.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out[a].estimate.mean > out[b].estimate.mean;
  });
  const auto best = static_cast<Eigen::Index>(order.front());
  std::vector<RankedUtility> sorted;
  for (std::size_t idx : order) {
    RankedUtility r = out[idx];
    r.gap_to_best = summarize(samples.col(static_cast<Eigen::Index>(idx)) - samples.col(best), opts.seed);
    sorted.push_back(std::move(r));
  }
  return sorted;
}

Ranking truthful_ranking(const Eigen::Ref<const Eigen::VectorXd>& mu_star) {
  std::vector<int> perm(static_cast<std::size_t>(mu_star.size()));
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return mu_star[a] > mu_star[b]; });
  return Ranking(std::move(perm));
}

}  // namespace isomech
