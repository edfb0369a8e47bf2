#include "isomech/minimax.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "isomech/error.hpp"
#include "isomech/random.hpp"

namespace isomech {
namespace {

int words_for(int bits) { return (bits + 63) / 64; }

void xor_into(BitWord& acc, const BitWord& row) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] ^= row[i];
}

int popcount(const BitWord& w) {
  int c = 0;
  for (std::uint64_t x : w) c += std::popcount(x);
  return c;
}

int popcount_masked(const BitWord& w, const BitWord& mask) {
  int c = 0;
  for (std::size_t i = 0; i < w.size(); ++i) c += std::popcount(w[i] & mask[i]);
  return c;
}

struct Layout {
  int base = 0;     // smallest block size
  BitWord large;    // blocks holding base + 1 coordinates
};

Layout layout_of(const LowerBoundConstruction& lb) {
  Layout l;
  l.base = lb.n / lb.k;
  l.large.assign(static_cast<std::size_t>(words_for(lb.k)), 0);
  for (int b = 0; b < lb.k; ++b) {
    if (lb.block_sizes[static_cast<std::size_t>(b)] > l.base) {
      l.large[static_cast<std::size_t>(b / 64)] |= std::uint64_t{1} << (b % 64);
    }
  }
  return l;
}

// Walks every nonzero codeword in Gray-code order. visit(word) returns false to stop.
template <class Visit>
bool for_each_nonzero(const LowerBoundConstruction& lb, Visit&& visit) {
  BitWord cw(static_cast<std::size_t>(words_for(lb.k)), 0);
  const std::uint64_t count = lb.omega_size();
  for (std::uint64_t i = 1; i < count; ++i) {
    xor_into(cw, lb.basis[static_cast<std::size_t>(std::countr_zero(i))]);
    if (!visit(cw)) return false;
  }
  return true;
}

// log2(2^d - 1) >= k / 8, i.e. at least 2^{k/8} nonzero codewords.
int code_dimension(int k) {
  for (int d = 1; d <= 62; ++d) {
    const double nonzero = std::ldexp(1.0, d) - 1.0;
    if (8.0 * std::log2(nonzero) >= k) return d;
  }
  return 63;
}

}  // namespace

BitWord LowerBoundConstruction::codeword(std::uint64_t index) const {
  if (index >= omega_size()) throw InvalidParameter("codeword index out of range");
  BitWord w(static_cast<std::size_t>(words_for(k)), 0);
  for (std::size_t r = 0; r < basis.size(); ++r) {
    if ((index >> r) & 1U) xor_into(w, basis[r]);
  }
  return w;
}

bool LowerBoundConstruction::bit(const BitWord& w, int block) const {
  return (w[static_cast<std::size_t>(block / 64)] >> (block % 64)) & 1U;
}

Eigen::VectorXd LowerBoundConstruction::mu(const BitWord& omega) const {
  const double span = certificate.v_tilde_max - certificate.v_tilde_min;
  Eigen::VectorXd out(n);
  Eigen::Index i = 0;
  for (int b = 0; b < k; ++b) {
    const double level = certificate.v_tilde_min + b * span / k + (bit(omega, b) ? gamma : 0.0);
    out.segment(i, block_sizes[static_cast<std::size_t>(b)]).setConstant(level);
    i += block_sizes[static_cast<std::size_t>(b)];
  }
  return out;
}

Eigen::VectorXd LowerBoundConstruction::theta(const BitWord& omega) const {
  Eigen::VectorXd m = mu(omega);
  for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = natural_param(family, m[i]);
  return m;
}

LowerBoundConstruction build_lower_bound(const Family& f, const ScoreBounds& bounds, int n, double c,
                                         std::uint64_t seed, int max_attempts) {
  if (n < 8) throw InvalidParameter("build_lower_bound: n must be at least 8");
  LowerBoundConstruction lb;
  lb.family = f;
  lb.bounds = bounds;
  lb.n = n;
  lb.certificate = verify_variance_assumption(f, bounds);
  const double sigma_sq = lb.certificate.sigma_sq;
  const double span = lb.certificate.v_tilde_max - lb.certificate.v_tilde_min;
  if (!(span > 0)) throw InvalidParameter("build_lower_bound: degenerate score interval");
  lb.c = c > 0 ? c : lb.certificate.c_var / 16.0;

  const double k_real = std::cbrt(n * span * span / (lb.c * lb.c * sigma_sq));
  lb.k = static_cast<int>(std::min<double>(std::floor(k_real), n));
  lb.k = std::max(lb.k, 1);
  lb.gamma = lb.c * std::sqrt(sigma_sq * lb.k / n);

  const int base = n / lb.k;
  const int remainder = n % lb.k;
  lb.block_sizes.assign(static_cast<std::size_t>(lb.k), base);
  for (int b = lb.k - remainder; b < lb.k; ++b) ++lb.block_sizes[static_cast<std::size_t>(b)];

  const int dim = code_dimension(lb.k);
  if (dim > kLowerBoundMaxDimension) {
    throw InvalidParameter("build_lower_bound: k = " + std::to_string(lb.k) +
                           " needs 2^" + std::to_string(dim) +
                           " codewords, beyond exhaustive verification");
  }
  if (dim > lb.k) {
    throw ConstructionFailed("build_lower_bound: k = " + std::to_string(lb.k) +
                             " too small for a code of dimension " + std::to_string(dim));
  }

  // Weighted distance sum_{b differs} |block b| >= n/8 makes the squared
  // separation gamma^2 n / 8 hold with unequal blocks too.
  const int hamming_required = (lb.k + 7) / 8;
  const int weight_required = (n + 7) / 8;
  const int words = words_for(lb.k);
  const std::uint64_t top_mask =
      lb.k % 64 == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << (lb.k % 64)) - 1;

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    lb.attempts = attempt + 1;
    Rng rng = substream(seed, {0x6c62ULL, static_cast<std::uint64_t>(attempt)});
    lb.basis.assign(static_cast<std::size_t>(dim), BitWord(static_cast<std::size_t>(words), 0));
    for (auto& row : lb.basis) {
      for (auto& w : row) w = rng();
      row.back() &= top_mask;
    }
    const Layout layout = layout_of(lb);
    const bool packed = for_each_nonzero(lb, [&](const BitWord& cw) {
      const int h = popcount(cw);
      return h >= hamming_required && layout.base * h + popcount_masked(cw, layout.large) >= weight_required;
    });
    if (!packed) continue;
    lb.kl_budget = verify_lower_bound(lb).max_kl;
    return lb;
  }
  throw ConstructionFailed("build_lower_bound: no code with distance " + std::to_string(hamming_required) +
                           " after " + std::to_string(max_attempts) + " attempts");
}

LowerBoundCheck verify_lower_bound(const LowerBoundConstruction& lb) {
  LowerBoundCheck check;
  const double sigma_sq = lb.sigma_sq();
  const double c_var = lb.certificate.c_var;
  const double span = lb.certificate.v_tilde_max - lb.certificate.v_tilde_min;
  check.hamming_required = lb.k / 8.0;
  check.sq_distance_required = lb.c * lb.c * sigma_sq * lb.k / 8.0;
  const double nonzero = static_cast<double>(lb.omega_size() - 1);
  check.kl_limit = nonzero > 0 ? std::log(nonzero) / 8.0 : 0.0;
  const double chain_scale = 1.0 / (2.0 * c_var * c_var * sigma_sq);
  check.kl_chain_bound = lb.gamma * lb.gamma * lb.n * chain_scale;

  // Per-block KL contribution when omega_b = 1 (additivity over coordinates).
  std::vector<double> block_kl(static_cast<std::size_t>(lb.k));
  for (int b = 0; b < lb.k; ++b) {
    const double low = lb.certificate.v_tilde_min + b * span / lb.k;
    const double high = low + lb.gamma;
    const double tol = 1e-12 * std::max(1.0, std::abs(lb.certificate.v_tilde_max));
    if (low < lb.certificate.v_tilde_min - tol || high > lb.certificate.v_tilde_max + tol) {
      check.in_range = false;
    }
    block_kl[static_cast<std::size_t>(b)] =
        lb.block_sizes[static_cast<std::size_t>(b)] *
        kl_divergence(lb.family, natural_param(lb.family, high), natural_param(lb.family, low));
  }

  const Layout layout = layout_of(lb);
  check.min_hamming = lb.k + 1;
  int min_weight = lb.n + 1;
  for_each_nonzero(lb, [&](const BitWord& cw) {
    const int h = popcount(cw);
    const int weight = layout.base * h + popcount_masked(cw, layout.large);
    check.min_hamming = std::min(check.min_hamming, h);
    min_weight = std::min(min_weight, weight);
    double kl = 0.0;
    for (std::size_t wi = 0; wi < cw.size(); ++wi) {
      for (std::uint64_t bits = cw[wi]; bits != 0; bits &= bits - 1) {
        kl += block_kl[wi * 64 + static_cast<std::size_t>(std::countr_zero(bits))];
      }
    }
    check.max_kl = std::max(check.max_kl, kl);
    if (kl > lb.gamma * lb.gamma * weight * chain_scale * (1 + 1e-12)) check.kl_within_chain_bound = false;
    return true;
  });
  if (lb.omega_size() <= 1) {
    check.min_hamming = 0;
    min_weight = 0;
  }
  check.min_sq_distance = lb.gamma * lb.gamma * min_weight;
  return check;
}

}  // namespace isomech
