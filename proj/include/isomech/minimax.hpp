#pragma once

// Packing construction behind the minimax lower bound: k blocks on the
// sub-interval [v~_min, v~_max], a bump gamma on block b when omega_b = 1, and
// a binary code Omega with minimum distance k/8 and at least 2^{k/8} nonzero
// words.
//
// Omega is a random binary linear code. Differences of codewords are
// codewords, so every pairwise distance is the weight of some nonzero
// codeword, and enumerating the 2^dim codewords checks all pairs exactly.

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "isomech/expfam.hpp"

namespace isomech {

using BitWord = std::vector<std::uint64_t>;

struct LowerBoundConstruction {
  Family family = Family::gaussian(1.0);
  ScoreBounds bounds;
  VarianceCertificate certificate;
  int n = 0;
  int k = 0;            // block count
  double c = 0.0;       // packing constant
  double gamma = 0.0;   // bump height c * sqrt(sigma^2 k / n)
  std::vector<int> block_sizes;  // floor(n/k), remainder on the last blocks
  std::vector<BitWord> basis;    // generator rows of Omega, k bits each
  double kl_budget = 0.0;        // max over omega of KL(P_omega || P_0)
  int attempts = 0;

  double sigma_sq() const { return certificate.sigma_sq; }
  /// |Omega|, counting the zero word omega^(0).
  std::uint64_t omega_size() const { return std::uint64_t{1} << basis.size(); }
  /// Codeword with the given index; index 0 is the zero word.
  BitWord codeword(std::uint64_t index) const;
  bool bit(const BitWord& w, int block) const;
  /// mu^omega for a codeword.
  Eigen::VectorXd mu(const BitWord& omega) const;
  Eigen::VectorXd theta(const BitWord& omega) const;
};

inline constexpr int kLowerBoundMaxAttempts = 100;
inline constexpr int kLowerBoundMaxDimension = 28;

/// k = min(floor((n V~^2 / (c^2 sigma^2))^{1/3}), n). A non-positive `c` selects
/// the default C_var / 16. Retries fresh random codes up to the attempt cap
/// and throws ConstructionFailed after that.
LowerBoundConstruction build_lower_bound(const Family& f, const ScoreBounds& bounds, int n,
                                         double c = 0.0, std::uint64_t seed = 0,
                                         int max_attempts = kLowerBoundMaxAttempts);

struct LowerBoundCheck {
  int min_hamming = 0;
  double hamming_required = 0.0;      // k / 8
  double min_sq_distance = 0.0;       // min over pairs of |mu^w - mu^w'|^2
  double sq_distance_required = 0.0;  // (c^2 / 8) sigma^2 k
  double max_kl = 0.0;                // max over omega of KL(P_omega || P_0)
  double kl_limit = 0.0;              // (1/8) ln M, M = |Omega| - 1
  double kl_chain_bound = 0.0;        // gamma^2 n / (2 C_var^2 sigma^2)
  bool kl_within_chain_bound = true;  // per-omega KL <= |mu^w - mu^0|^2 / (2 C_var^2 sigma^2)
  bool in_range = true;               // every mu^w within [v~_min, v~_max]

  bool hamming_ok() const { return min_hamming >= hamming_required; }
  bool distance_ok() const { return min_sq_distance >= sq_distance_required * (1 - 1e-12); }
  bool kl_ok() const { return max_kl < kl_limit && max_kl <= kl_chain_bound && kl_within_chain_bound; }
  bool ok() const { return hamming_ok() && distance_ok() && kl_ok() && in_range; }
};

/// Exhaustive verification of the packing invariants over all of Omega.
LowerBoundCheck verify_lower_bound(const LowerBoundConstruction& lb);

}  // namespace isomech
