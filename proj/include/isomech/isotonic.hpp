#pragma once

// The Isotonic Mechanism: Euclidean projection of raw scores onto the cone
// cut out by an author-reported ranking, its coarse (block) variant, and the
// ranking-constrained maximum-likelihood estimator.
//
// Ranking convention: ranking[0] is the index of the item claimed BEST, i.e.
// the constraint is mu[ranking[0]] >= mu[ranking[1]] >= ... . Indices are
// 0-based in memory; the from_one_based / one_based helpers and all file
// formats use 1-based indices.

#include <Eigen/Core>
#include <optional>
#include <variant>
#include <vector>

#include "isomech/expfam.hpp"
#include "isomech/pava.hpp"

namespace isomech {

class Ranking {
 public:
  Ranking() = default;
  /// Throws ValidationError unless `perm` is a permutation of 0..n-1.
  explicit Ranking(std::vector<int> perm);
  static Ranking from_one_based(const std::vector<int>& perm);
  static Ranking identity(int n);

  int size() const { return static_cast<int>(perm_.size()); }
  /// Index of the item claimed to be (k+1)-th best.
  int operator[](int k) const { return perm_[static_cast<std::size_t>(k)]; }
  const std::vector<int>& perm() const { return perm_; }
  std::vector<int> one_based() const;
  /// position()[i] is the rank slot (0-based) of item i.
  std::vector<int> position() const;

  friend bool operator==(const Ranking&, const Ranking&) = default;
  friend auto operator<=>(const Ranking&, const Ranking&) = default;

 private:
  std::vector<int> perm_;
};

/// Ordered blocks I_1, ..., I_p partitioning the items; every entry of an
/// earlier block is claimed to be at least every entry of a later block.
class CoarseRanking {
 public:
  CoarseRanking() = default;
  /// Throws ValidationError unless the blocks are nonempty and partition 0..n-1.
  explicit CoarseRanking(std::vector<std::vector<int>> blocks);
  static CoarseRanking from_one_based(const std::vector<std::vector<int>>& blocks);
  static CoarseRanking singletons(const Ranking& ranking);
  /// Blocks of the given sizes filled from `truth` in order (the truthful coarse ranking).
  static CoarseRanking from_ranking(const Ranking& truth, const std::vector<int>& sizes);

  int size() const { return n_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  std::vector<int> sizes() const;

  friend bool operator==(const CoarseRanking&, const CoarseRanking&) = default;

 private:
  std::vector<std::vector<int>> blocks_;  // each block sorted ascending
  int n_ = 0;
};

/// All coarse rankings of n items with the given block sizes, in a fixed order.
std::vector<CoarseRanking> all_coarse_rankings(const std::vector<int>& sizes);
/// All n! rankings in lexicographic order of their permutation vectors.
std::vector<Ranking> all_rankings(int n);

using Constraint = std::variant<Ranking, CoarseRanking>;

struct IsotonicFit {
  Eigen::VectorXd input;
  Constraint constraint;
  /// The total order actually projected on (equals the ranking, or the
  /// data-dependent completion of a coarse ranking).
  Ranking order;
  Eigen::VectorXd mu_hat;
  /// Present when a family was supplied; +-inf marks pooled boundary means.
  std::optional<Eigen::VectorXd> theta_hat;
  /// Pools over positions of `order`.
  std::vector<Pool<double>> pools;
};

/// Projection onto {y_1 >= ... >= y_n}; the constraint is the identity ranking.
IsotonicFit project_descending(const Eigen::Ref<const Eigen::VectorXd>& x);
/// Weighted variant; weights must be positive. Unit weights reproduce the above.
IsotonicFit project_descending(const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& weights);

IsotonicFit isotonic_mechanism(const Eigen::Ref<const Eigen::VectorXd>& x, const Ranking& ranking);

/// Within each block, items by descending x; ties by ascending index.
Ranking coarse_to_permutation(const CoarseRanking& blocks, const Eigen::Ref<const Eigen::VectorXd>& x);

IsotonicFit coarse_isotonic_mechanism(const Eigen::Ref<const Eigen::VectorXd>& x,
                                      const CoarseRanking& blocks);

/// Solves the ranking-constrained MLE directly in natural-parameter space by
/// pooling adjacent violators of theta, where a pooled block takes
/// theta = (b')^{-1}(block mean). Returns mu_hat = b'(theta_hat).
IsotonicFit ranking_constrained_mle(const Family& f, const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Ranking& ranking);

}  // namespace isomech
