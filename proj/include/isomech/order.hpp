#pragma once

// Majorization orders and the upward-swap combinatorics behind truthfulness.

#include <Eigen/Core>
#include <algorithm>
#include <functional>
#include <vector>

#include "isomech/error.hpp"
#include "isomech/isotonic.hpp"

namespace isomech {

enum class MajorizationMode { Standard, NaturalOrder, Weak };

namespace detail {

// Prefix-sum dominance of a over b. Absolute slack 1e-9 * max(|a|_inf, |b|_inf).
template <typename DA, typename DB>
bool prefix_dominates(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                      bool require_equal_total) {
  using Scalar = typename DA::Scalar;
  if (a.size() != b.size()) throw ValidationError("majorization: length mismatch");
  if (a.size() == 0) return true;
  const Scalar scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  const Scalar tol = Scalar(1e-9) * scale;
  Scalar pa(0), pb(0);
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    pa += a[k];
    pb += b[k];
    if (pa < pb - tol) return false;
  }
  using std::abs;
  return !require_equal_total || abs(pa - pb) <= tol;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> sorted_descending(
    const Eigen::MatrixBase<Derived>& v) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> s = v;
  std::sort(s.data(), s.data() + s.size(), std::greater<>());
  return s;
}

}  // namespace detail

/// a majorizes b: prefix sums of the descending rearrangements dominate, with
/// equal totals.
template <typename DA, typename DB>
bool majorizes(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  if (a.size() != b.size()) throw ValidationError("majorizes: length mismatch");
  return detail::prefix_dominates(detail::sorted_descending(a), detail::sorted_descending(b), true);
}

/// Prefix-sum dominance in the given order (no rearrangement), equal totals.
template <typename DA, typename DB>
bool majorizes_natural_order(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  return detail::prefix_dominates(a, b, true);
}

/// As majorizes, without the equal-total requirement.
template <typename DA, typename DB>
bool weakly_majorizes(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  if (a.size() != b.size()) throw ValidationError("weakly_majorizes: length mismatch");
  return detail::prefix_dominates(detail::sorted_descending(a), detail::sorted_descending(b), false);
}

template <typename DA, typename DB>
bool check_majorization(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                        MajorizationMode mode) {
  switch (mode) {
    case MajorizationMode::Standard: return majorizes(a, b);
    case MajorizationMode::NaturalOrder: return majorizes_natural_order(a, b);
    case MajorizationMode::Weak: return weakly_majorizes(a, b);
  }
  return false;
}

/// pi is an upward swap of nu: they differ exactly at positions i < j with
/// pi[i] = nu[j] < pi[j] = nu[i]. Items are compared by index, which is their
/// true rank when the ground truth is the identity ranking.
bool is_upward_swap(const Ranking& pi, const Ranking& nu);

/// As above, comparing items by their rank under `truth` instead of by index.
bool is_upward_swap(const Ranking& pi, const Ranking& nu, const Ranking& truth);

struct SwapChain {
  /// perms.front() is the truthful start, perms.back() the target; each entry
  /// is an upward swap of the next one.
  std::vector<Ranking> perms;
};

/// Chain from `truth` to `target` built by fixing the last unfixed slot with
/// one swap and recursing on the prefix. At most n entries; not minimal.
SwapChain upward_swap_chain(const Ranking& truth, const Ranking& target);

}  // namespace isomech
