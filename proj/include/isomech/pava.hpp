#pragma once

// Pool-adjacent-violators for the descending cone {y : y_1 >= y_2 >= ... >= y_n}.

#include <Eigen/Core>
#include <vector>

namespace isomech {

/// A maximal run [start, end) of the sorted order sharing one fitted value.
template <typename Scalar>
struct Pool {
  Eigen::Index start = 0;
  Eigen::Index end = 0;
  Scalar value{};
};

/// Weighted least-squares projection of y onto the descending cone. Stack
/// based, O(n). Adjacent blocks are merged only on a strict violation, so a
/// feasible input comes back bit-identical.
template <typename Derived, typename WeightDerived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> pava_descending(
    const Eigen::MatrixBase<Derived>& y, const Eigen::MatrixBase<WeightDerived>& w,
    std::vector<Pool<typename Derived::Scalar>>* pools = nullptr) {
  using Scalar = typename Derived::Scalar;
  struct Block {
    Scalar sum;
    Scalar weight;
    Eigen::Index start;
    Scalar value() const { return sum / weight; }
  };
  const Eigen::Index n = y.size();
  std::vector<Block> stack;
  stack.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    stack.push_back({y[i] * w[i], w[i], i});
    while (stack.size() >= 2 && stack.back().value() > stack[stack.size() - 2].value()) {
      Block top = stack.back();
      stack.pop_back();
      stack.back().sum += top.sum;
      stack.back().weight += top.weight;
    }
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  if (pools) pools->clear();
  for (std::size_t b = 0; b < stack.size(); ++b) {
    const Eigen::Index end = b + 1 < stack.size() ? stack[b + 1].start : n;
    // single-element blocks keep the input value exactly
    const Scalar v = end - stack[b].start == 1 ? y[stack[b].start] : stack[b].value();
    out.segment(stack[b].start, end - stack[b].start).setConstant(v);
    if (pools) pools->push_back({stack[b].start, end, v});
  }
  return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> pava_descending(
    const Eigen::MatrixBase<Derived>& y,
    std::vector<Pool<typename Derived::Scalar>>* pools = nullptr) {
  using Vec = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>;
  return pava_descending(y, Vec::Ones(y.size()), pools);
}

}  // namespace isomech
