#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace isomech {

/// Pairwise (cascade) summation. The result depends only on the values and
/// their order, so means aggregated from per-trial arrays are reproducible.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct MeanSe {
  double mean = 0.0;
  double std_dev = 0.0;    // sample standard deviation (n - 1)
  double std_error = 0.0;  // std_dev / sqrt(n)
};

inline MeanSe mean_se(std::span<const double> v) {
  MeanSe out;
  const auto n = static_cast<double>(v.size());
  if (v.empty()) return out;
  out.mean = pairwise_sum(v) / n;
  if (v.size() < 2) return out;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.std_dev = std::sqrt(ss / (n - 1.0));
  out.std_error = out.std_dev / std::sqrt(n);
  return out;
}

}  // namespace isomech
