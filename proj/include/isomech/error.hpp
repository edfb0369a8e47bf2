#pragma once

#include <stdexcept>
#include <string>

namespace isomech {

/// A parameter lies outside the domain an operation accepts.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data is malformed (lengths, permutations, partitions, files).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The variance lower bound b''(theta) >= C_var * sigma^2 failed at `mu`.
class AssumptionViolated : public std::runtime_error {
 public:
  AssumptionViolated(const std::string& what, double mu)
      : std::runtime_error(what), mu_(mu) {}
  double mu() const { return mu_; }

 private:
  double mu_;
};

/// A randomized construction exhausted its retry budget.
class ConstructionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace isomech
