#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nes {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when a vector or matrix argument has the wrong length.
class DimensionError : public std::invalid_argument {
 public:
  DimensionError(std::string_view what, Index expected, Index actual);

  Index expected() const noexcept { return expected_; }
  Index actual() const noexcept { return actual_; }

 private:
  Index expected_;
  Index actual_;
};

/// A modelling assumption (connectivity, strong monotonicity, positivity of
/// gains) does not hold for the supplied data.
class AssumptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: ill-conditioned solves, non-finite states.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_length(std::string_view name, Index actual, Index expected);

}  // namespace nes
