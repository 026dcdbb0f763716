#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsetrack {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Support sets are kept as 0-based coordinate indices. Realized supports are
// sorted ascending; pursuit supports are in detection order.
using IndexSet = std::vector<int>;

// Dimension/shape violations (matrix sizes, index ranges).
struct InvalidDimension : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Parameter values outside their admissible range.
struct InvalidParameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numeric failure during computation (singular system, non-SPD matrix).
// Deliberately not silently regularized; callers see the failure.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace sparsetrack
