// Shared aliases and error taxonomy for the online-linear-optimization toolkit.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace olo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

// Invalid user-supplied configuration or arguments (bad body description,
// violated parameter invariant, ...).  Maps to CLI exit code 2.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file (JSON syntax, schema violation).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numeric routine left its supported regime (eigensolver failure,
// LP degeneracy beyond recovery, ...).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Predicted resource usage exceeds the configured budget; carries the
// offending estimate in the message.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace olo
