#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace formtrack {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Malformed configuration or violated parameter invariant (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite state, Riccati breakdown, failed line search (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Agent count and ambient dimension; N = n * M is the stacked size.
struct Dims {
  int n = 0;
  int M = 0;

  int N() const { return n * M; }
  int state_size() const { return 2 * n * M; }
};

}  // namespace formtrack
