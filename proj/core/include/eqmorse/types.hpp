#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace eqmorse {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Bad input: unknown names, missing parameters, invalid recipes.
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point or vector outside the manifold or its tangent space.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-convergence, degeneracy, unresolved limits.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on the critical structure does not hold (e.g. instability).
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Value and ambient partial derivatives of a function at a point.
struct Jet {
  double value = 0.0;
  Vec gradient;
  Mat hessian;

  static Jet zero(int n) {
    return {0.0, Vec::Zero(n), Mat::Zero(n, n)};
  }
};

}  // namespace eqmorse
