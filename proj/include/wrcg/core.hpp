#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace wrcg {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point theta of the chart. The manifold point is (theta, l(theta)).
using ChartPoint = Vector;

/// Chart coordinates v of a tangent vector V = M v, whose embedded form is
/// (v, <v, grad l>).
using TangentCoords = Vector;

inline constexpr const char* kVersion = "1.0.0";

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value appeared where a finite one is required. `index()` is
/// the offending component, or -1 for scalars.
class NumericalBreakdown : public Error {
 public:
  NumericalBreakdown(const std::string& what, Index index = -1)
      : Error(what + (index >= 0 ? " (component " + std::to_string(index) + ")" : "")),
        index_(index) {}

  Index index() const noexcept { return index_; }

 private:
  Index index_;
};

/// The warp function vanishes, so quantities that divide by psi are undefined.
class PsiDegenerate : public Error {
 public:
  using Error::Error;
};

/// Transport requested for a zero-length step.
class DegenerateStep : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

inline void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw NumericalBreakdown(std::string(what) + " is not finite");
}

inline void require_finite(const Vector& value, const char* what) {
  for (Index i = 0; i < value.size(); ++i) {
    if (!std::isfinite(value[i])) throw NumericalBreakdown(std::string(what) + " is not finite", i);
  }
}

}  // namespace wrcg
