#pragma once

#include "wrcg/core.hpp"
#include "wrcg/objective.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace wrcg {

/// log N([t1, t2 + sin(a t1), ..., tD + sin(a t1)] | 0, diag(sigma)).
class SquiggleProblem {
 public:
  explicit SquiggleProblem(Index dim, double a = 1.0) : SquiggleProblem(default_sigma(dim), a) {}

  SquiggleProblem(Vector sigma_diag, double a) : sigma_(std::move(sigma_diag)), a_(a) {
    if (sigma_.size() < 1) throw InvalidArgument("squiggle needs D >= 1");
    if ((sigma_.array() <= 0.0).any()) throw InvalidArgument("squiggle covariance entries must be positive");
    if (!std::isfinite(a_)) throw InvalidArgument("squiggle frequency must be finite");
    log_norm_ = -0.5 * double(sigma_.size()) * std::log(2.0 * std::numbers::pi) -
                0.5 * sigma_.array().log().sum();
  }

  static Vector default_sigma(Index dim) {
    if (dim < 1) throw InvalidArgument("squiggle needs D >= 1");
    Vector s = Vector::Constant(dim, 0.5);
    s[0] = 30.0;
    return s;
  }

  Index dim() const { return sigma_.size(); }
  double a() const { return a_; }
  const Vector& sigma_diag() const { return sigma_; }

  /// Value at the maximiser theta = 0.
  double max_value() const { return log_norm_; }

  double value(const Vector& x) const {
    const Vector y = warp(x);
    return log_norm_ - 0.5 * (y.array().square() / sigma_.array()).sum();
  }

  Vector gradient(const Vector& x) const {
    const Vector w = warp(x).cwiseQuotient(sigma_);
    return -jacobian_transpose(x, w);
  }

  Vector hessian_vector(const Vector& x, const Vector& v) const {
    const Vector w = warp(x).cwiseQuotient(sigma_);
    const Vector u = jacobian(x, v).cwiseQuotient(sigma_);
    Vector out = -jacobian_transpose(x, u);
    out[0] += a_ * a_ * std::sin(a_ * x[0]) * v[0] * w.tail(dim() - 1).sum();
    return out;
  }

 private:
  Vector warp(const Vector& x) const {
    Vector y = x;
    y.tail(dim() - 1).array() += std::sin(a_ * x[0]);
    return y;
  }

  Vector jacobian(const Vector& x, const Vector& v) const {
    Vector out = v;
    out.tail(dim() - 1).array() += a_ * std::cos(a_ * x[0]) * v[0];
    return out;
  }

  Vector jacobian_transpose(const Vector& x, const Vector& u) const {
    Vector out = u;
    out[0] += a_ * std::cos(a_ * x[0]) * u.tail(dim() - 1).sum();
    return out;
  }

  Vector sigma_;
  double a_;
  double log_norm_ = 0.0;
};

/// Negated Rosenbrock sum, maximal (zero) at (1, ..., 1).
class RosenbrockProblem {
 public:
  explicit RosenbrockProblem(Index dim, double a = 1.0, double b = 100.0) : dim_(dim), a_(a), b_(b) {
    if (dim_ < 2) throw InvalidArgument("rosenbrock needs D >= 2");
  }

  Index dim() const { return dim_; }
  double max_value() const { return 0.0; }
  Vector maximizer() const { return Vector::Constant(dim_, a_); }

  double value(const Vector& x) const {
    double r = 0.0;
    for (Index i = 0; i + 1 < dim_; ++i) {
      const double d = x[i + 1] - x[i] * x[i];
      const double e = a_ - x[i];
      r += b_ * d * d + e * e;
    }
    return -r;
  }

  Vector gradient(const Vector& x) const {
    Vector g = Vector::Zero(dim_);
    for (Index i = 0; i + 1 < dim_; ++i) {
      const double d = x[i + 1] - x[i] * x[i];
      g[i] += -4.0 * b_ * d * x[i] - 2.0 * (a_ - x[i]);
      g[i + 1] += 2.0 * b_ * d;
    }
    return -g;
  }

  Vector hessian_vector(const Vector& x, const Vector& v) const {
    Vector out = Vector::Zero(dim_);
    for (Index i = 0; i + 1 < dim_; ++i) {
      const double hxx = 12.0 * b_ * x[i] * x[i] - 4.0 * b_ * x[i + 1] + 2.0;
      const double hxy = -4.0 * b_ * x[i];
      const double hyy = 2.0 * b_;
      out[i] += hxx * v[i] + hxy * v[i + 1];
      out[i + 1] += hxy * v[i] + hyy * v[i + 1];
    }
    return -out;
  }

 private:
  Index dim_;
  double a_;
  double b_;
};

/// -1/2 (theta - c)^T diag(A) (theta - c).
class QuadraticGaussianProblem {
 public:
  explicit QuadraticGaussianProblem(Index dim) : QuadraticGaussianProblem(Vector::Ones(dim), Vector::Zero(dim)) {}

  QuadraticGaussianProblem(Vector a_diag, Vector center) : a_(std::move(a_diag)), c_(std::move(center)) {
    if (a_.size() < 1) throw InvalidArgument("quadratic needs D >= 1");
    if (a_.size() != c_.size()) throw InvalidArgument("quadratic curvature and centre differ in length");
    if ((a_.array() <= 0.0).any()) throw InvalidArgument("quadratic curvatures must be positive");
  }

  Index dim() const { return a_.size(); }
  double max_value() const { return 0.0; }
  const Vector& maximizer() const { return c_; }

  double value(const Vector& x) const { return -0.5 * (a_.array() * (x - c_).array().square()).sum(); }
  Vector gradient(const Vector& x) const { return -a_.cwiseProduct(x - c_); }
  Vector hessian_vector(const Vector&, const Vector& v) const { return -a_.cwiseProduct(v); }

 private:
  Vector a_;
  Vector c_;
};

enum class ProblemKind { Squiggle, Rosenbrock, Quadratic };

inline std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::Squiggle: return "squiggle";
    case ProblemKind::Rosenbrock: return "rosenbrock";
    case ProblemKind::Quadratic: return "quadratic";
  }
  return "?";
}

inline std::optional<ProblemKind> parse_problem(std::string_view s) {
  if (s == "squiggle") return ProblemKind::Squiggle;
  if (s == "rosenbrock") return ProblemKind::Rosenbrock;
  if (s == "quadratic") return ProblemKind::Quadratic;
  return std::nullopt;
}

/// Alternating-sign start (-m, m, -m, ...): m = 10 for squiggle, 5 for
/// Rosenbrock. The quadratic starts from (1, ..., 1).
inline ChartPoint initial_point(ProblemKind kind, Index dim) {
  if (kind == ProblemKind::Quadratic) {
    if (dim < 1) throw InvalidArgument("dimension must be positive");
    return Vector::Ones(dim);
  }
  if (dim < 2) throw InvalidArgument("initial point needs D >= 2");
  const double m = kind == ProblemKind::Squiggle ? 10.0 : 5.0;
  Vector x(dim);
  for (Index i = 0; i < dim; ++i) x[i] = (i % 2 == 0) ? -m : m;
  return x;
}

/// sigma^2 used when none is given: sigma = 1 for squiggle and the
/// quadratic, sigma = 300 for Rosenbrock.
inline double default_sigma_sq(ProblemKind kind) { return kind == ProblemKind::Rosenbrock ? 9e4 : 1.0; }

struct ProblemInstance {
  ProblemKind kind;
  FunctionObjective objective;
  ChartPoint theta0;
  Vector maximizer;
  double max_value;
};

inline ProblemInstance make_problem(ProblemKind kind, Index dim) {
  switch (kind) {
    case ProblemKind::Squiggle: {
      SquiggleProblem p(dim);
      return {kind, FunctionObjective::wrap(p), initial_point(kind, dim), Vector::Zero(dim), p.max_value()};
    }
    case ProblemKind::Rosenbrock: {
      RosenbrockProblem p(dim);
      return {kind, FunctionObjective::wrap(p), initial_point(kind, dim), p.maximizer(), p.max_value()};
    }
    case ProblemKind::Quadratic: {
      QuadraticGaussianProblem p(dim);
      return {kind, FunctionObjective::wrap(p), initial_point(kind, dim), p.maximizer(), p.max_value()};
    }
  }
  throw InvalidArgument("unknown problem");
}

/// Second stationary value of the Rosenbrock family, used only to label
/// runs that end away from the global maximum.
inline constexpr double kRosenbrockLocalValue = -3.99;

}  // namespace wrcg
