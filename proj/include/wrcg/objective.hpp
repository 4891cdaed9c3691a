#pragma once

#include "wrcg/core.hpp"

#include <algorithm>
#include <atomic>
#include <concepts>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>

namespace wrcg {

// Objectives are maximised. Implementations must be pure: the library calls
// them concurrently and never mutates them.
template <class F>
concept Objective = requires(const F& f, const Vector& x) {
  { f.dim() } -> std::convertible_to<Index>;
  { f.value(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::convertible_to<Vector>;
};

template <class F>
concept HessianVectorObjective =
    Objective<F> && requires(const F& f, const Vector& x, const Vector& v) {
      { f.hessian_vector(x, v) } -> std::convertible_to<Vector>;
    };

/// True when `f` supplies an exact Hessian-vector product. Type-erased
/// objectives may decide at run time through `has_hessian_vector()`.
template <Objective F>
bool provides_hessian_vector(const F& f) {
  if constexpr (!HessianVectorObjective<F>) {
    return false;
  } else if constexpr (requires { { f.has_hessian_vector() } -> std::convertible_to<bool>; }) {
    return f.has_hessian_vector();
  } else {
    return true;
  }
}

/// Step for directional central differences.
///
/// The displacement actually used along a direction v at theta is
/// `r * max(1, |theta|) / max(1, |v|)`. The default r = cbrt(eps) balances
/// truncation against rounding for central differences in double precision.
struct FdConfig {
  double r = std::cbrt(std::numeric_limits<double>::epsilon());

  void validate() const {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("finite-difference step must be positive");
  }

  double step_along(const Vector& theta, const Vector& v) const {
    return r * std::max(1.0, theta.norm()) / std::max(1.0, v.norm());
  }

  /// Steps below machine epsilon vanish against theta in double precision and
  /// make every difference quotient zero.
  bool underflows() const { return r < std::numeric_limits<double>::epsilon(); }
};

inline std::optional<std::string> fd_step_warning(const FdConfig& fd) {
  if (!fd.underflows()) return std::nullopt;
  return "finite-difference step r=" + std::to_string(fd.r) +
         " is below machine epsilon; derivative differences will round to zero";
}

/// Hessian-vector product of `f` at theta. Uses the objective's own product
/// when available, otherwise a central difference of the gradient.
template <Objective F>
Vector hvp_or_fallback(const F& f, const Vector& theta, const Vector& v, const FdConfig& fd) {
  Vector out;
  if (provides_hessian_vector(f)) {
    if constexpr (HessianVectorObjective<F>) out = f.hessian_vector(theta, v);
  } else {
    const double h = fd.step_along(theta, v);
    out = (f.gradient(theta + h * v) - f.gradient(theta - h * v)) / (2.0 * h);
  }
  require_finite(out, "Hessian-vector product");
  return out;
}

/// Approximates the third-derivative contraction D3 l(theta)[v, w, .] as
/// (H(theta + h v) w - H(theta - h v) w) / 2h. Costs two Hessian-vector products.
template <Objective F>
Vector third_dir_contraction(const F& f, const Vector& theta, const Vector& v, const Vector& w,
                             const FdConfig& fd) {
  require_finite(v, "contraction direction");
  require_finite(w, "contraction vector");
  const double h = fd.step_along(theta, v);
  Vector out = (hvp_or_fallback(f, theta + h * v, w, fd) - hvp_or_fallback(f, theta - h * v, w, fd)) /
               (2.0 * h);
  require_finite(out, "third-derivative contraction");
  return out;
}

/// Type-erased objective, used where the problem is chosen at run time.
class FunctionObjective {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianVectorFn = std::function<Vector(const Vector&, const Vector&)>;

  FunctionObjective(Index dim, ValueFn value, GradientFn gradient, HessianVectorFn hvp = {})
      : dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)), hvp_(std::move(hvp)) {
    if (dim_ <= 0) throw InvalidArgument("objective dimension must be positive");
    if (!value_ || !gradient_) throw InvalidArgument("objective needs value and gradient");
  }

  template <Objective F>
  static FunctionObjective wrap(F f) {
    auto shared = std::make_shared<const F>(std::move(f));
    HessianVectorFn hvp;
    if (provides_hessian_vector(*shared)) {
      if constexpr (HessianVectorObjective<F>) {
        hvp = [shared](const Vector& x, const Vector& v) { return Vector(shared->hessian_vector(x, v)); };
      }
    }
    return FunctionObjective(
        shared->dim(), [shared](const Vector& x) { return double(shared->value(x)); },
        [shared](const Vector& x) { return Vector(shared->gradient(x)); }, std::move(hvp));
  }

  Index dim() const { return dim_; }
  double value(const Vector& x) const { return value_(x); }
  Vector gradient(const Vector& x) const { return gradient_(x); }
  bool has_hessian_vector() const { return static_cast<bool>(hvp_); }
  Vector hessian_vector(const Vector& x, const Vector& v) const { return hvp_(x, v); }

 private:
  Index dim_;
  ValueFn value_;
  GradientFn gradient_;
  HessianVectorFn hvp_;
};

/// Turns a minimisation problem into the maximisation form the optimiser
/// works with.
template <Objective F>
class Negated {
 public:
  explicit Negated(F inner) : inner_(std::move(inner)) {}

  Index dim() const { return inner_.dim(); }
  double value(const Vector& x) const { return -inner_.value(x); }
  Vector gradient(const Vector& x) const { return -inner_.gradient(x); }
  bool has_hessian_vector() const { return provides_hessian_vector(inner_); }
  Vector hessian_vector(const Vector& x, const Vector& v) const
    requires HessianVectorObjective<F>
  {
    return -inner_.hessian_vector(x, v);
  }

  const F& inner() const { return inner_; }

 private:
  F inner_;
};

struct EvalCounts {
  long long value = 0;
  long long gradient = 0;
  long long hessian_vector = 0;

  friend EvalCounts operator-(const EvalCounts& a, const EvalCounts& b) {
    return {a.value - b.value, a.gradient - b.gradient, a.hessian_vector - b.hessian_vector};
  }
};

/// Forwards to a borrowed objective and counts calls. The counters are
/// atomic so concurrent callers see consistent totals.
template <Objective F>
class CountingObjective {
 public:
  explicit CountingObjective(const F& inner) : inner_(&inner) {}
  CountingObjective(const CountingObjective& other)
      : inner_(other.inner_), counters_(std::make_shared<Counters>()) {}

  Index dim() const { return inner_->dim(); }
  double value(const Vector& x) const {
    ++counters_->value;
    return inner_->value(x);
  }
  Vector gradient(const Vector& x) const {
    ++counters_->gradient;
    return inner_->gradient(x);
  }
  bool has_hessian_vector() const { return provides_hessian_vector(*inner_); }
  Vector hessian_vector(const Vector& x, const Vector& v) const
    requires HessianVectorObjective<F>
  {
    ++counters_->hvp;
    return inner_->hessian_vector(x, v);
  }

  EvalCounts counts() const { return {counters_->value.load(), counters_->gradient.load(), counters_->hvp.load()}; }

 private:
  struct Counters {
    std::atomic<long long> value{0};
    std::atomic<long long> gradient{0};
    std::atomic<long long> hvp{0};
  };

  const F* inner_;
  std::shared_ptr<Counters> counters_ = std::make_shared<Counters>();
};

}  // namespace wrcg
