#pragma once

#include "wrcg/core.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace wrcg::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline Vector random_vector(Index d, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(d);
  for (Index i = 0; i < d; ++i) v[i] = n(rng());
  return v;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Symmetric relative difference with an absolute floor, for values that may
/// be near zero.
inline double mixed_err(const Vector& a, const Vector& b, double floor = 1.0) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), floor});
}

/// Least-squares slope of log(err) against log(t).
inline double loglog_slope(const std::vector<double>& t, const std::vector<double>& err) {
  const double n = double(t.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    const double x = std::log(t[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return out;
}

/// l(theta) = theta_1^3 in one dimension.
struct Cubic1D {
  Index dim() const { return 1; }
  double value(const Vector& x) const { return x[0] * x[0] * x[0]; }
  Vector gradient(const Vector& x) const { return Vector::Constant(1, 3.0 * x[0] * x[0]); }
  Vector hessian_vector(const Vector& x, const Vector& v) const { return Vector::Constant(1, 6.0 * x[0] * v[0]); }
};

/// A smooth non-quadratic objective with a full Hessian:
/// -sum log cosh(A theta - b) - 1/2 |theta|^2 / 10.
struct LogCoshObjective {
  Matrix a;
  Vector b;

  explicit LogCoshObjective(Index d) : a(Matrix::Random(d, d)), b(Vector::Random(d)) {}

  Index dim() const { return a.cols(); }
  double value(const Vector& x) const {
    const Vector r = a * x - b;
    double s = 0.0;
    for (Index i = 0; i < r.size(); ++i) s += std::log(std::cosh(r[i]));
    return -s - 0.05 * x.squaredNorm();
  }
  Vector gradient(const Vector& x) const {
    const Vector r = (a * x - b).array().tanh().matrix();
    return -a.transpose() * r - 0.1 * x;
  }
  Vector hessian_vector(const Vector& x, const Vector& v) const {
    const Vector r = (a * x - b).array().tanh().matrix();
    const Vector w = (1.0 - r.array().square()).matrix().cwiseProduct(a * v);
    return -a.transpose() * w - 0.1 * v;
  }
};

/// Gradient only; Hessian products go through the finite-difference fallback.
template <class F>
struct GradientOnly {
  F inner;
  Index dim() const { return inner.dim(); }
  double value(const Vector& x) const { return inner.value(x); }
  Vector gradient(const Vector& x) const { return inner.gradient(x); }
};

}  // namespace wrcg::testing
