#pragma once

#include "wrcg/core.hpp"
#include "wrcg/objective.hpp"

#include <cmath>
#include <string>

namespace wrcg {

/// Flattening of the warp function psi^2 = |grad l|^2 / (sigma^2 + |grad l|^2).
struct WarpConfig {
  double sigma_sq = 1.0;

  void validate() const {
    if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) throw InvalidArgument("sigma^2 must be positive and finite");
  }
};

/// Point-local quantities. Built once per accepted iterate and never mutated.
struct GeometryCache {
  ChartPoint theta;
  double ell = 0.0;
  Vector grad;        // grad l
  double g2 = 0.0;    // |grad l|^2
  double psi_sq = 0.0;
  Vector grad_psi_sq;
  Vector hess_grad;   // H grad l
  double w_sq = 1.0;  // psi^2 |grad l|^2 + 1
  double w_sigma_sq = 0.0;
  double sigma_sq = 0.0;

  Index dim() const { return theta.size(); }
  bool critical() const { return g2 == 0.0; }
};

namespace detail {

inline void fill_warp(GeometryCache& c, double sigma_sq) {
  c.sigma_sq = sigma_sq;
  c.g2 = c.grad.squaredNorm();
  c.w_sigma_sq = sigma_sq + c.g2;
  c.psi_sq = c.g2 / c.w_sigma_sq;
  c.w_sq = c.psi_sq * c.g2 + 1.0;
  c.grad_psi_sq = (2.0 * sigma_sq / (c.w_sigma_sq * c.w_sigma_sq)) * c.hess_grad;
  require_finite(c.psi_sq, "psi^2");
  require_finite(c.grad_psi_sq, "grad psi^2");
}

inline void check_dims(const GeometryCache& c, const Vector& v, const char* what) {
  if (v.size() != c.dim()) {
    throw InvalidArgument(std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                          std::to_string(c.dim()));
  }
}

}  // namespace detail

/// Builds the cache from a value and gradient that were already evaluated at
/// theta. Costs one Hessian-vector product.
template <Objective F>
GeometryCache build_cache(const F& obj, const WarpConfig& warp, const ChartPoint& theta, double ell, Vector grad,
                          const FdConfig& fd = {}) {
  warp.validate();
  if (theta.size() != obj.dim()) throw InvalidArgument("point dimension does not match objective");
  require_finite(theta, "theta");
  require_finite(ell, "objective value");
  require_finite(grad, "gradient");
  if (grad.size() != theta.size()) throw InvalidArgument("gradient has wrong length");

  GeometryCache c;
  c.theta = theta;
  c.ell = ell;
  c.grad = std::move(grad);
  if (c.grad.isZero(0.0)) {
    c.hess_grad = Vector::Zero(c.dim());
  } else {
    c.hess_grad = hvp_or_fallback(obj, theta, c.grad, fd);
  }
  detail::fill_warp(c, warp.sigma_sq);
  return c;
}

/// One value, one gradient and one Hessian-vector product.
template <Objective F>
GeometryCache build_cache(const F& obj, const WarpConfig& warp, const ChartPoint& theta, const FdConfig& fd = {}) {
  require_finite(theta, "theta");
  if (theta.size() != obj.dim()) throw InvalidArgument("point dimension does not match objective");
  return build_cache(obj, warp, theta, obj.value(theta), obj.gradient(theta), fd);
}

/// <u, v>_G = <u, v> + psi^2 <grad l, u><grad l, v>.
inline double metric_inner(const GeometryCache& c, const TangentCoords& u, const TangentCoords& v) {
  detail::check_dims(c, u, "u");
  detail::check_dims(c, v, "v");
  return u.dot(v) + c.psi_sq * c.grad.dot(u) * c.grad.dot(v);
}

inline double metric_norm(const GeometryCache& c, const TangentCoords& v) {
  return std::sqrt(metric_inner(c, v, v));
}

/// G v, for tests and dense comparisons.
inline Vector metric_apply(const GeometryCache& c, const Vector& v) {
  detail::check_dims(c, v, "v");
  return v + (c.psi_sq * c.grad.dot(v)) * c.grad;
}

/// G^{-1} g = g - (psi^2 / W^2) <grad l, g> grad l.
inline Vector inverse_metric_apply(const GeometryCache& c, const Vector& g) {
  detail::check_dims(c, g, "g");
  return g - (c.psi_sq / c.w_sq * c.grad.dot(g)) * c.grad;
}

/// Natural gradient G^{-1} grad l = grad l / W^2.
inline TangentCoords riemannian_gradient(const GeometryCache& c) { return c.grad / c.w_sq; }

/// |grad f|_G = |grad l| / W.
inline double riemannian_gradient_norm(const GeometryCache& c) { return std::sqrt(c.g2 / c.w_sq); }

/// Embedded form (v, <v, grad l>) of a tangent vector.
inline Vector embed_tangent(const GeometryCache& c, const TangentCoords& v) {
  detail::check_dims(c, v, "v");
  Vector z(c.dim() + 1);
  z.head(c.dim()) = v;
  z[c.dim()] = c.grad.dot(v);
  return z;
}

/// Ambient inner product with metric diag(I, psi^2) at the cached point.
inline double ambient_inner(const GeometryCache& c, const Vector& a, const Vector& b) {
  const Index d = c.dim();
  return a.head(d).dot(b.head(d)) + c.psi_sq * a[d] * b[d];
}

/// Unit normal (-psi grad l / W, 1 / (psi W)) in the ambient warped metric.
inline Vector normal_vector(const GeometryCache& c) {
  if (!(c.psi_sq > 0.0)) throw PsiDegenerate("normal vector is undefined where psi = 0");
  const double psi = std::sqrt(c.psi_sq);
  const double w = std::sqrt(c.w_sq);
  Vector n(c.dim() + 1);
  n.head(c.dim()) = (-psi / w) * c.grad;
  n[c.dim()] = 1.0 / (psi * w);
  return n;
}

/// Warped least-squares projection of an ambient vector z = (z_1:D, z_D+1)
/// onto the tangent space: G^{-1}(z_1:D + psi^2 z_D+1 grad l).
inline TangentCoords project_to_tangent(const GeometryCache& c, const Vector& z) {
  if (z.size() != c.dim() + 1) throw InvalidArgument("ambient vector must have length D + 1");
  return inverse_metric_apply(c, z.head(c.dim()) + (c.psi_sq * z[c.dim()]) * c.grad);
}

/// Scalar products of v with the cached point quantities. Computing them once
/// keeps every later formula O(D).
struct DirectionalTerms {
  double v_grad_psi_sq = 0.0;  // <v, grad psi^2>
  double v_grad = 0.0;         // <v, grad l>
  double v_hess_v = 0.0;       // v^T H v
  double grad_psi_sq_grad = 0.0;  // <grad psi^2, grad l>
};

inline DirectionalTerms directional_terms(const GeometryCache& c, const TangentCoords& v, const Vector& hess_v) {
  detail::check_dims(c, v, "v");
  detail::check_dims(c, hess_v, "H v");
  return {v.dot(c.grad_psi_sq), v.dot(c.grad), v.dot(hess_v), c.grad_psi_sq.dot(c.grad)};
}

/// psi W II(v). This is the form the Taylor coefficients use; it stays finite
/// and exact at psi = 0.
inline double scaled_second_fundamental_form(const GeometryCache& c, const DirectionalTerms& d) {
  return d.v_grad_psi_sq * d.v_grad + c.psi_sq * d.v_hess_v +
         0.5 * c.psi_sq * d.grad_psi_sq_grad * d.v_grad * d.v_grad;
}

template <Objective F>
double scaled_second_fundamental_form(const F& obj, const GeometryCache& c, const TangentCoords& v,
                                      const FdConfig& fd = {}) {
  return scaled_second_fundamental_form(c, directional_terms(c, v, hvp_or_fallback(obj, c.theta, v, fd)));
}

/// II(v) itself. Divides by psi, so it is undefined at critical points.
template <Objective F>
double second_fundamental_form(const F& obj, const GeometryCache& c, const TangentCoords& v,
                               const FdConfig& fd = {}) {
  if (!(c.psi_sq > 0.0)) throw PsiDegenerate("second fundamental form needs psi > 0");
  return scaled_second_fundamental_form(obj, c, v, fd) / std::sqrt(c.psi_sq * c.w_sq);
}

struct GeodesicAcceleration {
  double mho1 = 0.0;
  double mho2 = 0.0;
  Vector accel;  // -mho1 grad l + mho2 grad psi^2
};

inline GeodesicAcceleration geodesic_acceleration(const GeometryCache& c, const DirectionalTerms& d) {
  GeodesicAcceleration a;
  a.mho1 = scaled_second_fundamental_form(c, d) / c.w_sq;
  a.mho2 = 0.5 * d.v_grad * d.v_grad;
  a.accel = -a.mho1 * c.grad + a.mho2 * c.grad_psi_sq;
  require_finite(a.accel, "geodesic acceleration");
  return a;
}

/// Uses one Hessian-vector product.
template <Objective F>
GeodesicAcceleration geodesic_acceleration(const F& obj, const GeometryCache& c, const TangentCoords& v,
                                           const FdConfig& fd = {}) {
  return geodesic_acceleration(c, directional_terms(c, v, hvp_or_fallback(obj, c.theta, v, fd)));
}

/// d/dt grad psi^2 along theta + t v at t = 0, by a central difference of
/// grad psi^2 itself. Costs two gradients and two Hessian-vector products.
template <Objective F>
Vector warp_gradient_rate(const F& obj, const GeometryCache& c, const TangentCoords& v, const FdConfig& fd = {}) {
  detail::check_dims(c, v, "v");
  const double h = fd.step_along(c.theta, v);
  auto grad_psi_sq_at = [&](const Vector& x) -> Vector {
    const Vector g = obj.gradient(x);
    require_finite(g, "gradient");
    if (g.isZero(0.0)) return Vector::Zero(g.size());
    const double ws = c.sigma_sq + g.squaredNorm();
    return (2.0 * c.sigma_sq / (ws * ws)) * hvp_or_fallback(obj, x, g, fd);
  };
  Vector out = (grad_psi_sq_at(c.theta + h * v) - grad_psi_sq_at(c.theta - h * v)) / (2.0 * h);
  require_finite(out, "rate of grad psi^2");
  return out;
}

/// The same rate assembled from its closed form
/// (2 sigma^2 / W_sigma^4)(D3 l[v, grad l] + H H v) - (8 sigma^2 / W_sigma^6)<grad l, H v> H grad l.
/// Costs three Hessian-vector products.
template <Objective F>
Vector warp_gradient_rate_expanded(const F& obj, const GeometryCache& c, const TangentCoords& v,
                                   const FdConfig& fd = {}) {
  detail::check_dims(c, v, "v");
  const Vector hv = hvp_or_fallback(obj, c.theta, v, fd);
  const Vector hhv = hvp_or_fallback(obj, c.theta, hv, fd);
  const Vector t = third_dir_contraction(obj, c.theta, v, c.grad, fd);
  const double ws = c.w_sigma_sq;
  return (2.0 * c.sigma_sq / (ws * ws)) * (t + hhv) -
         (8.0 * c.sigma_sq / (ws * ws * ws)) * c.grad.dot(hv) * c.hess_grad;
}

enum class JetKind {
  /// Taylor polynomial of the geodesic through (theta, v).
  Geodesic,
  /// Keeps only the -mho1 grad l part of the acceleration and its derivative.
  NormalOnly,
};

/// Taylor data of the retraction curve theta + t v + t^2/2 q + t^3/6 k.
struct GeodesicJet {
  ChartPoint theta;
  TangentCoords v;
  Vector q;
  Vector k;
};

/// q and k of the retraction through (theta, v).
///
/// Uses one Hessian-vector product for H v, four for the rates of grad psi^2
/// and of v^T H v, and two extra gradients. Nothing is evaluated when
/// grad l = 0 or v = 0 since both coefficients vanish there.
template <Objective F>
GeodesicJet taylor_coefficients(const F& obj, const GeometryCache& c, const TangentCoords& v,
                                const FdConfig& fd = {}, JetKind kind = JetKind::Geodesic) {
  detail::check_dims(c, v, "v");
  require_finite(v, "direction");
  GeodesicJet jet{c.theta, v, Vector::Zero(c.dim()), Vector::Zero(c.dim())};
  if (c.critical() || v.isZero(0.0)) return jet;

  const Vector hv = hvp_or_fallback(obj, c.theta, v, fd);
  const DirectionalTerms d = directional_terms(c, v, hv);
  const GeodesicAcceleration acc = geodesic_acceleration(c, d);
  const bool full = kind == JetKind::Geodesic;
  const Vector a = full ? acc.accel : Vector(-acc.mho1 * c.grad);

  const Vector p_rate = warp_gradient_rate(obj, c, v, fd);
  const double h = fd.step_along(c.theta, v);
  const double c3 =
      v.dot(hvp_or_fallback(obj, c.theta + h * v, v, fd) - hvp_or_fallback(obj, c.theta - h * v, v, fd)) / (2.0 * h);

  const double P = c.psi_sq;
  const double a1 = d.v_grad_psi_sq;
  const double a2 = d.v_grad;
  const double a3 = d.v_hess_v;
  const double a4 = d.grad_psi_sq_grad;

  const double da1 = a.dot(c.grad_psi_sq) + v.dot(p_rate);
  const double da2 = a.dot(c.grad) + a3;
  const double da3 = 2.0 * a.dot(hv) + c3;
  const double da4 = p_rate.dot(c.grad) + c.grad_psi_sq.dot(hv);
  const double dw_sq = a1 * c.g2 + 2.0 * P * c.hess_grad.dot(v);

  const double n1 = a1 * a2 + P * a3 + 0.5 * P * a4 * a2 * a2;
  const double dn1 = da1 * a2 + a1 * da2 + a1 * a3 + P * da3 +
                     0.5 * (a1 * a4 * a2 * a2 + P * da4 * a2 * a2 + 2.0 * P * a4 * a2 * da2);
  const double dmho1 = dn1 / c.w_sq - n1 * dw_sq / (c.w_sq * c.w_sq);

  jet.q = a;
  jet.k = -dmho1 * c.grad - acc.mho1 * hv;
  if (full) {
    const double dmho2 = a2 * da2;
    jet.k += dmho2 * c.grad_psi_sq + acc.mho2 * p_rate;
  }
  require_finite(jet.q, "quadratic coefficient");
  require_finite(jet.k, "cubic coefficient");
  return jet;
}

}  // namespace wrcg
