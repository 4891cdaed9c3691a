#pragma once

#include "wrcg/core.hpp"
#include "wrcg/objective.hpp"
#include "wrcg/warp_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wrcg {

/// theta + t v + t^2/2 q + t^3/6 k.
inline ChartPoint retract(const GeodesicJet& jet, double t) {
  if (!std::isfinite(t)) throw InvalidArgument("retraction step must be finite");
  return jet.theta + t * jet.v + (0.5 * t * t) * jet.q + (t * t * t / 6.0) * jet.k;
}

/// Chart velocity of the retraction curve, v + t q + t^2/2 k.
inline TangentCoords curve_velocity(const GeodesicJet& jet, double t) {
  return jet.v + t * jet.q + (0.5 * t * t) * jet.k;
}

/// Everything learned about the objective at one trial step.
struct CurveSample {
  double t = 0.0;
  ChartPoint theta;
  double value = 0.0;  // g(t) = l(retract(t))
  double slope = 0.0;  // g'(t)
  Vector grad;
};

template <Objective F>
CurveSample sample_curve(const F& obj, const GeodesicJet& jet, double t) {
  CurveSample s;
  s.t = t;
  s.theta = retract(jet, t);
  s.value = obj.value(s.theta);
  s.grad = obj.gradient(s.theta);
  require_finite(s.value, "objective value");
  require_finite(s.grad, "gradient");
  s.slope = s.grad.dot(curve_velocity(jet, t));
  return s;
}

struct ValueAndSlope {
  double value;
  double slope;
};

/// g(t) = l(retract(t)) and its derivative through the polynomial curve.
template <Objective F>
ValueAndSlope directional_value_and_slope(const F& obj, const GeodesicJet& jet, double t) {
  const CurveSample s = sample_curve(obj, jet, t);
  return {s.value, s.slope};
}

struct TransportResult {
  TangentCoords coords;
  double scale_s = 1.0;
};

/// Moves V from the source point to the destination reached by the
/// retraction at step t, by projecting the backward displacement onto the
/// destination tangent space and scaling by -1/t.
inline TransportResult vector_transport(const GeometryCache& src, const GeometryCache& dst, const TangentCoords& v,
                                        double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DegenerateStep("transport needs a positive step");
  detail::check_dims(src, v, "v");
  if (src.dim() != dst.dim()) throw InvalidArgument("transport endpoints differ in dimension");

  const Vector delta = src.theta - dst.theta;
  const double delta_ell = src.ell - dst.ell;
  if (delta.norm() <= std::numeric_limits<double>::epsilon() * std::max(1.0, dst.theta.norm())) {
    throw DegenerateStep("transport endpoints coincide");
  }

  TransportResult out;
  out.coords = (-1.0 / t) * (delta - (delta.dot(dst.grad) - delta_ell) * (dst.psi_sq / dst.w_sq) * dst.grad);
  require_finite(out.coords, "transported direction");

  const double tn = metric_norm(dst, out.coords);
  const double vn = metric_norm(src, v);
  out.scale_s = tn > 0.0 ? std::min(1.0, vn / tn) : 1.0;
  return out;
}

}  // namespace wrcg
