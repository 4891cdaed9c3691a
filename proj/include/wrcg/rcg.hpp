#pragma once

#include "wrcg/core.hpp"
#include "wrcg/line_search.hpp"
#include "wrcg/objective.hpp"
#include "wrcg/retraction.hpp"
#include "wrcg/warp_geometry.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace wrcg {

struct RcgConfig {
  long max_iters = 8000;
  double tol_df = 1e-5;
  double tol_grad = 1e-6;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.1;
  double t_init = 1.0;
  int max_line_search_evals = 60;
  bool restart_on_nonascent = true;
  /// Number of consecutive accepted steps with |delta f| < tol_df needed to stop.
  int df_patience = 1;
  JetKind jet = JetKind::Geodesic;
  FdConfig fd;

  void validate() const {
    if (max_iters < 0) throw InvalidArgument("max_iters must be non-negative");
    if (!(tol_df > 0.0) || !(tol_grad > 0.0)) throw InvalidArgument("tolerances must be positive");
    if (!(t_init > 0.0) || !std::isfinite(t_init)) throw InvalidArgument("t_init must be positive");
    if (df_patience < 1) throw InvalidArgument("df_patience must be at least 1");
    wolfe().validate();
    fd.validate();
  }

  WolfeConfig wolfe() const {
    WolfeConfig w;
    w.c1 = wolfe_c1;
    w.c2 = wolfe_c2;
    w.max_evals = max_line_search_evals;
    return w;
  }
};

enum class StopReason { None, MaxIters, SmallDeltaF, SmallGrad, LineSearchFail, NumericalBreakdown };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::None: return "None";
    case StopReason::MaxIters: return "MaxIters";
    case StopReason::SmallDeltaF: return "SmallDeltaF";
    case StopReason::SmallGrad: return "SmallGrad";
    case StopReason::LineSearchFail: return "LineSearchFail";
    case StopReason::NumericalBreakdown: return "NumericalBreakdown";
  }
  return "?";
}

struct IterationTrace {
  long k = 0;
  double f = 0.0;
  double grad_norm_riem = 0.0;
  double grad_norm_eucl = 0.0;
  double t = 0.0;
  double beta = 0.0;
  double s = 1.0;
  int ls_evals = 0;
  long long wall_ns = 0;
  bool restart = false;
  EvalCounts evals;
  int cache_builds = 0;
};

struct RcgState {
  long k = 0;
  GeometryCache cache;
  TangentCoords direction;
  TangentCoords grad_coords;
  double last_t = 0.0;
  double last_slope0 = 0.0;
  double beta = 0.0;
  double s = 1.0;
  std::deque<double> f_history;
  int small_df_streak = 0;
  StopReason stop_reason = StopReason::None;
  std::string message;

  bool stopped() const { return stop_reason != StopReason::None; }
};

/// Passed to the step observer after each accepted line search.
struct StepRecord {
  const GeodesicJet& jet;
  double g0;
  double slope0;
  const CurveSample& accepted;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Dai-Yuan coefficient
/// |grad f(z)|^2 / (s <grad f(z), T(V)>_z - <grad f(x), V>_x), with every inner
/// product reduced to <grad l, .>. Empty when the denominator vanishes.
inline std::optional<double> dy_beta(const GeometryCache& next, const TransportResult& transported,
                                     const GeometryCache& prev, const TangentCoords& dir_prev) {
  const double num = next.g2 / next.w_sq;
  const double den = transported.scale_s * next.grad.dot(transported.coords) - prev.grad.dot(dir_prev);
  if (!std::isfinite(den) || std::abs(den) < 1e-300 || !std::isfinite(num)) return std::nullopt;
  return num / den;
}

namespace detail {

// Flat geometry turns the driver into plain Euclidean CG: psi = 0, the
// retraction is a straight line and transport is the identity.
struct Geometry {
  WarpConfig warp;
  bool flat = false;
};

template <Objective F>
GeometryCache make_cache(const F& obj, const Geometry& geo, const ChartPoint& theta, double ell, Vector grad,
                         const FdConfig& fd) {
  if (!geo.flat) return build_cache(obj, geo.warp, theta, ell, std::move(grad), fd);
  require_finite(ell, "objective value");
  require_finite(grad, "gradient");
  GeometryCache c;
  c.theta = theta;
  c.ell = ell;
  c.grad = std::move(grad);
  c.g2 = c.grad.squaredNorm();
  c.sigma_sq = std::numeric_limits<double>::infinity();
  c.w_sigma_sq = std::numeric_limits<double>::infinity();
  c.grad_psi_sq = Vector::Zero(theta.size());
  c.hess_grad = Vector::Zero(theta.size());
  return c;
}

template <Objective F>
GeodesicJet make_jet(const F& obj, const Geometry& geo, const GeometryCache& c, const TangentCoords& v,
                     const RcgConfig& cfg) {
  if (geo.flat) return {c.theta, v, Vector::Zero(v.size()), Vector::Zero(v.size())};
  return taylor_coefficients(obj, c, v, cfg.fd, cfg.jet);
}

template <Objective F>
RcgState init_state(const F& obj, const Geometry& geo, const ChartPoint& theta0, const RcgConfig& cfg) {
  cfg.validate();
  if (!geo.flat) geo.warp.validate();
  if (theta0.size() != obj.dim()) throw InvalidArgument("initial point dimension does not match objective");
  require_finite(theta0, "initial point");
  RcgState st;
  st.cache = make_cache(obj, geo, theta0, obj.value(theta0), obj.gradient(theta0), cfg.fd);
  st.grad_coords = riemannian_gradient(st.cache);
  st.direction = st.grad_coords;
  st.f_history.push_back(st.cache.ell);
  return st;
}

template <Objective F>
IterationTrace step(const CountingObjective<F>& obj, const Geometry& geo, RcgState& st, const RcgConfig& cfg,
                    const StepObserver& observer) {
  const auto t_start = std::chrono::steady_clock::now();
  const EvalCounts before = obj.counts();
  IterationTrace tr;
  tr.k = st.k + 1;

  const GeometryCache& c = st.cache;
  bool restart = false;
  double slope0 = c.grad.dot(st.direction);
  if (!(slope0 > 0.0)) {
    if (!cfg.restart_on_nonascent) {
      st.stop_reason = StopReason::LineSearchFail;
      st.message = "direction is not an ascent direction";
      return tr;
    }
    st.direction = st.grad_coords;
    slope0 = c.grad.dot(st.direction);
    restart = true;
  }

  double t_first = cfg.t_init;
  if (st.k > 0 && st.last_t > 0.0 && st.last_slope0 > 0.0) {
    const double guess = st.last_t * st.last_slope0 / slope0;
    if (std::isfinite(guess) && guess > 0.0) t_first = guess;
  }

  GeodesicJet jet = make_jet(obj, geo, c, st.direction, cfg);
  LineSearchResult ls = line_search(obj, jet, c.ell, slope0, t_first, cfg.wolfe());
  int ls_evals = ls.evals;
  if (!ls.ok() && !restart) {
    st.direction = st.grad_coords;
    slope0 = c.grad.dot(st.direction);
    restart = true;
    jet = make_jet(obj, geo, c, st.direction, cfg);
    ls = line_search(obj, jet, c.ell, slope0, cfg.t_init, cfg.wolfe());
    ls_evals += ls.evals;
  }
  if (!ls.ok()) {
    st.stop_reason = StopReason::LineSearchFail;
    st.message = std::string("line search ended with ") + to_string(ls.status);
    return tr;
  }
  if (observer) observer(StepRecord{jet, c.ell, slope0, ls.sample});

  const double t = ls.sample.t;
  GeometryCache next = make_cache(obj, geo, ls.sample.theta, ls.sample.value, ls.sample.grad, cfg.fd);
  tr.cache_builds = 1;
  const TangentCoords grad_next = riemannian_gradient(next);

  double beta = 0.0;
  double s = 1.0;
  TangentCoords dir_next = grad_next;
  try {
    const TransportResult transported = vector_transport(c, next, st.direction, t);
    s = transported.scale_s;
    const auto raw = dy_beta(next, transported, c, st.direction);
    if (raw && std::isfinite(*raw)) {
      beta = std::min(*raw, 0.0);
      dir_next = grad_next - (beta * s) * transported.coords;
    } else {
      restart = true;
    }
  } catch (const DegenerateStep&) {
    restart = true;
  }

  const double f_prev = c.ell;
  st.cache = std::move(next);
  st.grad_coords = grad_next;
  st.direction = dir_next;
  st.last_t = t;
  st.last_slope0 = slope0;
  st.beta = beta;
  st.s = s;
  st.k += 1;
  st.f_history.push_back(st.cache.ell);
  while (st.f_history.size() > 16) st.f_history.pop_front();

  tr.f = st.cache.ell;
  tr.grad_norm_riem = riemannian_gradient_norm(st.cache);
  tr.grad_norm_eucl = std::sqrt(st.cache.g2);
  tr.t = t;
  tr.beta = beta;
  tr.s = s;
  tr.ls_evals = ls_evals;
  tr.restart = restart;
  tr.evals = obj.counts() - before;
  tr.wall_ns =
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t_start).count();

  if (tr.grad_norm_riem < cfg.tol_grad) {
    st.stop_reason = StopReason::SmallGrad;
  } else {
    st.small_df_streak = std::abs(st.cache.ell - f_prev) < cfg.tol_df ? st.small_df_streak + 1 : 0;
    if (st.small_df_streak >= cfg.df_patience) st.stop_reason = StopReason::SmallDeltaF;
  }
  return tr;
}

}  // namespace detail

struct RcgResult {
  ChartPoint theta;
  RcgState state;
  std::vector<IterationTrace> trace;
  EvalCounts evals;
};

namespace detail {

template <Objective F>
RcgResult run_driver(const F& objective, const Geometry& geo, const ChartPoint& theta0, const RcgConfig& cfg,
                     const StepObserver& observer) {
  CountingObjective<F> obj(objective);
  RcgResult res;
  RcgState& st = res.state;
  try {
    st = init_state(obj, geo, theta0, cfg);
    if (riemannian_gradient_norm(st.cache) < cfg.tol_grad) st.stop_reason = StopReason::SmallGrad;
    while (!st.stopped()) {
      if (st.k >= cfg.max_iters) {
        st.stop_reason = StopReason::MaxIters;
        break;
      }
      IterationTrace tr = step(obj, geo, st, cfg, observer);
      if (tr.cache_builds == 1) res.trace.push_back(tr);
    }
  } catch (const NumericalBreakdown& e) {
    st.stop_reason = StopReason::NumericalBreakdown;
    st.message = e.what();
  }
  res.theta = st.cache.theta.size() ? st.cache.theta : theta0;
  res.evals = obj.counts();
  return res;
}

}  // namespace detail

/// Riemannian conjugate gradient ascent on the warped graph manifold.
/// Failures inside the iteration are reported through `state.stop_reason`;
/// only invalid arguments throw.
template <Objective F>
RcgResult run(const F& obj, const WarpConfig& warp, const ChartPoint& theta0, const RcgConfig& cfg = {},
              const StepObserver& observer = {}) {
  return detail::run_driver(obj, detail::Geometry{warp, false}, theta0, cfg, observer);
}

}  // namespace wrcg
