#pragma once

#include "wrcg/core.hpp"
#include "wrcg/retraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace wrcg {

struct WolfeConfig {
  double c1 = 1e-4;
  double c2 = 0.1;
  int max_evals = 60;
  double max_step = 1e10;

  void validate() const {
    if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) throw InvalidArgument("Wolfe constants need 0 < c1 < c2 < 1");
    if (max_evals < 1) throw InvalidArgument("line search needs at least one evaluation");
    if (!(max_step > 0.0)) throw InvalidArgument("maximum step must be positive");
  }
};

enum class LineSearchStatus { Converged, NonAscent, MaxEvals, BracketCollapsed };

inline const char* to_string(LineSearchStatus s) {
  switch (s) {
    case LineSearchStatus::Converged: return "Converged";
    case LineSearchStatus::NonAscent: return "NonAscent";
    case LineSearchStatus::MaxEvals: return "MaxEvals";
    case LineSearchStatus::BracketCollapsed: return "BracketCollapsed";
  }
  return "?";
}

struct LineSearchResult {
  LineSearchStatus status = LineSearchStatus::MaxEvals;
  CurveSample sample;
  int evals = 0;

  bool ok() const { return status == LineSearchStatus::Converged; }
};

/// Strong Wolfe test for maximisation of g along the curve.
inline bool strong_wolfe_holds(double g0, double slope0, double t, double gt, double slope_t, double c1, double c2) {
  return gt >= g0 + c1 * t * slope0 && std::abs(slope_t) <= c2 * std::abs(slope0);
}

namespace detail {

// Minimiser of the cubic through (a, fa, da) and (b, fb, db).
inline std::optional<double> cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
  if (a == b) return std::nullopt;
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::nullopt;
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = db - da + 2.0 * d2;
  if (denom == 0.0) return std::nullopt;
  const double t = b - (b - a) * (db + d2 - d1) / denom;
  if (!std::isfinite(t)) return std::nullopt;
  return t;
}

}  // namespace detail

/// Bracket-and-zoom strong Wolfe search, maximising g(t) = sample(t).value.
///
/// `sample` is any callable returning a CurveSample for a step t. The search
/// runs on phi = -g so the usual minimisation bracket logic applies.
template <class Sampler>
LineSearchResult strong_wolfe_search(Sampler&& sample, double g0, double slope0, double t_first,
                                     const WolfeConfig& cfg) {
  LineSearchResult res;
  if (!(slope0 > 0.0)) {
    res.status = LineSearchStatus::NonAscent;
    return res;
  }
  const double phi0 = -g0;
  const double dphi0 = -slope0;
  const double c1 = cfg.c1;
  const double c2 = cfg.c2;

  auto eval = [&](double t) {
    ++res.evals;
    return sample(t);
  };
  auto armijo_fails = [&](const CurveSample& s) { return -s.value > phi0 + c1 * s.t * dphi0; };
  auto curvature_holds = [&](const CurveSample& s) { return std::abs(s.slope) <= -c2 * dphi0; };

  auto zoom = [&](CurveSample lo, CurveSample hi) -> LineSearchResult {
    while (res.evals < cfg.max_evals) {
      const double a = std::min(lo.t, hi.t);
      const double b = std::max(lo.t, hi.t);
      const double w = b - a;
      if (w <= std::numeric_limits<double>::epsilon() * std::max(1.0, b)) {
        res.status = LineSearchStatus::BracketCollapsed;
        return res;
      }
      auto tj = detail::cubic_minimizer(lo.t, -lo.value, -lo.slope, hi.t, -hi.value, -hi.slope);
      if (!tj || *tj < a + 0.1 * w || *tj > b - 0.1 * w) tj = 0.5 * (lo.t + hi.t);
      CurveSample s = eval(*tj);
      if (armijo_fails(s) || -s.value >= -lo.value) {
        hi = std::move(s);
      } else {
        if (curvature_holds(s)) {
          res.status = LineSearchStatus::Converged;
          res.sample = std::move(s);
          return res;
        }
        if (-s.slope * (hi.t - lo.t) >= 0.0) hi = lo;
        lo = std::move(s);
      }
    }
    res.status = LineSearchStatus::MaxEvals;
    return res;
  };

  CurveSample prev;
  prev.t = 0.0;
  prev.value = g0;
  prev.slope = slope0;
  double t = std::clamp(t_first, std::numeric_limits<double>::min(), cfg.max_step);
  for (int i = 0; res.evals < cfg.max_evals; ++i) {
    CurveSample s = eval(t);
    if (armijo_fails(s) || (i > 0 && -s.value >= -prev.value)) return zoom(std::move(prev), std::move(s));
    if (curvature_holds(s)) {
      res.status = LineSearchStatus::Converged;
      res.sample = std::move(s);
      return res;
    }
    if (-s.slope >= 0.0) return zoom(std::move(s), std::move(prev));
    if (t >= cfg.max_step) break;
    prev = std::move(s);
    t = std::min(2.0 * t, cfg.max_step);
  }
  res.status = LineSearchStatus::MaxEvals;
  return res;
}

/// Line search along the retraction curve of `jet`. Trial points where the
/// objective overflows count as failing sufficient increase, so the search
/// backs off instead of aborting.
template <Objective F>
LineSearchResult line_search(const F& obj, const GeodesicJet& jet, double g0, double slope0, double t_first,
                             const WolfeConfig& cfg) {
  auto sample = [&](double t) {
    try {
      return sample_curve(obj, jet, t);
    } catch (const NumericalBreakdown&) {
      CurveSample s;
      s.t = t;
      s.value = -std::numeric_limits<double>::infinity();
      s.slope = std::numeric_limits<double>::quiet_NaN();
      return s;
    }
  };
  return strong_wolfe_search(sample, g0, slope0, t_first, cfg);
}

}  // namespace wrcg
