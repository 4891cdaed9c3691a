#pragma once

#include "wrcg/rcg.hpp"

namespace wrcg {

/// Nonlinear Dai-Yuan CG in the Euclidean metric with the same strong Wolfe
/// search, stopping rules and trace records as `run`. It is the RCG driver
/// with psi = 0 and straight-line steps, so it evaluates no Hessian products.
template <Objective F>
RcgResult run_euclidean_cg(const F& obj, const ChartPoint& theta0, const RcgConfig& cfg = {},
                           const StepObserver& observer = {}) {
  return detail::run_driver(obj, detail::Geometry{WarpConfig{}, true}, theta0, cfg, observer);
}

}  // namespace wrcg
