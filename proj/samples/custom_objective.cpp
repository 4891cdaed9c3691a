// Minimal use of the library with a user-defined objective.

#include "wrcg/rcg.hpp"

#include <cstdio>

// A banana-shaped log density, written in the minimisation form many
// callers already have.
struct BananaNegLogDensity {
  wrcg::Index dim() const { return 2; }

  double value(const wrcg::Vector& x) const {
    const double u = x[1] - 0.5 * x[0] * x[0];
    return 0.5 * x[0] * x[0] / 4.0 + 0.5 * u * u / 0.25;
  }

  wrcg::Vector gradient(const wrcg::Vector& x) const {
    const double u = x[1] - 0.5 * x[0] * x[0];
    wrcg::Vector g(2);
    g << x[0] / 4.0 - 4.0 * u * x[0], 4.0 * u;
    return g;
  }

  wrcg::Vector hessian_vector(const wrcg::Vector& x, const wrcg::Vector& v) const {
    const double u = x[1] - 0.5 * x[0] * x[0];
    const double hxx = 0.25 + 4.0 * x[0] * x[0] - 4.0 * u;
    const double hxy = -4.0 * x[0];
    wrcg::Vector out(2);
    out << hxx * v[0] + hxy * v[1], hxy * v[0] + 4.0 * v[1];
    return out;
  }
};

int main() {
  const wrcg::Negated<BananaNegLogDensity> objective{BananaNegLogDensity{}};
  wrcg::Vector theta0(2);
  theta0 << 3.0, -2.0;

  const auto result = wrcg::run(objective, wrcg::WarpConfig{1.0}, theta0);
  std::printf("stop: %s after %ld iterations\n", wrcg::to_string(result.state.stop_reason), result.state.k);
  std::printf("theta = (%.6f, %.6f), f = %.3e\n", result.theta[0], result.theta[1], -result.state.cache.ell);
  std::printf("Hessian-vector products: %lld\n", result.evals.hessian_vector);
  return result.theta.norm() < 1e-2 ? 0 : 1;
}
