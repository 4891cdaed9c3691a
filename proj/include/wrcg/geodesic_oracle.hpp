#pragma once

// Dense reference geometry for tests. Everything here forms D x D matrices
// and is capped at small D; the optimiser never includes it.

#include "wrcg/core.hpp"
#include "wrcg/objective.hpp"
#include "wrcg/warp_geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace wrcg::oracle {

inline constexpr Index kMaxDenseDim = 64;

class StepUnstable : public Error {
 public:
  using Error::Error;
};

struct DenseGeometry {
  GeometryCache cache;
  Matrix hessian;
  Matrix G;
  Matrix G_inv;
  std::vector<Matrix> gamma;  // gamma[m](i, j) = Christoffel symbol of the second kind
};

template <Objective F>
Matrix dense_hessian(const F& obj, const Vector& theta, const FdConfig& fd = {}) {
  const Index d = theta.size();
  if (d > kMaxDenseDim) throw InvalidArgument("dense oracle is limited to D <= 64");
  Matrix h(d, d);
  for (Index j = 0; j < d; ++j) h.col(j) = hvp_or_fallback(obj, theta, Vector::Unit(d, j), fd);
  return 0.5 * (h + h.transpose());
}

inline Matrix dense_metric(const GeometryCache& c) {
  return Matrix::Identity(c.dim(), c.dim()) + c.psi_sq * c.grad * c.grad.transpose();
}

/// Christoffel symbols from the Levi-Civita formula, with the metric
/// derivatives dG/dtheta_k = d_k psi^2 g g^T + psi^2 (H_k g^T + g H_k^T).
inline std::vector<Matrix> christoffel_levi_civita(const GeometryCache& c, const Matrix& hess, const Matrix& g_inv) {
  const Index d = c.dim();
  std::vector<Matrix> dG(d);
  for (Index k = 0; k < d; ++k) {
    const Vector hk = hess.col(k);
    dG[k] = c.grad_psi_sq[k] * c.grad * c.grad.transpose() +
            c.psi_sq * (hk * c.grad.transpose() + c.grad * hk.transpose());
  }
  std::vector<Matrix> gamma(d, Matrix::Zero(d, d));
  for (Index m = 0; m < d; ++m) {
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) {
        double s = 0.0;
        for (Index l = 0; l < d; ++l) s += g_inv(m, l) * (dG[i](l, j) + dG[j](l, i) - dG[l](i, j));
        gamma[m](i, j) = 0.5 * s;
      }
    }
  }
  return gamma;
}

/// Gamma^m = Lambda d_m l / (2 W^2) - 1/2 g g^T d_m psi^2 with
/// Lambda = p g^T + g p^T + 2 psi^2 H + psi^2 <p, g> g g^T and p = grad psi^2.
inline std::vector<Matrix> christoffel_closed_form(const GeometryCache& c, const Matrix& hess) {
  const Index d = c.dim();
  const Vector& g = c.grad;
  const Vector& p = c.grad_psi_sq;
  const Matrix ggt = g * g.transpose();
  const Matrix lambda =
      p * g.transpose() + g * p.transpose() + 2.0 * c.psi_sq * hess + c.psi_sq * p.dot(g) * ggt;
  std::vector<Matrix> gamma(d);
  for (Index m = 0; m < d; ++m) gamma[m] = lambda * (g[m] / (2.0 * c.w_sq)) - 0.5 * p[m] * ggt;
  return gamma;
}

template <Objective F>
DenseGeometry build_christoffel(const F& obj, const WarpConfig& warp, const Vector& theta, const FdConfig& fd = {}) {
  DenseGeometry dg;
  dg.cache = build_cache(obj, warp, theta, fd);
  dg.hessian = dense_hessian(obj, theta, fd);
  dg.G = dense_metric(dg.cache);
  dg.G_inv = dg.G.inverse();
  dg.gamma = christoffel_closed_form(dg.cache, dg.hessian);
  return dg;
}

/// theta'' = -(v^T Gamma^m v)_m.
inline Vector christoffel_acceleration(const std::vector<Matrix>& gamma, const Vector& v) {
  Vector a(v.size());
  for (Index m = 0; m < v.size(); ++m) a[m] = -v.dot(gamma[m] * v);
  return a;
}

/// II(v) from its three rank-structured matrices, with grad psi = grad psi^2 / (2 psi).
inline double dense_second_fundamental_form(const GeometryCache& c, const Matrix& hess, const Vector& v) {
  if (!(c.psi_sq > 0.0)) throw PsiDegenerate("second fundamental form needs psi > 0");
  const double psi = std::sqrt(c.psi_sq);
  const double w = std::sqrt(c.w_sq);
  const Vector grad_psi = c.grad_psi_sq / (2.0 * psi);
  const Matrix m = (2.0 / w) * grad_psi * c.grad.transpose() + (psi / w) * hess +
                   (psi / (2.0 * w)) * c.grad_psi_sq.dot(c.grad) * c.grad * c.grad.transpose();
  return v.dot(m * v);
}

/// Weighted least squares (M^T G_psi M)^{-1} M^T G_psi z with M = [I; grad l^T]
/// and G_psi = diag(I, psi^2).
inline Vector dense_projection(const GeometryCache& c, const Vector& z) {
  const Index d = c.dim();
  Matrix m(d + 1, d);
  m.topRows(d).setIdentity();
  m.row(d) = c.grad.transpose();
  Vector w = Vector::Ones(d + 1);
  w[d] = c.psi_sq;
  const Matrix mtw = m.transpose() * w.asDiagonal();
  return (mtw * m).ldlt().solve(mtw * z);
}

struct GeodesicPath {
  std::vector<double> t;
  std::vector<Vector> theta;
  std::vector<Vector> velocity;
};

/// Classical RK4 on (theta, v) with the dense Christoffel acceleration.
template <Objective F>
GeodesicPath integrate_geodesic(const F& obj, const WarpConfig& warp, const Vector& theta0, const Vector& v0,
                                double t_end, int n_steps, const FdConfig& fd = {}) {
  if (n_steps < 1) throw InvalidArgument("integration needs at least one step");
  auto accel = [&](const Vector& x, const Vector& v) {
    const GeometryCache c = build_cache(obj, warp, x, fd);
    return christoffel_acceleration(christoffel_closed_form(c, dense_hessian(obj, x, fd)), v);
  };
  GeodesicPath path;
  const double h = t_end / n_steps;
  Vector x = theta0;
  Vector v = v0;
  path.t.push_back(0.0);
  path.theta.push_back(x);
  path.velocity.push_back(v);
  for (int i = 0; i < n_steps; ++i) {
    const Vector k1x = v;
    const Vector k1v = accel(x, v);
    const Vector k2x = v + 0.5 * h * k1v;
    const Vector k2v = accel(x + 0.5 * h * k1x, k2x);
    const Vector k3x = v + 0.5 * h * k2v;
    const Vector k3v = accel(x + 0.5 * h * k2x, k3x);
    const Vector k4x = v + h * k3v;
    const Vector k4v = accel(x + h * k3x, k4x);
    x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!x.allFinite() || !v.allFinite()) throw StepUnstable("geodesic integration became non-finite");
    path.t.push_back((i + 1) * h);
    path.theta.push_back(x);
    path.velocity.push_back(v);
  }
  return path;
}

/// Endpoint of the geodesic at t_end, refined until halving the step moves it
/// by less than `tol`. Gives up refining after `max_rounds` halvings, since
/// rounding eventually dominates the step-size error.
template <Objective F>
Vector geodesic_endpoint(const F& obj, const WarpConfig& warp, const Vector& theta0, const Vector& v0, double t_end,
                         double tol = 1e-13, int n_start = 16, int max_rounds = 6, const FdConfig& fd = {}) {
  int n = n_start;
  Vector prev = integrate_geodesic(obj, warp, theta0, v0, t_end, n, fd).theta.back();
  for (int round = 0; round < max_rounds; ++round) {
    n *= 2;
    Vector cur = integrate_geodesic(obj, warp, theta0, v0, t_end, n, fd).theta.back();
    if ((cur - prev).norm() < tol) return cur;
    prev = std::move(cur);
  }
  return prev;
}

}  // namespace wrcg::oracle
