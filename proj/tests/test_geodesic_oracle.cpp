#include "test_support.hpp"
#include "wrcg/geodesic_oracle.hpp"
#include "wrcg/problems.hpp"

#include <gtest/gtest.h>

using namespace wrcg;
using namespace wrcg::testing;

TEST(Christoffel, ClosedFormMatchesLeviCivita) {
  for (int trial = 0; trial < 5; ++trial) {
    SquiggleProblem p(4, 1.3);
    const Vector theta = random_vector(4, 2.0);
    for (double s2 : {0.5, 1.0, 10.0}) {
      const auto dg = oracle::build_christoffel(p, WarpConfig{s2}, theta);
      const auto lc = oracle::christoffel_levi_civita(dg.cache, dg.hessian, dg.G_inv);
      for (Index m = 0; m < 4; ++m) {
        const double scale = std::max(1.0, lc[m].norm());
        EXPECT_LT((dg.gamma[m] - lc[m]).norm() / scale, 1e-10) << "m=" << m << " sigma^2=" << s2;
      }
    }
  }
}

TEST(Christoffel, SymmetricInLowerIndices) {
  RosenbrockProblem p(3);
  const auto dg = oracle::build_christoffel(p, WarpConfig{9e4}, Vector::LinSpaced(3, -0.4, 0.7));
  for (const auto& g : dg.gamma) EXPECT_LT((g - g.transpose()).norm(), 1e-12 * std::max(1.0, g.norm()));
}

TEST(Christoffel, VanishAtCriticalPoint) {
  SquiggleProblem p(3);
  const auto dg = oracle::build_christoffel(p, WarpConfig{1.0}, Vector::Zero(3));
  for (const auto& g : dg.gamma) EXPECT_EQ(g.norm(), 0.0);
}

TEST(DenseMetric, InverseRoundTrip) {
  SquiggleProblem p(5);
  const auto dg = oracle::build_christoffel(p, WarpConfig{1.0}, random_vector(5, 3.0));
  const double kappa = dg.cache.w_sq;
  EXPECT_LT((dg.G * dg.G_inv - Matrix::Identity(5, 5)).norm(), 64 * kappa * 2.2e-16);
}

TEST(DenseMetric, RejectsLargeDimension) {
  const Index d = oracle::kMaxDenseDim + 1;
  QuadraticGaussianProblem q(d);
  EXPECT_THROW(oracle::dense_hessian(q, Vector::Zero(d)), InvalidArgument);
}

TEST(Integrator, StraightLineWhenFlat) {
  QuadraticGaussianProblem q(3);
  const Vector x0 = Vector::LinSpaced(3, -1.0, 1.0);
  const Vector v0 = Vector::LinSpaced(3, 0.5, -0.2);
  const auto path = oracle::integrate_geodesic(q, WarpConfig{1e300}, x0, v0, 1.0, 8);
  EXPECT_LT((path.theta.back() - (x0 + v0)).norm(), 1e-12);
}

TEST(Integrator, StraightLineAlongSymmetryAxis) {
  // The gradient stays parallel to the velocity on this axis.
  QuadraticGaussianProblem q(2);
  const Vector x0 = (Vector(2) << 2.0, 0.0).finished();
  const Vector v0 = (Vector(2) << -0.5, 0.0).finished();
  const auto path = oracle::integrate_geodesic(q, WarpConfig{1.0}, x0, v0, 1.0, 64);
  for (const auto& x : path.theta) EXPECT_NEAR(x[1], 0.0, 1e-14);
}

TEST(Integrator, ConservesMetricSpeed) {
  SquiggleProblem p(3, 1.3);
  const WarpConfig warp{1.0};
  const Vector x0 = (Vector(3) << 2.0, -0.7, 1.1).finished();
  const Vector v0 = (Vector(3) << -0.4, 0.3, 0.2).finished();
  const auto path = oracle::integrate_geodesic(p, warp, x0, v0, 1.0, 256);
  const double speed0 = metric_norm(build_cache(p, warp, x0), v0);
  for (size_t i = 0; i < path.theta.size(); i += 32) {
    const double s = metric_norm(build_cache(p, warp, path.theta[i]), path.velocity[i]);
    EXPECT_LT(std::abs(s - speed0) / speed0, 1e-8) << "step " << i;
  }
}

TEST(Integrator, EndpointRefinementConverges) {
  SquiggleProblem p(2, 1.3);
  const Vector x0 = (Vector(2) << 3.0, 1.4).finished();
  const Vector v0 = (Vector(2) << -0.12, -0.1).finished();
  const Vector a = oracle::geodesic_endpoint(p, WarpConfig{1.0}, x0, v0, 1.0);
  const Vector b = oracle::integrate_geodesic(p, WarpConfig{1.0}, x0, v0, 1.0, 2048).theta.back();
  EXPECT_LT((a - b).norm(), 1e-11);
}

TEST(Integrator, RejectsZeroSteps) {
  QuadraticGaussianProblem q(2);
  EXPECT_THROW(oracle::integrate_geodesic(q, WarpConfig{1.0}, Vector::Ones(2), Vector::Ones(2), 1.0, 0),
               InvalidArgument);
}
