#include <gtest/gtest.h>

#include <cmath>

#include "frontctl/front_steady.hpp"

namespace frontctl {
namespace {

ModelParams reference_params() { return ModelParams{}; }

TEST(SolveFront, ReferenceParametersConverge) {
  const ModelParams p = reference_params();
  const FrontProfile f = solve_front(p, 401);
  EXPECT_LE(f.residual_norm, 1e-10);
  EXPECT_LE(f.iterations, 50);
  ASSERT_EQ(f.ys.size(), 401u);

  // theta_s = -gamma y_s pointwise.
  for (std::size_t k = 0; k < f.ys.size(); ++k) EXPECT_NEAR(f.thetas[k], -p.gamma * f.ys[k], 1e-12);

  // Odd about the centre, zero at L/2.
  const std::size_t n = f.ys.size();
  EXPECT_NEAR(f.ys[n / 2], 0.0, 1e-10);
  for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(f.ys[k], -f.ys[n - 1 - k], 1e-10);

  // No-flux ends.
  const double h = f.grid_z[1] - f.grid_z[0];
  // With the ghost-point closure the end difference is (h/2) y''(end), where
  // y'' = y^3 - (1 - gamma) y, so the one-sided slope is O(h) and tiny here.
  const double c = 1.0 - p.gamma;
  auto ypp = [&](double y) { return y * y * y - c * y; };
  EXPECT_NEAR((f.ys[1] - f.ys[0]) / h, 0.5 * h * ypp(f.ys[0]), 1e-9);
  EXPECT_NEAR((f.ys[n - 1] - f.ys[n - 2]) / h, -0.5 * h * ypp(f.ys[n - 1]), 1e-9);
  EXPECT_LT(std::abs(f.ys[1] - f.ys[0]) / h, 1e-5);

  // Right end sits on the upper homogeneous state.
  EXPECT_NEAR(f.ys.back(), std::sqrt(0.55), 1e-3);
}

TEST(SolveFront, AnalyticKinkOnInfiniteLine) {
  // The infinite-line kink solves the ODE exactly; its residual away from the
  // ends is the truncation error only.
  const double c = 0.55;
  auto kink = [&](double x) { return std::sqrt(c) * std::tanh(std::sqrt(c / 2.0) * x); };
  auto kink_dd = [&](double x) {
    const double a = std::sqrt(c / 2.0);
    const double t = std::tanh(a * x);
    return -2.0 * std::sqrt(c) * a * a * t * (1.0 - t * t);
  };
  for (double x = -5.0; x <= 5.0; x += 0.25) {
    const double y = kink(x);
    EXPECT_NEAR(kink_dd(x) - (y * y * y - c * y), 0.0, 1e-14);
  }
  // On L = 20 the far-field value is the kink asymptote.
  const FrontProfile f = solve_front(reference_params());
  EXPECT_NEAR(f.ys.back(), kink(10.0), 1e-3);
}

TEST(SolveFront, ZeroGammaMatchesTanh) {
  ModelParams p;
  p.L = 40.0;
  p.gamma = 0.0;
  const FrontProfile f = solve_front(p, 2001);
  double err = 0.0;
  for (std::size_t k = 0; k < f.ys.size(); ++k) {
    const double z = f.grid_z[k];
    if (z < 5.0 || z > 35.0) continue;
    err = std::max(err, std::abs(f.ys[k] - std::tanh((z - p.L / 2) / std::sqrt(2.0))));
  }
  EXPECT_LT(err, 1e-4);
}

TEST(SolveFront, SecondOrderConvergence) {
  const ModelParams p = reference_params();
  const FrontProfile a = solve_front(p, 201);
  const FrontProfile b = solve_front(p, 401);
  const FrontProfile c = solve_front(p, 801);
  double dab = 0.0, dbc = 0.0;
  for (std::size_t k = 0; k < a.ys.size(); ++k) {
    dab = std::max(dab, std::abs(a.ys[k] - b.ys[2 * k]));
    dbc = std::max(dbc, std::abs(b.ys[2 * k] - c.ys[4 * k]));
  }
  EXPECT_NEAR(dab / dbc, 4.0, 0.3);
}

TEST(SolveFront, StationaryResidualOfFullSystem) {
  const FrontProfile f = solve_front(reference_params());
  EXPECT_LE(stationary_residual(f, 0.45), 1e-8);
}

TEST(SolveFront, RejectsBadInput) {
  ModelParams p = reference_params();
  EXPECT_THROW(solve_front(p, 32), std::invalid_argument);
  p.gamma = 1.0;
  EXPECT_THROW(solve_front(p), std::invalid_argument);
  p.gamma = 1.3;
  EXPECT_THROW(solve_front(p), std::invalid_argument);
}

TEST(SolveFront, NonConvergenceIsReported) {
  EXPECT_THROW(solve_front(reference_params(), 401, 1e-30, 3), NumericalFailure);
}

TEST(EvalFront, InterpolationContract) {
  const ModelParams p = reference_params();
  const FrontProfile f = solve_front(p);
  for (std::size_t k = 0; k < f.ys.size(); k += 37) {
    EXPECT_EQ(eval_front(f, p.gamma, f.grid_z[k]).y, f.ys[k]);
  }
  const auto mid = eval_front(f, p.gamma, p.L / 2);
  EXPECT_NEAR(mid.y, 0.0, 1e-10);
  EXPECT_NEAR(mid.theta, 0.0, 1e-10);
  EXPECT_NEAR(eval_front(f, p.gamma, p.L).y, 0.7416, 1e-3);
  EXPECT_THROW(eval_front(f, p.gamma, -0.1), std::out_of_range);
  EXPECT_THROW(eval_front(f, p.gamma, p.L + 0.1), std::out_of_range);

  // Between nodes the spline agrees with a finer solve to O(h^2).
  const FrontProfile fine = solve_front(p, 1601);
  for (double z = 0.013; z < p.L; z += 0.731) {
    EXPECT_NEAR(eval_front(f, p.gamma, z).y, eval_front(fine, p.gamma, z).y, 2e-4);
  }
}

TEST(ClampedSpline, ReproducesCubicWithZeroEndSlopes) {
  // y = 3x^2 - 2x^3 has y'(0) = y'(1) = 0, so the clamped spline is exact.
  std::vector<double> x, y;
  for (int k = 0; k <= 10; ++k) {
    const double t = k / 10.0;
    x.push_back(t);
    y.push_back(3 * t * t - 2 * t * t * t);
  }
  const ClampedSpline s(x, y);
  for (double t = 0.0; t <= 1.0; t += 0.0137) EXPECT_NEAR(s(t), 3 * t * t - 2 * t * t * t, 1e-13);
}

}  // namespace
}  // namespace frontctl
