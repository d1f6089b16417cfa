#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "frontctl/model.hpp"
#include "frontctl/quadrature.hpp"
#include "frontctl/spectral_basis.hpp"

namespace frontctl {
namespace {

constexpr double kPi = std::numbers::pi;

ModelParams reference_params(double R = 8.0) {
  ModelParams p;
  p.R = R;
  return p;
}

TEST(Kinetics, SourceTerms) {
  EXPECT_EQ(eval_P(0.0, 0.0), 0.0);
  EXPECT_EQ(eval_P(1.0, 0.0), 0.0);
  EXPECT_EQ(eval_P(2.0, 1.0), -5.0);

  EXPECT_EQ(eval_Q(0.0, 0.0, 0.45), 0.0);
  EXPECT_DOUBLE_EQ(eval_Q(1.0, -0.45, 0.45), 0.0);
  EXPECT_DOUBLE_EQ(eval_Q(2.0, 1.0, 0.45), -1.9);

  EXPECT_EQ(eval_dPdy(0.0), 1.0);
  EXPECT_NEAR(eval_dPdy(1.0 / std::sqrt(3.0)), 0.0, 1e-15);
  EXPECT_EQ(eval_dPdy(1.0), -2.0);
}

TEST(Kinetics, NullclineIsSteady) {
  for (double y = -2.0; y <= 2.0; y += 0.173) {
    EXPECT_EQ(eval_Q(y, -0.45 * y, 0.45), 0.0) << y;
  }
}

TEST(Kinetics, BistableRoots) {
  // P(y, -gamma y) = y (1 - gamma - y^2).
  for (double gamma : {0.1, 0.45, 0.9}) {
    const double s = upper_state(gamma);
    for (double root : {0.0, s, -s}) EXPECT_NEAR(eval_P(root, -gamma * root), 0.0, 1e-12);
    // Exactly three sign changes on a fine scan.
    int changes = 0;
    double prev = eval_P(-2.0, 2.0 * gamma);
    for (double y = -2.0 + 1e-3; y <= 2.0; y += 1e-3) {
      const double v = eval_P(y, -gamma * y);
      if ((v < 0) != (prev < 0)) ++changes;
      prev = v;
    }
    EXPECT_EQ(changes, 3);
  }
}

TEST(ModelParams, Validation) {
  EXPECT_NO_THROW(reference_params().validate());
  ModelParams p = reference_params();
  p.gamma = 1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = reference_params();
  p.epsilon = 1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = reference_params();
  p.R = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = reference_params();
  p.L = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(SpectralBasis, FirstModes) {
  const SpectralBasis one(reference_params(), 1);
  ASSERT_EQ(one.size(), 1);
  EXPECT_EQ(one[0].mode, (ModeIndex{1, 1}));
  EXPECT_EQ(one[0].eigenvalue, 0.0);
  EXPECT_EQ(one[0].rho, 1.0);

  const SpectralBasis two(reference_params(), 2);
  EXPECT_EQ(two[1].mode, (ModeIndex{2, 1}));
  EXPECT_NEAR(two[1].eigenvalue, kPi * kPi / 400.0, 1e-15);
}

TEST(SpectralBasis, RTransverseModeBeforeFifthAxialMode) {
  // pi^2/64 < 16 pi^2/400.
  ASSERT_LT(kPi * kPi / 64.0, 16.0 * kPi * kPi / 400.0);
  const SpectralBasis basis(reference_params(8.0), 10);
  const auto a = basis.position({1, 2});
  const auto b = basis.position({5, 1});
  ASSERT_TRUE(a && b);
  EXPECT_LT(*a, *b);
}

TEST(SpectralBasis, InvariantsAndOrdering) {
  for (double R : {2.0, 5.5, 8.0, 20.0}) {
    const ModelParams p = reference_params(R);
    const SpectralBasis basis(p, 40);
    for (int e = 0; e < basis.size(); ++e) {
      const auto& ep = basis[e];
      const double expect = kPi * kPi * (std::pow(ep.mode.i - 1, 2) / (p.L * p.L) + std::pow(ep.mode.j - 1, 2) / (R * R));
      EXPECT_NEAR(ep.eigenvalue, expect, 1e-13 * std::max(1.0, expect));
      const int big = (ep.mode.i > 1) + (ep.mode.j > 1);
      EXPECT_DOUBLE_EQ(ep.rho, big == 0 ? 1.0 : (big == 1 ? std::sqrt(2.0) : 2.0));
      // Ties within the ordering tolerance may be listed in index order.
      if (e > 0) EXPECT_LE(basis[e - 1].eigenvalue, ep.eigenvalue * (1 + 1e-12));
    }
  }
}

TEST(SpectralBasis, TiesBreakLexicographically) {
  // L = R makes (1,2) and (2,1) degenerate.
  ModelParams p;
  p.L = 5.0;
  p.R = 5.0;
  const SpectralBasis basis(p, 3);
  EXPECT_EQ(basis[1].mode, (ModeIndex{1, 2}));
  EXPECT_EQ(basis[2].mode, (ModeIndex{2, 1}));
  EXPECT_THROW(SpectralBasis(p, 0), std::invalid_argument);
}

TEST(SpectralBasis, ScanMatchesBruteForce) {
  // Brute-force enumeration over a much larger rectangle.
  const ModelParams p = reference_params(3.3);
  const int N = 30;
  std::vector<double> all;
  for (int i = 1; i <= 200; ++i)
    for (int j = 1; j <= 200; ++j) all.push_back(laplacian_eigenvalue({i, j}, p.L, p.R));
  std::sort(all.begin(), all.end());
  const SpectralBasis basis(p, N);
  for (int e = 0; e < N; ++e) EXPECT_DOUBLE_EQ(basis[e].eigenvalue, all[static_cast<std::size_t>(e)]);
}

// Symmetric (cell-centred) Neumann Laplacian on a 2-D grid; its eigenvalues
// converge to the continuum ones at O(h^2).
double fd_second_eigenvalue(double L, double R, int nz, int nr) {
  const double hz = L / nz, hr = R / nr;
  const int n = nz * nr;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  auto id = [&](int a, int b) { return b * nz + a; };
  for (int b = 0; b < nr; ++b)
    for (int a = 0; a < nz; ++a) {
      const int k = id(a, b);
      if (a > 0) { K(k, id(a - 1, b)) -= 1 / (hz * hz); K(k, k) += 1 / (hz * hz); }
      if (a + 1 < nz) { K(k, id(a + 1, b)) -= 1 / (hz * hz); K(k, k) += 1 / (hz * hz); }
      if (b > 0) { K(k, id(a, b - 1)) -= 1 / (hr * hr); K(k, k) += 1 / (hr * hr); }
      if (b + 1 < nr) { K(k, id(a, b + 1)) -= 1 / (hr * hr); K(k, k) += 1 / (hr * hr); }
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(1);
}

TEST(SpectralBasis, SecondEigenvalueMatchesFiniteDifferenceOracle) {
  const ModelParams p = reference_params(8.0);
  const double exact = SpectralBasis(p, 2)[1].eigenvalue;
  const double coarse = fd_second_eigenvalue(p.L, p.R, 20, 8);
  const double fine = fd_second_eigenvalue(p.L, p.R, 40, 16);
  const double e1 = std::abs(coarse - exact);
  const double e2 = std::abs(fine - exact);
  EXPECT_LT(e2, 1e-3 * exact);
  EXPECT_NEAR(e1 / e2, 4.0, 0.2);  // second order
}

TEST(Eigenfunction, PointValues) {
  const ModelParams p = reference_params(8.0);
  const SpectralBasis basis(p, 10);
  const auto& c = basis[*basis.position({1, 1})];
  EXPECT_DOUBLE_EQ(eval_eigenfunction(c, p, 3.7, 1.2), 1.0 / std::sqrt(160.0));
  const auto& z1 = basis[*basis.position({2, 1})];
  EXPECT_NEAR(eval_eigenfunction(z1, p, p.L / 2, 2.5), 0.0, 1e-16);
  const auto& r1 = basis[*basis.position({1, 2})];
  EXPECT_DOUBLE_EQ(eval_eigenfunction(r1, p, 4.0, 0.0), std::sqrt(2.0) / std::sqrt(160.0));
  EXPECT_THROW(eval_eigenfunction(c, p, -0.5, 1.0), std::out_of_range);
  EXPECT_THROW(eval_eigenfunction(c, p, 1.0, 8.5), std::out_of_range);
}

TEST(Eigenfunction, OrthonormalGram) {
  for (double R : {4.0, 8.0}) {
    const ModelParams p = reference_params(R);
    const SpectralBasis basis(p, 23);
    std::vector<double> ez, er;
    for (int k = 0; k <= 50; ++k) {
      ez.push_back(p.L * k / 50.0);
      er.push_back(p.R * k / 50.0);
    }
    const auto qz = composite_gauss_legendre(ez, 4);  // 200 points
    const auto qr = composite_gauss_legendre(er, 4);
    const int n = basis.size();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t a = 0; a < qz.nodes.size(); ++a)
      for (std::size_t b = 0; b < qr.nodes.size(); ++b) {
        Eigen::VectorXd v(n);
        for (int e = 0; e < n; ++e) v(e) = eval_eigenfunction(basis[e], p, qz.nodes[a], qr.nodes[b]);
        G += qz.weights[a] * qr.weights[b] * v * v.transpose();
      }
    EXPECT_LT((G - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-8) << "R=" << R;
  }
}

TEST(Eigenfunction, NeumannEdges) {
  const ModelParams p = reference_params(6.0);
  const SpectralBasis basis(p, 23);
  const double h = 1e-4;
  auto d1 = [&](auto f, double x0, double sign) {
    // Second-order one-sided difference pointing into the domain.
    return sign * (-3.0 * f(x0) + 4.0 * f(x0 + sign * h) - f(x0 + 2.0 * sign * h)) / (2.0 * h);
  };
  for (int e = 0; e < basis.size(); ++e) {
    for (double s : {0.0, 0.37, 0.81}) {
      auto fz = [&](double z) { return eval_eigenfunction(basis[e], p, z, s * p.R); };
      auto fr = [&](double r) { return eval_eigenfunction(basis[e], p, s * p.L, r); };
      EXPECT_LT(std::abs(d1(fz, 0.0, 1.0)), 1e-6);
      EXPECT_LT(std::abs(d1(fz, p.L, -1.0)), 1e-6);
      EXPECT_LT(std::abs(d1(fr, 0.0, 1.0)), 1e-6);
      EXPECT_LT(std::abs(d1(fr, p.R, -1.0)), 1e-6);
    }
  }
}

TEST(Quadrature, GaussLegendreExactness) {
  for (int n : {2, 3, 4, 5, 8, 10}) {
    const auto rule = gauss_legendre(n);
    ASSERT_EQ(static_cast<int>(rule.nodes.size()), n);
    // Exact for x^(2n-1) and x^(2n-2).
    double s_odd = 0, s_even = 0;
    for (int q = 0; q < n; ++q) {
      s_odd += rule.weights[q] * std::pow(rule.nodes[q], 2 * n - 1);
      s_even += rule.weights[q] * std::pow(rule.nodes[q], 2 * n - 2);
    }
    EXPECT_NEAR(s_odd, 0.0, 1e-14);
    EXPECT_NEAR(s_even, 2.0 / (2 * n - 1), 1e-14);
  }
  EXPECT_THROW(gauss_legendre(7), std::invalid_argument);
}

}  // namespace
}  // namespace frontctl
