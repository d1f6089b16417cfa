#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "frontctl/front_steady.hpp"
#include "frontctl/model.hpp"
#include "frontctl/quadrature.hpp"
#include "frontctl/spectral_basis.hpp"

namespace frontctl {

/// Point sensors on the design front line z = L/2.
struct SensorSpec {
  std::vector<double> r_positions;

  int count() const { return static_cast<int>(r_positions.size()); }

  void validate(double R) const {
    if (r_positions.empty()) throw std::invalid_argument("SensorSpec: at least one sensor required");
    for (std::size_t a = 0; a < r_positions.size(); ++a) {
      const double r = r_positions[a];
      if (!(r > 0.0 && r < R)) throw std::invalid_argument("SensorSpec: sensor r must lie in (0, R)");
      for (std::size_t b = 0; b < a; ++b) {
        if (r_positions[b] == r) throw std::invalid_argument("SensorSpec: sensor positions must be distinct");
      }
    }
  }
};

/// Actuator shape: either spatially uniform or a single basis eigenfunction.
struct ActuatorSpec {
  enum class Kind { Constant, EigenMode };
  Kind kind = Kind::Constant;
  ModeIndex mode{1, 1};

  static ActuatorSpec constant() { return {Kind::Constant, {1, 1}}; }
  static ActuatorSpec eigen_mode(ModeIndex m) { return {Kind::EigenMode, m}; }

  bool is_constant() const { return kind == Kind::Constant; }

  std::string to_string() const { return is_constant() ? std::string("constant") : "mode" + mode.to_string(); }

  friend bool operator==(const ActuatorSpec& a, const ActuatorSpec& b) {
    return a.kind == b.kind && (a.is_constant() || a.mode == b.mode);
  }
};

/// Galerkin-truncated linear model about the planar front:
///   [a'; b'] = A [a; b] + beta v,   w = H [a; b].
struct SpectralSystem {
  ModelParams params;
  SpectralBasis basis;
  SensorSpec sensors;
  std::vector<ActuatorSpec> actuators;
  Eigen::MatrixXd J;     // N x N
  Eigen::MatrixXd A;     // 2N x 2N
  Eigen::MatrixXd beta;  // 2N x eta, rows >= N are zero
  Eigen::MatrixXd H;     // eta x 2N, cols >= N are zero

  int N() const { return basis.size(); }
  int eta_in() const { return static_cast<int>(beta.cols()); }
  int eta_out() const { return static_cast<int>(H.rows()); }
};

struct JacobianQuadrature {
  int points_per_panel = 4;
  /// Each front-profile interval is split into this many panels.
  int panels_per_interval = 1;
};

/// J_em = int int (1 - 3 y_s^2) phi_m phi_e dz dr. The r-integral is the
/// Kronecker delta on the transverse index; the z-integral is a composite
/// Gauss-Legendre rule whose panels align with the profile's spline knots.
inline Eigen::MatrixXd assemble_jacobian(const FrontProfile& profile, const SpectralBasis& basis,
                                         JacobianQuadrature quad = {}) {
  std::vector<double> edges;
  const auto& g = profile.grid_z;
  const int sub = std::max(1, quad.panels_per_interval);
  edges.reserve((g.size() - 1) * static_cast<std::size_t>(sub) + 1);
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    for (int s = 0; s < sub; ++s) edges.push_back(g[k] + (g[k + 1] - g[k]) * s / sub);
  }
  edges.push_back(g.back());
  const QuadratureRule rule = composite_gauss_legendre(edges, quad.points_per_panel);

  const double L = basis.L();
  const std::size_t nq = rule.nodes.size();
  std::vector<double> weighted(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    weighted[q] = rule.weights[q] * eval_dPdy(profile.spline(std::clamp(rule.nodes[q], 0.0, L)));
  }

  int max_i = 1;
  for (const auto& m : basis.modes()) max_i = std::max(max_i, m.mode.i);
  // z-factors c_i(z) = norm_i / sqrt(L) cos((i-1) pi z / L) sampled at the nodes.
  std::vector<std::vector<double>> zfac(static_cast<std::size_t>(max_i));
  for (int i = 1; i <= max_i; ++i) {
    auto& col = zfac[static_cast<std::size_t>(i - 1)];
    col.resize(nq);
    const double c = factor_norm(i) / std::sqrt(L);
    for (std::size_t q = 0; q < nq; ++q) col[q] = c * std::cos((i - 1) * std::numbers::pi * rule.nodes[q] / L);
  }

  const int n = basis.size();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int e = 0; e < n; ++e) {
    for (int m = e; m < n; ++m) {
      const ModeIndex a = basis[e].mode;
      const ModeIndex b = basis[m].mode;
      if (a.j != b.j) continue;
      const auto& fa = zfac[static_cast<std::size_t>(a.i - 1)];
      const auto& fb = zfac[static_cast<std::size_t>(b.i - 1)];
      double s = 0.0;
      for (std::size_t q = 0; q < nq; ++q) s += weighted[q] * fa[q] * fb[q];
      J(e, m) = s;
      J(m, e) = s;
    }
  }
  return J;
}

/// Block layout [[-Lambda + J, I], [-eps gamma I, -eps I]].
inline Eigen::MatrixXd assemble_state_matrix(const Eigen::MatrixXd& J, const SpectralBasis& basis,
                                             const ModelParams& params) {
  const int n = basis.size();
  if (J.rows() != n || J.cols() != n) throw std::invalid_argument("assemble_state_matrix: J must be N x N");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  A.topLeftCorner(n, n) = J;
  for (int e = 0; e < n; ++e) A(e, e) -= basis[e].eigenvalue;
  A.topRightCorner(n, n).setIdentity();
  A.bottomLeftCorner(n, n) = -params.epsilon * params.gamma * Eigen::MatrixXd::Identity(n, n);
  A.bottomRightCorner(n, n) = -params.epsilon * Eigen::MatrixXd::Identity(n, n);
  return A;
}

/// H_df = phi_f(L/2, r_d) on the activator columns.
inline Eigen::MatrixXd assemble_output_matrix(const SensorSpec& sensors, const SpectralBasis& basis,
                                              const ModelParams& params) {
  sensors.validate(params.R);
  const int n = basis.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(sensors.count(), 2 * n);
  for (int d = 0; d < sensors.count(); ++d) {
    for (int f = 0; f < n; ++f) {
      H(d, f) = eval_eigenfunction(basis[f], params, params.L / 2.0, sensors.r_positions[static_cast<std::size_t>(d)]);
    }
  }
  return H;
}

/// beta_ed = int int psi_d phi_e. Eigenmode actuators psi_d = phi_e' give a unit
/// column; the uniform actuator psi = 1 gives sqrt(L R) on the (1,1) row.
inline Eigen::MatrixXd assemble_input_matrix(const std::vector<ActuatorSpec>& actuators, const SpectralBasis& basis,
                                             const ModelParams& params) {
  if (actuators.empty()) throw std::invalid_argument("assemble_input_matrix: actuator list is empty");
  const int n = basis.size();
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(2 * n, static_cast<Eigen::Index>(actuators.size()));
  for (std::size_t d = 0; d < actuators.size(); ++d) {
    const auto& act = actuators[d];
    if (act.is_constant()) {
      beta(0, static_cast<Eigen::Index>(d)) = std::sqrt(params.L * params.R);
    } else {
      const auto pos = basis.position(act.mode);
      if (!pos) throw std::invalid_argument("assemble_input_matrix: actuator mode " + act.mode.to_string() +
                                            " is outside the truncated basis");
      beta(*pos, static_cast<Eigen::Index>(d)) = 1.0;
    }
  }
  return beta;
}

/// Full assembly for given sensors and actuators. J is reused when provided
/// (it depends only on the profile and basis).
inline SpectralSystem assemble_system(const ModelParams& params, const FrontProfile& profile, const SpectralBasis& basis,
                                      const SensorSpec& sensors, const std::vector<ActuatorSpec>& actuators,
                                      const Eigen::MatrixXd* J_cached = nullptr) {
  SpectralSystem sys{params, basis, sensors, actuators, {}, {}, {}, {}};
  sys.J = J_cached ? *J_cached : assemble_jacobian(profile, basis);
  sys.A = assemble_state_matrix(sys.J, basis, params);
  sys.beta = assemble_input_matrix(actuators, basis, params);
  sys.H = assemble_output_matrix(sensors, basis, params);
  return sys;
}

/// Same system with a different actuator set; A, J and H are shared.
inline SpectralSystem with_actuators(const SpectralSystem& sys, const std::vector<ActuatorSpec>& actuators) {
  SpectralSystem out = sys;
  out.actuators = actuators;
  out.beta = assemble_input_matrix(actuators, sys.basis, sys.params);
  return out;
}

/// Leading eigenvalues of A sorted by descending real part, then descending
/// imaginary part.
inline std::vector<std::complex<double>> sorted_eigenvalues(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  if (es.info() != Eigen::Success) throw NumericalFailure("eigenvalue solver failed");
  std::vector<std::complex<double>> ev(es.eigenvalues().begin(), es.eigenvalues().end());
  std::sort(ev.begin(), ev.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return ev;
}

/// Open-loop state matrix for (params, profile) at truncation N.
inline Eigen::MatrixXd open_loop_matrix(const ModelParams& params, const FrontProfile& profile, int N) {
  const SpectralBasis basis(params, N);
  return assemble_state_matrix(assemble_jacobian(profile, basis), basis, params);
}

struct TruncationReport {
  bool adequate = true;
  double max_shift = 0.0;
  double scale = 0.0;
  std::vector<std::complex<double>> leading_n, leading_n_plus;
};

/// Compares the leading six eigenvalues of A at N and N + extra. Adequate when
/// each moves by less than 1% of the largest leading magnitude.
inline TruncationReport truncation_adequacy(const ModelParams& params, const FrontProfile& profile, int N,
                                            int extra = 10, int leading = 6) {
  TruncationReport rep;
  auto a = sorted_eigenvalues(open_loop_matrix(params, profile, N));
  auto b = sorted_eigenvalues(open_loop_matrix(params, profile, N + extra));
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(leading), std::min(a.size(), b.size()));
  rep.leading_n.assign(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n));
  rep.leading_n_plus.assign(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t k = 0; k < n; ++k) rep.scale = std::max(rep.scale, std::abs(a[k]));
  for (std::size_t k = 0; k < n; ++k) {
    // Nearest counterpart, since ordering can swap between truncations.
    double best = INFINITY;
    for (std::size_t m = 0; m < n; ++m) best = std::min(best, std::abs(a[k] - b[m]));
    rep.max_shift = std::max(rep.max_shift, best);
  }
  rep.adequate = rep.max_shift < 0.01 * rep.scale;
  return rep;
}

}  // namespace frontctl
