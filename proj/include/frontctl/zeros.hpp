#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "frontctl/errors.hpp"
#include "frontctl/galerkin.hpp"

namespace frontctl {

using Complex = std::complex<double>;

/// Orders by descending real part, then descending imaginary part. The first
/// element is the "leading" value.
inline void sort_leading_first(std::vector<Complex>& v) {
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

inline double spectral_abscissa(const std::vector<Complex>& v) {
  double m = -INFINITY;
  for (auto z : v) m = std::max(m, z.real());
  return m;
}

inline std::vector<Complex> eigenvalues_of(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) throw NumericalFailure("eigenvalue solver failed");
  std::vector<Complex> v(es.eigenvalues().begin(), es.eigenvalues().end());
  sort_leading_first(v);
  return v;
}

struct ZeroSet {
  std::vector<Complex> finite_zeros;  // leading first

  int count() const { return static_cast<int>(finite_zeros.size()); }
  bool empty() const { return finite_zeros.empty(); }
  /// Largest real part, ties broken by largest imaginary part.
  Complex leading_zero() const {
    if (finite_zeros.empty()) throw std::logic_error("ZeroSet: no finite zeros");
    return finite_zeros.front();
  }
};

/// Static output mixing v = k M w. Must be nonsingular.
struct Precompensator {
  Eigen::MatrixXd M;

  static Precompensator identity(int eta) { return {Eigen::MatrixXd::Identity(eta, eta)}; }
  static Precompensator swap2() {
    Eigen::MatrixXd m(2, 2);
    m << 0, 1, 1, 0;
    return {m};
  }

  void validate() const {
    if (M.rows() != M.cols() || M.rows() == 0) throw std::invalid_argument("Precompensator: M must be square");
    if (!(std::abs(M.determinant()) > 1e-12)) throw std::invalid_argument("Precompensator: M is singular");
  }

  bool is_identity() const { return M.isIdentity(0.0); }
};

inline constexpr double kInfiniteZeroMagnitude = 1e8;

/// Finite generalized eigenvalues of the Rosenbrock pencil
///   ([A, B; H, 0], diag(I_n, 0)).
/// Values above 1e8 in magnitude, or with vanishing beta, are infinite zeros.
inline ZeroSet finite_zeros(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& H) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || H.cols() != n) throw std::invalid_argument("finite_zeros: dimension mismatch");
  if (B.cols() != H.rows()) {
    throw std::invalid_argument("finite_zeros: input and output counts differ (square systems only)");
  }
  const Eigen::Index p = B.cols();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n + p, n + p);
  S.topLeftCorner(n, n) = A;
  S.topRightCorner(n, p) = B;
  S.bottomLeftCorner(p, n) = H;
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n + p, n + p);
  E.topLeftCorner(n, n).setIdentity();

  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges;
  ges.setMaxIterations(100 * static_cast<Eigen::Index>(n + p));
  ges.compute(S, E, false);
  if (ges.info() != Eigen::Success) throw NumericalFailure("finite_zeros: QZ iteration failed");

  ZeroSet out;
  const auto alphas = ges.alphas();
  const auto betas = ges.betas();
  for (Eigen::Index k = 0; k < alphas.size(); ++k) {
    const double b = betas(k);
    const Complex a = alphas(k);
    if (std::abs(a) >= kInfiniteZeroMagnitude * std::abs(b)) continue;
    out.finite_zeros.push_back(a / b);
  }
  sort_leading_first(out.finite_zeros);
  return out;
}

inline ZeroSet finite_zeros(const SpectralSystem& sys) { return finite_zeros(sys.A, sys.beta, sys.H); }

struct DecouplingOptions {
  std::uint64_t seed = 20240607;
  int draws = 3;
  double invariance_tol = 1e-6;
  double rank_tol = 1e-8;
};

namespace detail {

/// sigma_min / sigma_max of [sI - A, -B].
inline double relative_rank_gap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Complex s) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXcd P(n, n + B.cols());
  P.leftCols(n) = -A.cast<Complex>();
  P.leftCols(n).diagonal().array() += s;
  P.rightCols(B.cols()) = -B.cast<Complex>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(P);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) / std::max(sv(0), 1e-300);
}

/// Removes from `pool` the element nearest to z if within tol.
inline bool take_match(std::vector<Complex>& pool, Complex z, double tol) {
  auto best = pool.end();
  double bd = tol;
  for (auto it = pool.begin(); it != pool.end(); ++it) {
    const double d = std::abs(*it - z);
    if (d <= bd) {
      bd = d;
      best = it;
    }
  }
  if (best == pool.end()) return false;
  pool.erase(best);
  return true;
}

}  // namespace detail

struct DecouplingResult {
  std::vector<Complex> zeros;        // agreed set, leading first
  std::vector<Complex> by_invariance;
  std::vector<Complex> by_rank_test;
  /// Eigenvalues the feedback test cannot move beyond its tolerance although
  /// the rank test finds them controllable (rank gap between rank_tol and
  /// invariance_tol). Weakly but genuinely controllable; not zeros.
  std::vector<Complex> weakly_decoupled;
};

/// Uncontrollable eigenvalues of (A, B), found as eigenvalues of A + B K_j
/// that stay put across random state feedback gains K_j (entries uniform in
/// [-1, 1]); every eigenvalue of A is also PBH rank-tested and the two sets
/// must agree. A feedback-invariant eigenvalue whose relative rank gap lies
/// in [rank_tol, invariance_tol] is consistent with both tests (the feedback
/// shift of a weakly controllable mode is of the order of its rank gap) and
/// is reported as weakly decoupled; anything else is a numerical failure.
inline DecouplingResult input_decoupling_analysis(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                                  const DecouplingOptions& opt = {}) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n) throw std::invalid_argument("input_decoupling_zeros: dimension mismatch");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  const std::vector<Complex> open = eigenvalues_of(A);
  std::vector<Complex> candidates = open;
  for (int d = 0; d < std::max(1, opt.draws); ++d) {
    Eigen::MatrixXd K(B.cols(), n);
    for (Eigen::Index r = 0; r < K.rows(); ++r)
      for (Eigen::Index c = 0; c < n; ++c) K(r, c) = dist(rng);
    std::vector<Complex> pool = eigenvalues_of(A + B * K);
    std::vector<Complex> kept;
    for (auto z : candidates) {
      if (detail::take_match(pool, z, opt.invariance_tol)) kept.push_back(z);
    }
    candidates = std::move(kept);
  }

  DecouplingResult res;
  res.by_invariance = candidates;
  for (auto z : open) {
    if (detail::relative_rank_gap(A, B, z) < opt.rank_tol) res.by_rank_test.push_back(z);
  }

  std::vector<Complex> pool = res.by_invariance;
  int moved = 0, inconsistent = 0;
  for (auto z : res.by_rank_test)
    if (!detail::take_match(pool, z, opt.invariance_tol)) ++moved;
  for (auto z : pool) {
    if (detail::relative_rank_gap(A, B, z) <= opt.invariance_tol) {
      res.weakly_decoupled.push_back(z);
    } else {
      ++inconsistent;
    }
  }
  if (moved > 0 || inconsistent > 0) {
    throw NumericalFailure("decoupling zeros: invariance method found " + std::to_string(res.by_invariance.size()) +
                           " values, rank test found " + std::to_string(res.by_rank_test.size()) + " (" +
                           std::to_string(moved) + " rank-deficient values moved by feedback, " +
                           std::to_string(inconsistent) + " invariant values clearly controllable)");
  }
  res.zeros = res.by_rank_test;
  sort_leading_first(res.zeros);
  sort_leading_first(res.weakly_decoupled);
  return res;
}

inline std::vector<Complex> input_decoupling_zeros(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                                   const DecouplingOptions& opt = {}) {
  return input_decoupling_analysis(A, B, opt).zeros;
}

/// Unobservable eigenvalues of (A, H), by duality on (A^T, H^T).
inline std::vector<Complex> output_decoupling_zeros(const Eigen::MatrixXd& A, const Eigen::MatrixXd& H,
                                                    const DecouplingOptions& opt = {}) {
  return input_decoupling_analysis(A.transpose(), H.transpose(), opt).zeros;
}

struct InfiniteZeroCheck {
  bool pass = false;
  bool singular = false;
  double determinant = 0.0;
  std::vector<Complex> eigenvalues;  // of M H beta
};

/// High-gain asymptotes point into the left half-plane for k < 0 iff
/// M H beta is nonsingular with all eigenvalues in the open right half-plane.
inline InfiniteZeroCheck infinite_zero_check(const Eigen::MatrixXd& H, const Eigen::MatrixXd& beta,
                                             const std::optional<Precompensator>& M = std::nullopt) {
  if (H.rows() != beta.cols() || H.cols() != beta.rows()) {
    throw std::invalid_argument("infinite_zero_check: H beta must be square");
  }
  Eigen::MatrixXd G = H * beta;
  if (M) {
    M->validate();
    if (M->M.rows() != G.rows()) throw std::invalid_argument("infinite_zero_check: precompensator size mismatch");
    G = M->M * G;
  }
  InfiniteZeroCheck chk;
  chk.determinant = G.determinant();
  double hadamard = 1.0;
  for (Eigen::Index r = 0; r < G.rows(); ++r) hadamard *= G.row(r).norm();
  chk.singular = !(std::abs(chk.determinant) > 1e-12 * hadamard) || hadamard == 0.0;
  chk.eigenvalues = eigenvalues_of(G);
  chk.pass = !chk.singular && std::all_of(chk.eigenvalues.begin(), chk.eigenvalues.end(),
                                          [](Complex z) { return z.real() > 0.0; });
  return chk;
}

/// A + k beta M H, the closed loop under v = k M w.
inline Eigen::MatrixXd closed_loop_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& beta,
                                          const Eigen::MatrixXd& H, double k,
                                          const std::optional<Precompensator>& M = std::nullopt) {
  if (M) return A + k * beta * M->M * H;
  return A + k * beta * H;
}

inline std::vector<Complex> closed_loop_spectrum(const SpectralSystem& sys, double k,
                                                 const std::optional<Precompensator>& M = std::nullopt) {
  if (!std::isfinite(k)) throw std::invalid_argument("closed_loop_spectrum: gain must be finite");
  return eigenvalues_of(closed_loop_matrix(sys.A, sys.beta, sys.H, k, M));
}

struct RootLocusPoint {
  double k;
  int branch;
  Complex value;
};

struct RootLocus {
  std::vector<double> gains;
  /// branches[b][g] is branch b at gains[g].
  std::vector<std::vector<Complex>> branches;
  /// Gain indices where two eigenvalues were closer than the ambiguity
  /// threshold, making the pairing unreliable.
  std::vector<std::size_t> ambiguous_steps;

  std::vector<RootLocusPoint> flatten() const {
    std::vector<RootLocusPoint> out;
    for (std::size_t g = 0; g < gains.size(); ++g)
      for (std::size_t b = 0; b < branches.size(); ++b) out.push_back({gains[g], static_cast<int>(b), branches[b][g]});
    return out;
  }
};

/// Closed-loop spectra along k_grid with branches continued by greedy
/// nearest-neighbour pairing between consecutive gains.
inline RootLocus root_locus(const Eigen::MatrixXd& A, const Eigen::MatrixXd& beta, const Eigen::MatrixXd& H,
                            const std::vector<double>& k_grid, const std::optional<Precompensator>& M = std::nullopt,
                            double ambiguity = 1e-10) {
  if (k_grid.empty()) throw std::invalid_argument("root_locus: empty gain grid");
  if (!std::is_sorted(k_grid.begin(), k_grid.end()) && !std::is_sorted(k_grid.rbegin(), k_grid.rend())) {
    throw std::invalid_argument("root_locus: gain grid must be sorted");
  }
  if (std::find(k_grid.begin(), k_grid.end(), 0.0) == k_grid.end()) {
    throw std::invalid_argument("root_locus: gain grid must contain 0");
  }
  RootLocus rl;
  rl.gains = k_grid;
  const std::size_t nb = static_cast<std::size_t>(A.rows());
  rl.branches.assign(nb, std::vector<Complex>(k_grid.size()));

  std::vector<Complex> prev;
  for (std::size_t g = 0; g < k_grid.size(); ++g) {
    std::vector<Complex> cur = eigenvalues_of(closed_loop_matrix(A, beta, H, k_grid[g], M));
    for (std::size_t a = 0; a < cur.size(); ++a) {
      for (std::size_t b = a + 1; b < cur.size(); ++b) {
        if (std::abs(cur[a] - cur[b]) < ambiguity) {
          rl.ambiguous_steps.push_back(g);
          a = cur.size();
          break;
        }
      }
    }
    if (g == 0) {
      for (std::size_t b = 0; b < nb; ++b) rl.branches[b][0] = cur[b];
    } else {
      // Pair all (branch, eigenvalue) combinations closest-first.
      struct Cand {
        double d;
        std::size_t b, e;
      };
      std::vector<Cand> cands;
      cands.reserve(nb * nb);
      for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t e = 0; e < nb; ++e) cands.push_back({std::abs(prev[b] - cur[e]), b, e});
      std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        if (x.d != y.d) return x.d < y.d;
        if (x.b != y.b) return x.b < y.b;
        return x.e < y.e;
      });
      std::vector<bool> used_b(nb, false), used_e(nb, false);
      for (const auto& c : cands) {
        if (used_b[c.b] || used_e[c.e]) continue;
        used_b[c.b] = used_e[c.e] = true;
        rl.branches[c.b][g] = cur[c.e];
      }
    }
    prev.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) prev[b] = rl.branches[b][g];
  }
  return rl;
}

inline RootLocus root_locus(const SpectralSystem& sys, const std::vector<double>& k_grid,
                            const std::optional<Precompensator>& M = std::nullopt) {
  return root_locus(sys.A, sys.beta, sys.H, k_grid, M);
}

}  // namespace frontctl
