#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "frontctl/model.hpp"

namespace frontctl {

/// 1-based (z, r) mode indices of a Neumann-Laplacian eigenfunction.
struct ModeIndex {
  int i = 1;
  int j = 1;

  friend constexpr auto operator<=>(const ModeIndex&, const ModeIndex&) = default;

  std::string to_string() const { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }
};

inline double laplacian_eigenvalue(ModeIndex m, double L, double R) {
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  const double a = (m.i - 1) / L;
  const double b = (m.j - 1) / R;
  return pi2 * (a * a + b * b);
}

/// 1 for the constant factor, sqrt(2) for cos((n-1) pi x / len), n > 1.
inline double factor_norm(int n) { return n == 1 ? 1.0 : std::numbers::sqrt2; }

struct Eigenpair {
  ModeIndex mode;
  double eigenvalue = 0.0;
  double rho = 1.0;
};

/// phi(z, r) = rho / sqrt(L R) cos((i-1) pi z / L) cos((j-1) pi r / R).
/// Out-of-domain coordinates are rejected.
inline double eval_eigenfunction(const Eigenpair& pair, const ModelParams& params, double z, double r) {
  constexpr double tol = 1e-12;
  if (!(z >= -tol * params.L && z <= params.L * (1 + tol) && r >= -tol * params.R && r <= params.R * (1 + tol))) {
    throw std::out_of_range("eval_eigenfunction: (z, r) outside the domain");
  }
  const double pi = std::numbers::pi;
  return pair.rho / std::sqrt(params.L * params.R) * std::cos((pair.mode.i - 1) * pi * z / params.L) *
         std::cos((pair.mode.j - 1) * pi * r / params.R);
}

/// Ordered truncated eigenbasis. Position e (0-based here) in modes() is the
/// flattened mode index e-1.
class SpectralBasis {
 public:
  SpectralBasis(const ModelParams& params, int n_modes) : L_(params.L), R_(params.R) {
    if (n_modes < 1) throw std::invalid_argument("enumerate_basis: N must be >= 1");
    // The N x N index rectangle always contains the N smallest eigenvalues:
    // the modes (1..N, 1) alone already undercut every mode with i > N.
    std::vector<Eigenpair> all;
    all.reserve(static_cast<std::size_t>(n_modes) * n_modes);
    for (int i = 1; i <= n_modes; ++i) {
      for (int j = 1; j <= n_modes; ++j) {
        const ModeIndex m{i, j};
        all.push_back({m, laplacian_eigenvalue(m, L_, R_), factor_norm(i) * factor_norm(j)});
      }
    }
    std::sort(all.begin(), all.end(), [](const Eigenpair& a, const Eigenpair& b) {
      const double scale = std::max({std::abs(a.eigenvalue), std::abs(b.eigenvalue), 1e-300});
      if (std::abs(a.eigenvalue - b.eigenvalue) > 1e-12 * scale) return a.eigenvalue < b.eigenvalue;
      return a.mode < b.mode;
    });
    all.resize(static_cast<std::size_t>(n_modes));
    modes_ = std::move(all);
  }

  int size() const { return static_cast<int>(modes_.size()); }
  const std::vector<Eigenpair>& modes() const { return modes_; }
  const Eigenpair& operator[](int e) const { return modes_.at(static_cast<std::size_t>(e)); }
  double L() const { return L_; }
  double R() const { return R_; }

  /// 0-based position of a mode, if it is part of the truncation.
  std::optional<int> position(ModeIndex m) const {
    for (int e = 0; e < size(); ++e) {
      if (modes_[static_cast<std::size_t>(e)].mode == m) return e;
    }
    return std::nullopt;
  }

 private:
  double L_;
  double R_;
  std::vector<Eigenpair> modes_;
};

inline SpectralBasis enumerate_basis(const ModelParams& params, int n_modes) {
  return SpectralBasis(params, n_modes);
}

}  // namespace frontctl
