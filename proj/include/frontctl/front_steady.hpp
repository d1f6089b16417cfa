#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "frontctl/errors.hpp"
#include "frontctl/model.hpp"

namespace frontctl {

/// Cubic spline with zero end slopes, matching the no-flux ends of the
/// front profile. Interpolates exactly at the knots.
class ClampedSpline {
 public:
  ClampedSpline() = default;

  ClampedSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("ClampedSpline: need >= 2 matching knots");
    // Tridiagonal system for knot second derivatives with y'(x0) = y'(xn) = 0.
    std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double hl = k > 0 ? x_[k] - x_[k - 1] : 0.0;
      const double hr = k + 1 < n ? x_[k + 1] - x_[k] : 0.0;
      diag[k] = (hl + hr) / 3.0;
      if (k > 0) sub[k] = hl / 6.0;
      if (k + 1 < n) sup[k] = hr / 6.0;
      const double sl = k > 0 ? (y_[k] - y_[k - 1]) / hl : 0.0;
      const double sr = k + 1 < n ? (y_[k + 1] - y_[k]) / hr : 0.0;
      rhs[k] = sr - sl;
    }
    for (std::size_t k = 1; k < n; ++k) {
      const double w = sub[k] / diag[k - 1];
      diag[k] -= w * sup[k - 1];
      rhs[k] -= w * rhs[k - 1];
    }
    m_.assign(n, 0.0);
    m_[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) m_[k] = (rhs[k] - sup[k] * m_[k + 1]) / diag[k];
  }

  double operator()(double t) const {
    if (t < x_.front() || t > x_.back()) throw std::out_of_range("ClampedSpline: argument outside knot range");
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    if (k + 1 >= x_.size()) k = x_.size() - 2;
    const double h = x_[k + 1] - x_[k];
    const double a = (x_[k + 1] - t) / h;
    const double b = (t - x_[k]) / h;
    return a * y_[k] + b * y_[k + 1] + ((a * a * a - a) * m_[k] + (b * b * b - b) * m_[k + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_, m_;
};

/// Stationary planar front (y_s(z), theta_s(z)) on a uniform grid over [0, L].
struct FrontProfile {
  std::vector<double> grid_z;
  std::vector<double> ys;
  std::vector<double> thetas;
  double residual_norm = 0.0;
  int iterations = 0;
  ClampedSpline spline;

  double L() const { return grid_z.back(); }
};

namespace detail {

/// Max-norm of y'' - y^3 + (1 - gamma) y with ghost-point Neumann closure.
inline double front_residual(const std::vector<double>& y, double h, double gamma, std::vector<double>* out = nullptr) {
  const std::size_t n = y.size();
  const double c = 1.0 - gamma;
  double norm = 0.0;
  if (out) out->resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ym = k > 0 ? y[k - 1] : y[1];
    const double yp = k + 1 < n ? y[k + 1] : y[n - 2];
    const double f = (ym - 2.0 * y[k] + yp) / (h * h) - y[k] * y[k] * y[k] + c * y[k];
    if (out) (*out)[k] = f;
    norm = std::max(norm, std::abs(f));
  }
  return norm;
}

}  // namespace detail

/// Damped Newton on the central-difference discretization of
/// y'' = y^3 - (1 - gamma) y with no-flux ends, started from the infinite-line
/// kink sqrt(1-gamma) tanh(sqrt((1-gamma)/2) (z - L/2)).
inline FrontProfile solve_front(const ModelParams& params, int n_nodes = 401, double tol = 1e-10, int max_iter = 50) {
  if (params.gamma >= 1.0) throw std::invalid_argument("solve_front: gamma >= 1 has no bistable front");
  if (!(params.gamma >= 0.0)) throw std::invalid_argument("solve_front: gamma must be nonnegative");
  if (n_nodes < 64) throw std::invalid_argument("solve_front: n_nodes must be >= 64");
  if (!(params.L > 0)) throw std::invalid_argument("solve_front: L must be positive");

  const std::size_t n = static_cast<std::size_t>(n_nodes);
  const double L = params.L;
  const double h = L / static_cast<double>(n - 1);
  const double c = 1.0 - params.gamma;

  FrontProfile prof;
  prof.grid_z.resize(n);
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    prof.grid_z[k] = (k + 1 == n) ? L : h * static_cast<double>(k);
    y[k] = std::sqrt(c) * std::tanh(std::sqrt(c / 2.0) * (prof.grid_z[k] - L / 2.0));
  }

  std::vector<double> f, sub(n), diag(n), sup(n), dy(n);
  double res = detail::front_residual(y, h, params.gamma, &f);
  int it = 0;
  while (res > tol && it < max_iter) {
    ++it;
    const double ih2 = 1.0 / (h * h);
    for (std::size_t k = 0; k < n; ++k) {
      diag[k] = -2.0 * ih2 - 3.0 * y[k] * y[k] + c;
      sub[k] = k == 0 ? 0.0 : (k + 1 == n ? 2.0 * ih2 : ih2);
      sup[k] = k + 1 == n ? 0.0 : (k == 0 ? 2.0 * ih2 : ih2);
      dy[k] = -f[k];
    }
    // Thomas elimination; the Jacobian is diagonally dominant away from the
    // front, pivoting is unnecessary in practice.
    for (std::size_t k = 1; k < n; ++k) {
      const double w = sub[k] / diag[k - 1];
      diag[k] -= w * sup[k - 1];
      dy[k] -= w * dy[k - 1];
    }
    dy[n - 1] /= diag[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) dy[k] = (dy[k] - sup[k] * dy[k + 1]) / diag[k];

    double step = 1.0;
    std::vector<double> trial(n);
    double trial_res = 0.0;
    for (int halvings = 0; halvings < 30; ++halvings) {
      for (std::size_t k = 0; k < n; ++k) trial[k] = y[k] + step * dy[k];
      trial_res = detail::front_residual(trial, h, params.gamma);
      if (trial_res < res || step < 1e-6) break;
      step *= 0.5;
    }
    y.swap(trial);
    // The centred front is odd about L/2 on this symmetric grid. Newton
    // preserves that in exact arithmetic, but the near-null translation mode
    // amplifies rounding drift, so project back onto odd profiles.
    for (std::size_t k = 0; k <= (n - 1) / 2; ++k) {
      const double odd = 0.5 * (y[k] - y[n - 1 - k]);
      y[k] = odd;
      y[n - 1 - k] = -odd;
    }
    res = detail::front_residual(y, h, params.gamma, &f);
  }
  if (!(res <= tol)) {
    throw NumericalFailure("solve_front: Newton did not converge, residual " + std::to_string(res));
  }

  prof.ys = y;
  prof.thetas.resize(n);
  for (std::size_t k = 0; k < n; ++k) prof.thetas[k] = -params.gamma * y[k];
  prof.residual_norm = res;
  prof.iterations = it;
  prof.spline = ClampedSpline(prof.grid_z, prof.ys);
  return prof;
}

/// Profile from given node values (used for synthetic weights in tests and
/// for replaying stored profiles).
inline FrontProfile make_profile(std::vector<double> grid_z, std::vector<double> ys, double gamma) {
  FrontProfile prof;
  prof.grid_z = std::move(grid_z);
  prof.ys = std::move(ys);
  prof.thetas.resize(prof.ys.size());
  for (std::size_t k = 0; k < prof.ys.size(); ++k) prof.thetas[k] = -gamma * prof.ys[k];
  prof.spline = ClampedSpline(prof.grid_z, prof.ys);
  return prof;
}

struct FrontValue {
  double y;
  double theta;
};

inline FrontValue eval_front(const FrontProfile& profile, double gamma, double z) {
  const double y = profile.spline(z);
  return {y, -gamma * y};
}

/// Max-norm residual of the stationary 2-D system evaluated on the planar
/// profile (y_rr = 0): activator equation and inhibitor equation together.
inline double stationary_residual(const FrontProfile& profile, double gamma) {
  const auto& y = profile.ys;
  const std::size_t n = y.size();
  const double h = profile.grid_z[1] - profile.grid_z[0];
  double norm = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double ym = k > 0 ? y[k - 1] : y[1];
    const double yp = k + 1 < n ? y[k + 1] : y[n - 2];
    const double act = (ym - 2.0 * y[k] + yp) / (h * h) + eval_P(y[k], profile.thetas[k]);
    const double inh = eval_Q(y[k], profile.thetas[k], gamma);
    norm = std::max({norm, std::abs(act), std::abs(inh)});
  }
  return norm;
}

}  // namespace frontctl
