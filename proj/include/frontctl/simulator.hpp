#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "frontctl/design.hpp"
#include "frontctl/errors.hpp"
#include "frontctl/front_steady.hpp"
#include "frontctl/model.hpp"
#include "frontctl/spectral_basis.hpp"

namespace frontctl {

/// Node values on the tensor grid over [0, L] x [0, R], stored row-major with
/// one row per r node: index = ir * nz + iz.
struct Field2D {
  int nz = 0;
  int nr = 0;
  double L = 0.0;
  double R = 0.0;
  std::vector<double> y;
  std::vector<double> theta;

  Field2D() = default;
  Field2D(int nz_, int nr_, double L_, double R_)
      : nz(nz_), nr(nr_), L(L_), R(R_), y(static_cast<std::size_t>(nz_) * nr_, 0.0), theta(y.size(), 0.0) {
    if (nz < 3 || nr < 3) throw std::invalid_argument("Field2D: need at least 3 nodes per direction");
  }

  double dz() const { return L / (nz - 1); }
  double dr() const { return R / (nr - 1); }
  double z_at(int iz) const { return iz == nz - 1 ? L : iz * dz(); }
  double r_at(int ir) const { return ir == nr - 1 ? R : ir * dr(); }
  std::size_t index(int iz, int ir) const { return static_cast<std::size_t>(ir) * nz + iz; }

  bool all_finite() const {
    for (std::size_t k = 0; k < y.size(); ++k)
      if (!std::isfinite(y[k]) || !std::isfinite(theta[k])) return false;
    return true;
  }

  /// Bilinear interpolation of y.
  double sample_y(double z, double r) const {
    const double fz = std::clamp(z / dz(), 0.0, static_cast<double>(nz - 1));
    const double fr = std::clamp(r / dr(), 0.0, static_cast<double>(nr - 1));
    const int iz = std::min(static_cast<int>(fz), nz - 2);
    const int ir = std::min(static_cast<int>(fr), nr - 2);
    const double tz = fz - iz;
    const double tr = fr - ir;
    const double y00 = y[index(iz, ir)], y10 = y[index(iz + 1, ir)];
    const double y01 = y[index(iz, ir + 1)], y11 = y[index(iz + 1, ir + 1)];
    return (1 - tz) * (1 - tr) * y00 + tz * (1 - tr) * y10 + (1 - tz) * tr * y01 + tz * tr * y11;
  }
};

/// Zero-crossing curve r -> z_front(r), one entry per r row.
struct FrontCurve {
  std::vector<double> r;
  std::vector<double> z_front;
  std::vector<int> missing_rows;  // rows without a sign change
  double mean_displacement = 0.0;
  double max_deviation = 0.0;

  bool front_lost() const { return !missing_rows.empty(); }
};

/// Per row, the linearly interpolated sign change of y nearest to z = L/2.
/// If any row has no sign change the front has left the domain and
/// max_deviation is reported as L/2.
inline FrontCurve front_position(const Field2D& f) {
  FrontCurve c;
  const double mid = f.L / 2.0;
  double sum = 0.0;
  int valid = 0;
  for (int ir = 0; ir < f.nr; ++ir) {
    c.r.push_back(f.r_at(ir));
    double best = NAN;
    for (int iz = 0; iz + 1 < f.nz; ++iz) {
      const double a = f.y[f.index(iz, ir)];
      const double b = f.y[f.index(iz + 1, ir)];
      double zc;
      if (a == 0.0) {
        zc = f.z_at(iz);
      } else if ((a < 0.0) != (b < 0.0) && b != 0.0) {
        zc = f.z_at(iz) + (f.z_at(iz + 1) - f.z_at(iz)) * a / (a - b);
      } else {
        continue;
      }
      if (std::isnan(best) || std::abs(zc - mid) < std::abs(best - mid)) best = zc;
    }
    if (f.y[f.index(f.nz - 1, ir)] == 0.0) {
      const double zc = f.L;
      if (std::isnan(best) || std::abs(zc - mid) < std::abs(best - mid)) best = zc;
    }
    c.z_front.push_back(best);
    if (std::isnan(best)) {
      c.missing_rows.push_back(ir);
    } else {
      sum += best - mid;
      ++valid;
      c.max_deviation = std::max(c.max_deviation, std::abs(best - mid));
    }
  }
  c.mean_displacement = valid > 0 ? sum / valid : 0.0;
  if (c.front_lost()) c.max_deviation = mid;
  return c;
}

struct Perturbation {
  ModeIndex mode{1, 1};
  double amplitude = 0.0;
  /// Keep theta on the steady front instead of theta = -gamma y. Initial
  /// data on the nullcline theta = -gamma y are orthogonal to the unstable
  /// front mode (eigenvalue gamma - epsilon) at linear order; perturbing the
  /// activator alone excites it.
  bool activator_only = false;
};

/// Planar front replicated over r plus a cos((i-1) pi z / L) cos((j-1) pi r / R)
/// bump of the given peak amplitude on y; theta = -gamma y (or -gamma y_s
/// when only the activator is perturbed).
inline Field2D make_front_init(const FrontProfile& profile, const ModelParams& params, int nz, int nr,
                               Perturbation pert = {}) {
  if (std::abs(pert.amplitude) > 0.2) throw std::invalid_argument("make_front_init: |amplitude| must be <= 0.2");
  Field2D f(nz, nr, params.L, params.R);
  const double pi = std::numbers::pi;
  std::vector<double> ys(static_cast<std::size_t>(nz)), cz(static_cast<std::size_t>(nz));
  for (int iz = 0; iz < nz; ++iz) {
    ys[static_cast<std::size_t>(iz)] = profile.spline(f.z_at(iz));
    cz[static_cast<std::size_t>(iz)] = std::cos((pert.mode.i - 1) * pi * f.z_at(iz) / params.L);
  }
  for (int ir = 0; ir < nr; ++ir) {
    const double cr = std::cos((pert.mode.j - 1) * pi * f.r_at(ir) / params.R);
    for (int iz = 0; iz < nz; ++iz) {
      const std::size_t k = f.index(iz, ir);
      f.y[k] = ys[static_cast<std::size_t>(iz)] + pert.amplitude * cz[static_cast<std::size_t>(iz)] * cr;
      f.theta[k] = -params.gamma * (pert.activator_only ? ys[static_cast<std::size_t>(iz)] : f.y[k]);
    }
  }
  return f;
}

/// Spatially homogeneous field.
inline Field2D make_uniform_field(const ModelParams& params, int nz, int nr, double y, double theta) {
  Field2D f(nz, nr, params.L, params.R);
  std::fill(f.y.begin(), f.y.end(), y);
  std::fill(f.theta.begin(), f.theta.end(), theta);
  return f;
}

struct Trajectory {
  std::vector<double> times;
  std::vector<Field2D> snapshots;
  std::vector<FrontCurve> front_curves;
  /// control_history[s][c]: amplitude k (M (w - w*))_c of channel c at sample s.
  std::vector<std::vector<double>> control_history;
};

struct SimulationOptions {
  int sample_every = 1000;
  bool keep_snapshots = true;
  bool track_front = true;
};

namespace detail {

/// Ghost-point Neumann five-point Laplacian plus kinetics and control.
struct RhsEvaluator {
  const Field2D& shape;
  const ModelParams& params;
  const std::vector<std::vector<double>>& psi;

  void operator()(const std::vector<double>& y, const std::vector<double>& th, const std::vector<double>& amp,
                  std::vector<double>& dy, std::vector<double>& dth) const {
    const int nz = shape.nz;
    const int nr = shape.nr;
    const double iz2 = 1.0 / (shape.dz() * shape.dz());
    const double ir2 = 1.0 / (shape.dr() * shape.dr());
    const double eps = params.epsilon;
    const double gam = params.gamma;
    for (int ir = 0; ir < nr; ++ir) {
      const int rm = ir > 0 ? ir - 1 : 1;
      const int rp = ir + 1 < nr ? ir + 1 : nr - 2;
      const double* yc = y.data() + static_cast<std::size_t>(ir) * nz;
      const double* ym = y.data() + static_cast<std::size_t>(rm) * nz;
      const double* yp = y.data() + static_cast<std::size_t>(rp) * nz;
      const double* tc = th.data() + static_cast<std::size_t>(ir) * nz;
      double* out = dy.data() + static_cast<std::size_t>(ir) * nz;
      double* tout = dth.data() + static_cast<std::size_t>(ir) * nz;
      for (int iz = 0; iz < nz; ++iz) {
        const double left = iz > 0 ? yc[iz - 1] : yc[1];
        const double right = iz + 1 < nz ? yc[iz + 1] : yc[nz - 2];
        const double v = yc[iz];
        const double lap = (left - 2.0 * v + right) * iz2 + (ym[iz] - 2.0 * v + yp[iz]) * ir2;
        out[iz] = lap - v * v * v + v + tc[iz];
        tout[iz] = eps * (-gam * v - tc[iz]);
      }
    }
    for (std::size_t c = 0; c < amp.size(); ++c) {
      if (amp[c] == 0.0) continue;
      const double a = amp[c];
      const auto& shape_c = psi[c];
      for (std::size_t k = 0; k < dy.size(); ++k) dy[k] += a * shape_c[k];
    }
  }
};

}  // namespace detail

/// Method of lines with explicit RK4. When a controller is present, each
/// stage reads the sensors by bilinear interpolation at (L/2, r_d), mixes the
/// deviations through M and adds k sum_c u_c psi_c to the activator equation.
inline Trajectory simulate(const ModelParams& params, const std::optional<ControllerSpec>& controller,
                           const Field2D& init, double t_final, double dt, const SimulationOptions& opt = {}) {
  if (!(t_final > 0.0)) throw std::invalid_argument("simulate: t_final must be positive");
  const double h = std::min(init.dz(), init.dr());
  if (!(dt > 0.0) || dt > 0.2 * h * h) {
    throw std::invalid_argument("simulate: dt violates the explicit diffusion bound dt <= 0.2 min(dz, dr)^2");
  }
  if (std::abs(init.L - params.L) > 1e-12 * params.L || std::abs(init.R - params.R) > 1e-12 * params.R) {
    throw std::invalid_argument("simulate: field geometry does not match the model");
  }
  if (opt.sample_every < 1) throw std::invalid_argument("simulate: sample_every must be >= 1");

  const long n_steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
  const double step = t_final / static_cast<double>(n_steps);
  const std::size_t n = init.y.size();

  // Actuator shapes on the grid and channel mixing.
  std::vector<std::vector<double>> psi;
  Eigen::MatrixXd M;
  std::vector<double> sensor_r, set_points;
  double gain = 0.0;
  if (controller) {
    const auto& spec = *controller;
    if (spec.actuators.size() != spec.sensors.r_positions.size()) {
      throw std::invalid_argument("simulate: controller has mismatched sensor/actuator counts");
    }
    const int eta = spec.eta();
    M = spec.precompensator ? spec.precompensator->M : Eigen::MatrixXd::Identity(eta, eta);
    gain = spec.gain;
    sensor_r = spec.sensors.r_positions;
    set_points = spec.set_points;
    if (set_points.size() != sensor_r.size()) set_points.assign(sensor_r.size(), 0.0);
    for (const auto& act : spec.actuators) {
      std::vector<double> s(n, 1.0);
      if (!act.is_constant()) {
        const Eigenpair ep{act.mode, laplacian_eigenvalue(act.mode, params.L, params.R),
                           factor_norm(act.mode.i) * factor_norm(act.mode.j)};
        for (int ir = 0; ir < init.nr; ++ir)
          for (int iz = 0; iz < init.nz; ++iz)
            s[init.index(iz, ir)] = eval_eigenfunction(ep, params, init.z_at(iz), init.r_at(ir));
      }
      psi.push_back(std::move(s));
    }
  }

  Field2D cur = init;
  Field2D stage = init;
  std::vector<double> amp(psi.size(), 0.0);
  auto control_amplitudes = [&](const Field2D& f) {
    if (psi.empty()) return;
    Eigen::VectorXd dev(static_cast<Eigen::Index>(sensor_r.size()));
    for (std::size_t d = 0; d < sensor_r.size(); ++d) {
      dev(static_cast<Eigen::Index>(d)) = f.sample_y(params.L / 2.0, sensor_r[d]) - set_points[d];
    }
    const Eigen::VectorXd u = gain * (M * dev);
    for (std::size_t c = 0; c < amp.size(); ++c) amp[c] = u(static_cast<Eigen::Index>(c));
  };

  const detail::RhsEvaluator rhs{init, params, psi};
  std::vector<double> k1y(n), k1t(n), k2y(n), k2t(n), k3y(n), k3t(n), k4y(n), k4t(n);

  Trajectory traj;
  auto record = [&](double t) {
    traj.times.push_back(t);
    control_amplitudes(cur);
    traj.control_history.push_back(amp);
    if (opt.track_front) traj.front_curves.push_back(front_position(cur));
    if (opt.keep_snapshots) traj.snapshots.push_back(cur);
  };
  record(0.0);

  for (long s = 1; s <= n_steps; ++s) {
    control_amplitudes(cur);
    rhs(cur.y, cur.theta, amp, k1y, k1t);
    for (std::size_t k = 0; k < n; ++k) {
      stage.y[k] = cur.y[k] + 0.5 * step * k1y[k];
      stage.theta[k] = cur.theta[k] + 0.5 * step * k1t[k];
    }
    control_amplitudes(stage);
    rhs(stage.y, stage.theta, amp, k2y, k2t);
    for (std::size_t k = 0; k < n; ++k) {
      stage.y[k] = cur.y[k] + 0.5 * step * k2y[k];
      stage.theta[k] = cur.theta[k] + 0.5 * step * k2t[k];
    }
    control_amplitudes(stage);
    rhs(stage.y, stage.theta, amp, k3y, k3t);
    for (std::size_t k = 0; k < n; ++k) {
      stage.y[k] = cur.y[k] + step * k3y[k];
      stage.theta[k] = cur.theta[k] + step * k3t[k];
    }
    control_amplitudes(stage);
    rhs(stage.y, stage.theta, amp, k4y, k4t);
    const double w = step / 6.0;
    for (std::size_t k = 0; k < n; ++k) {
      cur.y[k] += w * (k1y[k] + 2.0 * (k2y[k] + k3y[k]) + k4y[k]);
      cur.theta[k] += w * (k1t[k] + 2.0 * (k2t[k] + k3t[k]) + k4t[k]);
    }
    const bool sample = s % opt.sample_every == 0 || s == n_steps;
    if ((sample || s % 64 == 0) && !cur.all_finite()) {
      throw NumericalFailure("simulate: non-finite state at step " + std::to_string(s));
    }
    if (sample) record(s == n_steps ? t_final : static_cast<double>(s) * step);
  }
  return traj;
}

/// Least-squares slope of log|v| against t over samples with t0 <= t <= t1.
inline double fit_growth_rate(const std::vector<double>& t, const std::vector<double>& v, double t0, double t1) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 0; k < t.size() && k < v.size(); ++k) {
    if (t[k] < t0 || t[k] > t1 || v[k] == 0.0) continue;
    const double ly = std::log(std::abs(v[k]));
    sx += t[k];
    sy += ly;
    sxx += t[k] * t[k];
    sxy += t[k] * ly;
    ++m;
  }
  if (m < 2) throw std::invalid_argument("fit_growth_rate: need at least two samples in the window");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace frontctl
