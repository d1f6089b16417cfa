#pragma once

// The planar-front scenario suite: open-loop spectra over the width R, the
// single-actuator critical width, the two-actuator design, precompensation,
// and nonlinear closed-loop verification. Shared by the `reproduce` command
// and the acceptance test.

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "frontctl/design.hpp"
#include "frontctl/front_steady.hpp"
#include "frontctl/galerkin.hpp"
#include "frontctl/simulator.hpp"
#include "frontctl/zeros.hpp"

namespace frontctl::scenarios {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

inline std::string format_line(const CriterionResult& r) {
  return fmt::format("[{}] criterion {:>2} {}: {}", r.pass ? "PASS" : "FAIL", r.id, r.name, r.detail);
}

struct Context {
  ModelParams base{};  // R is overridden per scenario
  int N = 23;
  FrontProfile profile;
  DesignOptions options{};

  explicit Context(ModelParams p = {}, int n_modes = 23, DesignOptions opt = {})
      : base(p), N(n_modes), profile(solve_front(p)), options(opt) {}

  ModelParams at(double R) const { return base.with_width(R); }
};

/// R grid a, a + h, ..., b built from integer steps.
inline std::vector<double> width_grid(double a, double b, double h) {
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((b - a) / h + 1e-9));
  for (int k = 0; k <= n; ++k) out.push_back(std::round((a + k * h) * 1e10) / 1e10);
  return out;
}

inline bool is_real(Complex z) { return std::abs(z.imag()) <= 1e-8 * std::max(1.0, std::abs(z)); }

/// Linear-interpolated sign changes of f sampled on x.
struct SignChange {
  double x;
  bool upward;  // negative to nonnegative
};

inline std::vector<SignChange> sign_changes(const std::vector<double>& x, const std::vector<double>& f) {
  std::vector<SignChange> out;
  for (std::size_t k = 1; k < x.size(); ++k) {
    const bool a = f[k - 1] >= 0.0, b = f[k] >= 0.0;
    if (a == b) continue;
    const double t = f[k - 1] / (f[k - 1] - f[k]);
    out.push_back({x[k - 1] + t * (x[k] - x[k - 1]), b});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Open-loop spectrum

struct SpectrumRow {
  double R = 0.0;
  std::vector<double> real_nonnegative;  // descending
  std::optional<Complex> leading_complex;
  double abscissa = 0.0;
};

inline SpectrumRow open_loop_row(const Context& ctx, double R) {
  const ModelParams p = ctx.at(R);
  const auto ev = eigenvalues_of(open_loop_matrix(p, ctx.profile, ctx.N));
  SpectrumRow row;
  row.R = R;
  row.abscissa = spectral_abscissa(ev);
  for (auto z : ev) {
    if (is_real(z)) {
      if (z.real() >= 0.0) row.real_nonnegative.push_back(z.real());
    } else if (!row.leading_complex || z.real() > row.leading_complex->real()) {
      row.leading_complex = z.imag() < 0.0 ? std::conj(z) : z;
    }
  }
  std::sort(row.real_nonnegative.rbegin(), row.real_nonnegative.rend());
  return row;
}

inline CriterionResult check_open_loop_spectrum(const Context& ctx, std::vector<SpectrumRow>* rows = nullptr) {
  CriterionResult res{1, "open-loop spectrum", true, ""};
  std::string bad;
  for (double R : {2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0}) {
    const SpectrumRow row = open_loop_row(ctx, R);
    if (rows) rows->push_back(row);
    const auto& v = row.real_nonnegative;
    const bool ok = v.size() == 2 && v[0] >= 0.32 && v[0] <= 0.38 && v[1] >= -0.02 && v[1] <= 0.02;
    if (!ok) {
      res.pass = false;
      std::string vals;
      for (double x : v) vals += fmt::format("{}{:.4f}", vals.empty() ? "" : ",", x);
      bad += fmt::format(" R={:g}:[{}]", R, vals);
    }
  }
  res.detail = res.pass ? "two real nonnegative eigenvalues, larger in [0.32,0.38], smaller in [-0.02,0.02], for R=2..8"
                        : "out of band at" + bad;
  return res;
}

struct ThresholdScan {
  std::vector<double> R;
  std::vector<double> leading_complex_re;
  std::vector<SignChange> crossings;
};

inline CriterionResult check_transverse_threshold(const Context& ctx, ThresholdScan* out = nullptr) {
  ThresholdScan scan;
  scan.R = width_grid(2.0, 8.0, 0.1);
  for (double R : scan.R) {
    const SpectrumRow row = open_loop_row(ctx, R);
    scan.leading_complex_re.push_back(row.leading_complex ? row.leading_complex->real() : -INFINITY);
  }
  scan.crossings = sign_changes(scan.R, scan.leading_complex_re);
  CriterionResult res{2, "transverse instability threshold", !scan.crossings.empty(), ""};
  std::string xs;
  for (const auto& c : scan.crossings) {
    if (c.x < 5.4 || c.x > 5.8) res.pass = false;
    xs += fmt::format("{}{:.3f}", xs.empty() ? "" : ",", c.x);
  }
  res.detail = fmt::format("sign changes of the leading complex pair at R = [{}], window [5.4,5.8]", xs);
  if (out) *out = std::move(scan);
  return res;
}

// ---------------------------------------------------------------------------
// Single actuator

struct SisoScan {
  std::vector<double> R;
  std::vector<Complex> leading_zero;
  std::optional<double> R_star;
  std::vector<double> designed_R;
  std::vector<double> designed_abscissa;
};

inline Complex siso_leading_zero(const Context& ctx, double R) {
  const ModelParams p = ctx.at(R);
  const SpectralBasis basis(p, ctx.N);
  const SpectralSystem sys = assemble_system(p, ctx.profile, basis, SensorSpec{{R / 2}}, {ActuatorSpec::constant()});
  return finite_zeros(sys).leading_zero();
}

inline CriterionResult check_siso_critical_width(const Context& ctx, SisoScan* out = nullptr) {
  SisoScan scan;
  scan.R = width_grid(2.0, 8.0, 0.1);
  std::vector<double> re;
  for (double R : scan.R) {
    scan.leading_zero.push_back(siso_leading_zero(ctx, R));
    re.push_back(scan.leading_zero.back().real());
  }
  for (const auto& c : sign_changes(scan.R, re))
    if (c.upward) {
      scan.R_star = c.x;
      break;
    }
  CriterionResult res{3, "single-actuator critical width", false, ""};
  if (!scan.R_star) {
    res.detail = "leading zero never crosses into the right half-plane on [2,8]";
  } else {
    bool designs_ok = true;
    std::string bad;
    for (double R : scan.R) {
      if (R >= *scan.R_star) break;
      const ModelParams p = ctx.at(R);
      const SpectralBasis basis(p, ctx.N);
      const DesignOutcome d = design_single_actuator(p, ctx.profile, basis, R / 2, ctx.options);
      const bool ok = d.ok() && d.spec->closed_loop_abscissa < 0.0;
      scan.designed_R.push_back(R);
      scan.designed_abscissa.push_back(d.ok() ? d.spec->closed_loop_abscissa : NAN);
      if (!ok) {
        designs_ok = false;
        bad += fmt::format(" R={:g}({})", R, to_string(d.failure));
      }
    }
    res.pass = *scan.R_star >= 5.3 && *scan.R_star <= 5.7 && designs_ok;
    res.detail = fmt::format("R* = {:.3f} (window [5.3,5.7]); {} designs below R* {}", *scan.R_star,
                             scan.designed_R.size(), designs_ok ? "all stable" : "failed at" + bad);
  }
  if (out) *out = std::move(scan);
  return res;
}

// ---------------------------------------------------------------------------
// Two actuators

struct TwoActuatorRow {
  double R = 0.0;
  bool ok = false;
  std::optional<ModeIndex> mode;
  std::optional<Complex> leading_zero;
  bool precompensated = false;
  double gain = 0.0;
};

inline DesignOutcome two_actuator_design(const Context& ctx, double R) {
  const ModelParams p = ctx.at(R);
  const SpectralBasis basis(p, ctx.N);
  return search_two_actuator(p, ctx.profile, basis, 2 * R / 3, R / 3, default_candidate_modes(basis), ctx.options);
}

inline CriterionResult check_two_actuator(const Context& ctx, std::vector<TwoActuatorRow>* rows = nullptr) {
  CriterionResult res{4, "two-actuator design", true, ""};
  bool hit = false;
  double best_re = NAN, best_R = NAN;
  std::string bad;
  for (double R : width_grid(6.8, 9.5, 0.1)) {
    const DesignOutcome d = two_actuator_design(ctx, R);
    TwoActuatorRow row;
    row.R = R;
    row.ok = d.ok();
    if (d.ok()) {
      row.mode = d.spec->actuators[1].mode;
      row.leading_zero = d.spec->leading_zero;
      row.precompensated = d.spec->precompensator.has_value();
      row.gain = d.spec->gain;
    }
    if (rows) rows->push_back(row);
    if (!d.ok() || !(row.mode == ModeIndex{1, 2})) {
      res.pass = false;
      bad += fmt::format(" R={:g}", R);
      continue;
    }
    const double re = row.leading_zero->real();
    if (re >= -0.15 && re <= -0.06) {
      if (!hit || std::abs(re + 0.1024) < std::abs(best_re + 0.1024)) {
        best_re = re;
        best_R = R;
      }
      hit = true;
    }
  }
  res.pass = res.pass && hit;
  res.detail = hit ? fmt::format("mode (1,2) selected on [6.8,9.5]; leading zero {:.4f} at R = {:g}", best_re, best_R)
                   : "no leading zero in [-0.15,-0.06]";
  if (!bad.empty()) res.detail += "; (1,2) not selected at" + bad;
  return res;
}

inline CriterionResult check_precompensator(const Context& ctx) {
  const double R = 8.0;
  const ModelParams p = ctx.at(R);
  const SpectralBasis basis(p, ctx.N);
  const DesignOutcome d = two_actuator_design(ctx, R);
  CriterionResult res{5, "precompensator", false, ""};
  if (!d.ok()) {
    res.detail = "two-actuator design failed at R = 8";
    return res;
  }
  const SpectralSystem sys = assemble_system(p, ctx.profile, basis, d.spec->sensors, d.spec->actuators);
  const InfiniteZeroCheck id = infinite_zero_check(sys.H, sys.beta);
  const InfiniteZeroCheck sw = infinite_zero_check(sys.H, sys.beta, Precompensator::swap2());
  res.pass = !id.pass && sw.pass;
  auto eig = [](const InfiniteZeroCheck& c) {
    std::string s;
    for (auto z : c.eigenvalues) s += fmt::format("{}{:.4f}", s.empty() ? "" : ",", z.real());
    return s;
  };
  res.detail = fmt::format("r1 = {:.3f} > r2 = {:.3f}: M = I {} (eig [{}]), M = swap {} (eig [{}])", 2 * R / 3, R / 3,
                           id.pass ? "passes" : "fails", eig(id), sw.pass ? "passes" : "fails", eig(sw));
  return res;
}

// ---------------------------------------------------------------------------
// Nonlinear simulations

struct GridSpec {
  int nz = 201;
  int nr = 81;
};

struct RunSummary {
  std::vector<double> times;
  std::vector<double> max_deviation;
  std::vector<double> mean_displacement;
  double initial() const { return max_deviation.front(); }
  double final() const { return max_deviation.back(); }
};

inline RunSummary run_front(const ModelParams& p, const FrontProfile& profile, const std::optional<ControllerSpec>& spec,
                            Perturbation pert, double t_final, const GridSpec& grid) {
  const Field2D init = make_front_init(profile, p, grid.nz, grid.nr, pert);
  const double h = std::min(init.dz(), init.dr());
  const double dt = 0.1 * h * h;
  SimulationOptions opt;
  opt.sample_every = std::max(1, static_cast<int>(std::lround(1.0 / dt)));
  opt.keep_snapshots = false;
  const Trajectory tr = simulate(p, spec, init, t_final, dt, opt);
  RunSummary s;
  s.times = tr.times;
  for (const auto& c : tr.front_curves) {
    s.max_deviation.push_back(c.max_deviation);
    s.mean_displacement.push_back(c.mean_displacement);
  }
  return s;
}

struct ClosedLoopRuns {
  std::optional<RunSummary> siso_controlled, siso_uncontrolled, two_controlled;
};

inline CriterionResult check_closed_loop(const Context& ctx, const GridSpec& grid = {}, double t_final = 100.0,
                                         ClosedLoopRuns* out = nullptr) {
  CriterionResult res{9, "nonlinear closed-loop verification", false, ""};
  ClosedLoopRuns runs;

  const ModelParams p4 = ctx.at(4.0);
  const SpectralBasis b4(p4, ctx.N);
  const DesignOutcome siso = design_single_actuator(p4, ctx.profile, b4, 2.0, ctx.options);
  const DesignOutcome two = two_actuator_design(ctx, 8.0);
  if (!siso.ok() || !two.ok()) {
    res.detail = "design failed before simulation";
    return res;
  }
  const Perturbation bump11{{1, 1}, 0.05};
  const Perturbation bump12{{1, 2}, 0.05};
  runs.siso_controlled = run_front(p4, ctx.profile, siso.spec, bump11, t_final, grid);
  runs.siso_uncontrolled = run_front(p4, ctx.profile, std::nullopt, bump11, t_final, grid);
  runs.two_controlled = run_front(ctx.at(8.0), ctx.profile, two.spec, bump12, t_final, grid);

  const double a = runs.siso_controlled->final() / runs.siso_controlled->initial();
  const double u = runs.siso_uncontrolled->final() / runs.siso_uncontrolled->initial();
  const double b = runs.two_controlled->final() / runs.two_controlled->initial();
  res.pass = a <= 0.1 && u >= 2.0 && b <= 0.1;
  res.detail = fmt::format(
      "t = {:g}: R=4 single actuator {:.3g}x (<= 0.1), uncontrolled {:.3g}x (>= 2), R=8 two actuators {:.3g}x (<= 0.1)",
      t_final, a, u, b);
  if (out) *out = std::move(runs);
  return res;
}

struct GrowthMeasurement {
  double simulated_rate = 0.0;
  double eigenvalue = 0.0;
  RunSummary run;
};

inline CriterionResult check_linear_consistency(const Context& ctx, const GridSpec& grid = {},
                                                GrowthMeasurement* out = nullptr) {
  const ModelParams p = ctx.at(4.0);
  GrowthMeasurement m;
  m.eigenvalue = spectral_abscissa(eigenvalues_of(open_loop_matrix(p, ctx.profile, ctx.N)));
  Perturbation pert{{1, 1}, 1e-3};
  pert.activator_only = true;
  m.run = run_front(p, ctx.profile, std::nullopt, pert, 12.0, grid);
  m.simulated_rate = fit_growth_rate(m.run.times, m.run.mean_displacement, 4.0, 12.0);
  const double rel = std::abs(m.simulated_rate - m.eigenvalue) / std::abs(m.eigenvalue);
  CriterionResult res{10, "linear/nonlinear consistency", rel <= 0.15, ""};
  res.detail = fmt::format("simulated growth {:.4f} vs leading eigenvalue {:.4f} ({:.1f}% relative, limit 15%)",
                           m.simulated_rate, m.eigenvalue, 100 * rel);
  if (out) *out = std::move(m);
  return res;
}

}  // namespace frontctl::scenarios
