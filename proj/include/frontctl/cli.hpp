#pragma once

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "frontctl/config.hpp"
#include "frontctl/design.hpp"
#include "frontctl/errors.hpp"
#include "frontctl/front_steady.hpp"
#include "frontctl/galerkin.hpp"
#include "frontctl/scenarios.hpp"
#include "frontctl/simulator.hpp"
#include "frontctl/zeros.hpp"

namespace frontctl::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kNumericalFailure = 3,
  kDesignFailure = 4,
  kAcceptanceMismatch = 5,
};

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"spectrum", "steady",   "assemble", "zeros",
                                              "rootlocus", "design", "simulate", "reproduce"};
  return names;
}

/// Shortest round-trip representation, so reruns are byte-identical.
inline std::string num(double v) {
  if (v == 0.0) return "0";  // folds -0
  return fmt::format("{}", v);
}

/// Files are buffered in memory and written together at the end of a
/// command, so a failing command leaves no partial output.
class OutputSet {
 public:
  explicit OutputSet(std::string dir) : dir_(std::move(dir)) {}

  std::string& file(const std::string& name) { return files_[name]; }

  void csv_row(const std::string& name, const std::vector<std::string>& cells) {
    std::string& f = files_[name];
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) f += ',';
      f += cells[k];
    }
    f += '\n';
  }

  void matrix(const std::string& name, const Eigen::MatrixXd& M) {
    std::vector<std::string> head;
    for (Eigen::Index c = 0; c < M.cols(); ++c) head.push_back(fmt::format("c{}", c));
    csv_row(name, head);
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
      std::vector<std::string> row;
      for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(num(M(r, c)));
      csv_row(name, row);
    }
  }

  void complex_list(const std::string& name, const std::vector<Complex>& v) {
    csv_row(name, {"index", "re", "im"});
    for (std::size_t k = 0; k < v.size(); ++k) csv_row(name, {std::to_string(k), num(v[k].real()), num(v[k].imag())});
  }

  void json(const std::string& name, const nlohmann::json& j) { files_[name] = j.dump(2) + "\n"; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : files_) out.push_back(k);
    return out;
  }

  void flush() const {
    std::filesystem::create_directories(dir_);
    for (const auto& [name, content] : files_) {
      std::ofstream out(std::filesystem::path(dir_) / name, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + name);
      out << content;
    }
  }

 private:
  std::string dir_;
  std::map<std::string, std::string> files_;
};

inline nlohmann::json complex_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline nlohmann::json complex_list_json(const std::vector<Complex>& v) {
  auto j = nlohmann::json::array();
  for (auto z : v) j.push_back(complex_json(z));
  return j;
}

inline nlohmann::json spec_json(const ControllerSpec& s) {
  nlohmann::json j;
  j["sensors_r"] = s.sensors.r_positions;
  auto acts = nlohmann::json::array();
  for (const auto& a : s.actuators) acts.push_back(a.to_string());
  j["actuators"] = acts;
  j["set_points"] = s.set_points;
  j["gain"] = s.gain;
  if (s.precompensator) {
    auto M = nlohmann::json::array();
    for (Eigen::Index r = 0; r < s.precompensator->M.rows(); ++r) {
      auto row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < s.precompensator->M.cols(); ++c) row.push_back(s.precompensator->M(r, c));
      M.push_back(row);
    }
    j["precompensator"] = M;
  } else {
    j["precompensator"] = nullptr;
  }
  j["leading_zero"] = complex_json(s.leading_zero);
  j["closed_loop_abscissa"] = s.closed_loop_abscissa;
  j["stability_interval"] = {s.k_lo, s.k_hi};
  return j;
}

inline nlohmann::json outcome_json(const DesignOutcome& d) {
  nlohmann::json j;
  j["ok"] = d.ok();
  j["failure"] = to_string(d.failure);
  j["message"] = d.message;
  j["leading_zero"] = d.leading_zero ? complex_json(*d.leading_zero) : nlohmann::json(nullptr);
  j["blocking_zeros"] = complex_list_json(d.blocking_zeros);
  auto cands = nlohmann::json::array();
  for (const auto& c : d.candidates) {
    nlohmann::json cj;
    auto acts = nlohmann::json::array();
    for (const auto& a : c.actuators) acts.push_back(a.to_string());
    cj["actuators"] = acts;
    cj["leading_zero"] = c.leading_zero ? complex_json(*c.leading_zero) : nlohmann::json(nullptr);
    cj["det_h_beta"] = c.det_h_beta;
    cj["outcome"] = to_string(c.outcome);
    cands.push_back(cj);
  }
  j["candidates"] = cands;
  j["spec"] = d.spec ? spec_json(*d.spec) : nlohmann::json(nullptr);
  return j;
}

/// State shared by the commands: the validated config and the lazily solved
/// front.
class Session {
 public:
  Session(RunConfig cfg, std::ostream& log) : cfg_(std::move(cfg)), log_(log) {}

  const RunConfig& config() const { return cfg_; }
  std::ostream& log() { return log_; }

  const FrontProfile& profile() {
    if (!profile_) profile_ = solve_front(cfg_.model, cfg_.front_nodes);
    return *profile_;
  }

  SpectralBasis basis() const { return SpectralBasis(cfg_.model, cfg_.N); }

  SensorSpec sensors_or(int eta) const {
    return cfg_.sensors ? SensorSpec{*cfg_.sensors} : default_sensors(cfg_.model.R, eta);
  }

  std::vector<ActuatorSpec> actuators() const {
    if (cfg_.actuators) return *cfg_.actuators;
    const int eta = cfg_.sensors ? static_cast<int>(cfg_.sensors->size()) : 2;
    std::vector<ActuatorSpec> a{ActuatorSpec::constant()};
    // Uniform actuator plus the first transverse modes.
    for (int j = 2; static_cast<int>(a.size()) < eta; ++j) a.push_back(ActuatorSpec::eigen_mode({1, j}));
    return a;
  }

  SpectralSystem system() {
    const auto acts = actuators();
    return assemble_system(cfg_.model, profile(), basis(), sensors_or(static_cast<int>(acts.size())), acts);
  }

  /// Explicit sensors drive a fixed-eta search; otherwise the minimal design.
  DesignOutcome design() {
    const SpectralBasis b = basis();
    const DesignOptions opt = cfg_.design_options();
    if (cfg_.sensors) {
      const SensorSpec s{*cfg_.sensors};
      if (s.count() == 1) return design_single_actuator(cfg_.model, profile(), b, s.r_positions[0], opt);
      return search_actuators(cfg_.model, profile(), b, s, default_candidate_modes(b, cfg_.design.candidate_count),
                              opt);
    }
    const Eigen::MatrixXd J = assemble_jacobian(profile(), b);
    std::optional<DesignOutcome> last;
    DesignOutcome one = design_single_actuator(cfg_.model, profile(), b, cfg_.model.R / 2, opt, &J);
    if (one.ok() || cfg_.design.max_eta == 1) return one;
    const auto cands = default_candidate_modes(b, cfg_.design.candidate_count);
    for (int eta = 2; eta <= cfg_.design.max_eta; ++eta) {
      last = search_actuators(cfg_.model, profile(), b, default_sensors(cfg_.model.R, eta), cands, opt, &J);
      if (last->ok()) break;
    }
    return *last;
  }

 private:
  RunConfig cfg_;
  std::ostream& log_;
  std::optional<FrontProfile> profile_;
};

inline int cmd_spectrum(Session& s, OutputSet& out) {
  const SpectralBasis b = s.basis();
  out.csv_row("spectrum.csv", {"index", "i", "j", "eigenvalue"});
  for (int e = 0; e < b.size(); ++e)
    out.csv_row("spectrum.csv", {std::to_string(e), std::to_string(b[e].mode.i), std::to_string(b[e].mode.j),
                                 num(b[e].eigenvalue)});
  const auto ev = eigenvalues_of(open_loop_matrix(s.config().model, s.profile(), s.config().N));
  out.complex_list("open_loop_spectrum.csv", ev);
  s.log() << fmt::format("{} modes; open-loop spectral abscissa {:.6f}\n", b.size(), spectral_abscissa(ev));
  return kOk;
}

inline int cmd_steady(Session& s, OutputSet& out) {
  const FrontProfile& f = s.profile();
  out.csv_row("front_profile.csv", {"z", "y", "theta"});
  for (std::size_t k = 0; k < f.ys.size(); ++k)
    out.csv_row("front_profile.csv", {num(f.grid_z[k]), num(f.ys[k]), num(f.thetas[k])});
  nlohmann::json j;
  j["nodes"] = f.ys.size();
  j["iterations"] = f.iterations;
  j["residual_norm"] = f.residual_norm;
  j["y_left"] = f.ys.front();
  j["y_right"] = f.ys.back();
  j["stationary_residual"] = stationary_residual(f, s.config().model.gamma);
  out.json("steady_summary.json", j);
  s.log() << fmt::format("front converged in {} iterations, residual {:.3e}\n", f.iterations, f.residual_norm);
  return kOk;
}

inline int cmd_assemble(Session& s, OutputSet& out) {
  const SpectralSystem sys = s.system();
  out.matrix("J.csv", sys.J);
  out.matrix("A.csv", sys.A);
  out.matrix("beta.csv", sys.beta);
  out.matrix("H.csv", sys.H);
  out.csv_row("modes.csv", {"index", "i", "j", "eigenvalue"});
  for (int e = 0; e < sys.basis.size(); ++e)
    out.csv_row("modes.csv", {std::to_string(e), std::to_string(sys.basis[e].mode.i),
                              std::to_string(sys.basis[e].mode.j), num(sys.basis[e].eigenvalue)});
  s.log() << fmt::format("assembled {}x{} system with {} channels\n", sys.A.rows(), sys.A.cols(), sys.eta_in());
  return kOk;
}

inline int cmd_zeros(Session& s, OutputSet& out) {
  const SpectralSystem sys = s.system();
  const DesignOptions opt = s.config().design_options();
  const ZeroSet z = finite_zeros(sys);
  const auto in = input_decoupling_zeros(sys.A, sys.beta, opt.decoupling);
  const auto od = output_decoupling_zeros(sys.A, sys.H, opt.decoupling);
  const InfiniteZeroCheck inf = infinite_zero_check(sys.H, sys.beta, s.config().precompensator);
  out.complex_list("zeros.csv", z.finite_zeros);
  out.csv_row("decoupling_zeros.csv", {"kind", "re", "im"});
  for (auto v : in) out.csv_row("decoupling_zeros.csv", {"input", num(v.real()), num(v.imag())});
  for (auto v : od) out.csv_row("decoupling_zeros.csv", {"output", num(v.real()), num(v.imag())});
  nlohmann::json j;
  j["finite_zero_count"] = z.count();
  j["leading_zero"] = z.empty() ? nlohmann::json(nullptr) : complex_json(z.leading_zero());
  j["infinite_zero_check"] = {{"pass", inf.pass},
                              {"singular", inf.singular},
                              {"determinant", inf.determinant},
                              {"eigenvalues", complex_list_json(inf.eigenvalues)}};
  out.json("zeros_summary.json", j);
  s.log() << fmt::format("{} finite zeros", z.count());
  if (!z.empty()) s.log() << fmt::format(", leading {:.6f}{:+.6f}i", z.leading_zero().real(), z.leading_zero().imag());
  s.log() << fmt::format("; H beta check {}\n", inf.pass ? "passes" : "fails");
  return kOk;
}

inline std::vector<double> negative_gain_grid(double k_min, double k_smallest, int points) {
  std::vector<double> g{0.0};
  const double lo = std::log10(k_smallest), hi = std::log10(-k_min);
  for (int k = 0; k < points; ++k) g.push_back(-std::pow(10.0, lo + (hi - lo) * k / (points - 1)));
  return g;
}

inline int cmd_rootlocus(Session& s, OutputSet& out) {
  const SpectralSystem sys = s.system();
  const auto& rc = s.config().rootlocus;
  const RootLocus rl = root_locus(sys, negative_gain_grid(rc.k_min, rc.k_smallest, rc.points), s.config().precompensator);
  out.csv_row("rootlocus.csv", {"k", "branch", "re", "im"});
  for (const auto& p : rl.flatten())
    out.csv_row("rootlocus.csv", {num(p.k), std::to_string(p.branch), num(p.value.real()), num(p.value.imag())});
  out.csv_row("rootlocus_ambiguous.csv", {"k"});
  for (auto g : rl.ambiguous_steps) out.csv_row("rootlocus_ambiguous.csv", {num(rl.gains[g])});
  s.log() << fmt::format("{} branches over {} gains, {} ambiguous steps\n", rl.branches.size(), rl.gains.size(),
                         rl.ambiguous_steps.size());
  return kOk;
}

inline int cmd_design(Session& s, OutputSet& out) {
  const DesignOutcome d = s.design();
  out.json("design.json", outcome_json(d));
  if (!d.ok()) {
    s.log() << fmt::format("design failed: {} ({})\n", to_string(d.failure), d.message);
    return kDesignFailure;
  }
  s.log() << fmt::format("design with {} channel(s): gain {:.6g}, closed-loop abscissa {:.6f}\n", d.spec->eta(),
                         d.spec->gain, d.spec->closed_loop_abscissa);
  return kOk;
}

inline int cmd_simulate(Session& s, OutputSet& out) {
  const RunConfig& c = s.config();
  std::optional<ControllerSpec> spec;
  if (c.simulation.controlled) {
    const DesignOutcome d = s.design();
    out.json("design.json", outcome_json(d));
    if (!d.ok()) {
      s.log() << fmt::format("design failed: {} ({})\n", to_string(d.failure), d.message);
      return kDesignFailure;
    }
    spec = d.spec;
  }
  const Field2D init = make_front_init(s.profile(), c.model, c.simulation.nz, c.simulation.nr, c.simulation.perturbation);
  SimulationOptions opt;
  opt.sample_every = c.simulation.sample_every;
  opt.keep_snapshots = c.simulation.write_final_field;
  const Trajectory tr = simulate(c.model, spec, init, c.simulation.t_final, c.simulation_dt(c.model.L, c.model.R), opt);
  out.csv_row("front_summary.csv", {"t", "mean_displacement", "max_deviation", "front_lost"});
  out.csv_row("front_curves.csv", {"t", "r", "z_front"});
  out.csv_row("control.csv", {"t", "channel", "amplitude"});
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const FrontCurve& fc = tr.front_curves[k];
    out.csv_row("front_summary.csv",
                {num(tr.times[k]), num(fc.mean_displacement), num(fc.max_deviation), fc.front_lost() ? "1" : "0"});
    for (std::size_t r = 0; r < fc.r.size(); ++r)
      out.csv_row("front_curves.csv", {num(tr.times[k]), num(fc.r[r]), std::isnan(fc.z_front[r]) ? "nan" : num(fc.z_front[r])});
    for (std::size_t ch = 0; ch < tr.control_history[k].size(); ++ch)
      out.csv_row("control.csv", {num(tr.times[k]), std::to_string(ch), num(tr.control_history[k][ch])});
  }
  if (c.simulation.write_final_field) {
    const Field2D& f = tr.snapshots.back();
    out.csv_row("final_field.csv", {"z", "r", "y", "theta"});
    for (int ir = 0; ir < f.nr; ++ir)
      for (int iz = 0; iz < f.nz; ++iz)
        out.csv_row("final_field.csv", {num(f.z_at(iz)), num(f.r_at(ir)), num(f.y[f.index(iz, ir)]),
                                        num(f.theta[f.index(iz, ir)])});
  }
  s.log() << fmt::format("max front deviation {:.4g} -> {:.4g} at t = {:g}\n", tr.front_curves.front().max_deviation,
                         tr.front_curves.back().max_deviation, tr.times.back());
  return kOk;
}

inline int cmd_reproduce(Session& s, OutputSet& out) {
  using namespace scenarios;
  const RunConfig& c = s.config();
  const Context ctx(c.model, c.N, c.design_options());
  std::vector<CriterionResult> results;
  auto note = [&](const CriterionResult& r) {
    results.push_back(r);
    s.log() << format_line(r) << "\n";
  };

  std::vector<SpectrumRow> rows;
  note(check_open_loop_spectrum(ctx, &rows));
  out.csv_row("open_loop_sweep.csv", {"R", "real_nonnegative", "leading_complex_re", "leading_complex_im", "abscissa"});
  for (const auto& r : rows) {
    std::string vals;
    for (double v : r.real_nonnegative) vals += (vals.empty() ? "" : ";") + num(v);
    out.csv_row("open_loop_sweep.csv", {num(r.R), vals, r.leading_complex ? num(r.leading_complex->real()) : "nan",
                                        r.leading_complex ? num(r.leading_complex->imag()) : "nan", num(r.abscissa)});
  }

  ThresholdScan th;
  note(check_transverse_threshold(ctx, &th));
  out.csv_row("transverse_scan.csv", {"R", "leading_complex_re"});
  for (std::size_t k = 0; k < th.R.size(); ++k) out.csv_row("transverse_scan.csv", {num(th.R[k]), num(th.leading_complex_re[k])});

  SisoScan siso;
  note(check_siso_critical_width(ctx, &siso));
  out.csv_row("siso_scan.csv", {"R", "leading_zero_re", "leading_zero_im"});
  for (std::size_t k = 0; k < siso.R.size(); ++k)
    out.csv_row("siso_scan.csv", {num(siso.R[k]), num(siso.leading_zero[k].real()), num(siso.leading_zero[k].imag())});

  std::vector<TwoActuatorRow> two;
  note(check_two_actuator(ctx, &two));
  out.csv_row("two_actuator_scan.csv", {"R", "ok", "mode", "leading_zero_re", "leading_zero_im", "precompensated", "gain"});
  for (const auto& r : two)
    out.csv_row("two_actuator_scan.csv",
                {num(r.R), r.ok ? "1" : "0", r.mode ? r.mode->to_string() : "none",
                 r.leading_zero ? num(r.leading_zero->real()) : "nan", r.leading_zero ? num(r.leading_zero->imag()) : "nan",
                 r.precompensated ? "1" : "0", num(r.gain)});

  note(check_precompensator(ctx));

  if (c.reproduce.simulations) {
    const GridSpec grid{c.simulation.nz, c.simulation.nr};
    ClosedLoopRuns runs;
    note(check_closed_loop(ctx, grid, c.simulation.t_final, &runs));
    auto trace = [&](const std::string& name, const std::optional<RunSummary>& r) {
      if (!r) return;
      out.csv_row(name, {"t", "mean_displacement", "max_deviation"});
      for (std::size_t k = 0; k < r->times.size(); ++k)
        out.csv_row(name, {num(r->times[k]), num(r->mean_displacement[k]), num(r->max_deviation[k])});
    };
    trace("sim_siso_controlled.csv", runs.siso_controlled);
    trace("sim_siso_uncontrolled.csv", runs.siso_uncontrolled);
    trace("sim_two_actuator_controlled.csv", runs.two_controlled);
    GrowthMeasurement gm;
    note(check_linear_consistency(ctx, grid, &gm));
    trace("sim_growth.csv", gm.run);
  }

  std::string& rep = out.file("reproduce_report.txt");
  rep += fmt::format("Planar front scenario: L = {:g}, gamma = {:g}, epsilon = {:g}, N = {}\n", c.model.L,
                     c.model.gamma, c.model.epsilon, c.N);
  if (siso.R_star) rep += fmt::format("R_cr estimate (single actuator, centred sensor): {:.3f}\n", *siso.R_star);
  bool all = true;
  for (const auto& r : results) {
    rep += format_line(r) + "\n";
    all = all && r.pass;
  }
  rep += fmt::format("{} of {} criteria passed\n",
                     std::count_if(results.begin(), results.end(), [](const CriterionResult& r) { return r.pass; }),
                     results.size());
  return all ? kOk : kAcceptanceMismatch;
}

/// Runs one subcommand; maps error classes to exit codes. Output files are
/// written only after the command finished (including design and acceptance
/// failures, whose reports are themselves the output).
inline int run(const std::string& subcommand, const std::string& config_path, std::ostream& log, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  Session session(cfg, log);
  OutputSet out(cfg.output_dir);
  try {
    int code = kUsage;
    if (subcommand == "spectrum") code = cmd_spectrum(session, out);
    else if (subcommand == "steady") code = cmd_steady(session, out);
    else if (subcommand == "assemble") code = cmd_assemble(session, out);
    else if (subcommand == "zeros") code = cmd_zeros(session, out);
    else if (subcommand == "rootlocus") code = cmd_rootlocus(session, out);
    else if (subcommand == "design") code = cmd_design(session, out);
    else if (subcommand == "simulate") code = cmd_simulate(session, out);
    else if (subcommand == "reproduce") code = cmd_reproduce(session, out);
    else {
      err << "unknown subcommand '" << subcommand << "'\n";
      return kUsage;
    }
    out.flush();
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace frontctl::cli
