#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "frontctl/front_steady.hpp"
#include "frontctl/galerkin.hpp"
#include "frontctl/zeros.hpp"

namespace frontctl {

struct GainSelection {
  bool stabilizing = false;
  double k = 0.0;
  double abscissa = INFINITY;
  /// Stability interval around k, k_lo < k_hi <= 0. An endpoint whose
  /// *_bracketed flag is false coincides with the end of the scan range.
  double k_lo = 0.0;
  double k_hi = 0.0;
  bool lo_bracketed = false;
  bool hi_bracketed = false;
  std::vector<double> k_grid;
  std::vector<double> abscissa_curve;
};

/// A verified point-sensor feedback law lambda = k sum_d (M (w - w*))_d psi_d.
struct ControllerSpec {
  SensorSpec sensors;
  std::vector<ActuatorSpec> actuators;
  std::vector<double> set_points;  // y_s(L/2, r_d)
  double gain = 0.0;
  std::optional<Precompensator> precompensator;
  Complex leading_zero;
  double closed_loop_abscissa = 0.0;
  double k_lo = 0.0;
  double k_hi = 0.0;

  int eta() const { return sensors.count(); }
};

struct DesignOptions {
  double k_min = -100.0;
  double k_smallest = 1e-3;
  int gain_points = 200;
  DecouplingOptions decoupling{};
  int random_precompensator_draws = 200;
  std::uint64_t precompensator_seed = 7;
};

struct SolvabilityResult {
  bool solvable = true;
  std::vector<Complex> blocking;
  std::vector<Complex> decoupling_zeros;
};

namespace detail {

inline SolvabilityResult solvability_from(std::vector<Complex> zeros) {
  SolvabilityResult res;
  res.decoupling_zeros = std::move(zeros);
  for (auto z : res.decoupling_zeros)
    if (z.real() >= 0.0) res.blocking.push_back(z);
  res.solvable = res.blocking.empty();
  return res;
}

}  // namespace detail

/// No actuator choice can help when an output-decoupling zero sits in the
/// closed right half-plane.
inline SolvabilityResult check_output_solvability(const SpectralSystem& sys, const DecouplingOptions& opt = {}) {
  return detail::solvability_from(output_decoupling_zeros(sys.A, sys.H, opt));
}

/// Dual check for preassigned actuators: no sensor placement can help when an
/// input-decoupling zero sits in the closed right half-plane.
inline SolvabilityResult check_input_solvability(const SpectralSystem& sys, const DecouplingOptions& opt = {}) {
  return detail::solvability_from(input_decoupling_zeros(sys.A, sys.beta, opt));
}

inline double closed_loop_abscissa(const SpectralSystem& sys, double k, const std::optional<Precompensator>& M) {
  return spectral_abscissa(closed_loop_spectrum(sys, k, M));
}

/// Scans k log-spaced over [k_min, -k_smallest] and returns the gain with the
/// smallest closed-loop spectral abscissa (the gentlest gain among
/// round-off ties), provided that abscissa is negative.
inline GainSelection select_gain(const SpectralSystem& sys, const std::optional<Precompensator>& M = std::nullopt,
                                 const DesignOptions& opt = {}) {
  if (!(opt.k_min < 0.0) || !(opt.k_smallest > 0.0) || opt.k_smallest >= -opt.k_min || opt.gain_points < 2) {
    throw std::invalid_argument("select_gain: need k_min < -k_smallest < 0 and >= 2 points");
  }
  GainSelection sel;
  const double lo = std::log10(opt.k_smallest);
  const double hi = std::log10(-opt.k_min);
  const int n = opt.gain_points;
  sel.k_grid.resize(static_cast<std::size_t>(n));
  sel.abscissa_curve.resize(static_cast<std::size_t>(n));
  for (int g = 0; g < n; ++g) {
    const double k = -std::pow(10.0, lo + (hi - lo) * g / (n - 1));
    sel.k_grid[static_cast<std::size_t>(g)] = k;
    sel.abscissa_curve[static_cast<std::size_t>(g)] = closed_loop_abscissa(sys, k, M);
  }
  const double best = *std::min_element(sel.abscissa_curve.begin(), sel.abscissa_curve.end());
  if (!(best < 0.0)) {
    sel.abscissa = best;
    return sel;
  }
  std::size_t ib = 0;
  while (sel.abscissa_curve[ib] > best + 1e-9 * std::max(1.0, std::abs(best))) ++ib;
  sel.stabilizing = true;
  sel.k = sel.k_grid[ib];
  sel.abscissa = sel.abscissa_curve[ib];

  // Grid index increases with |k|: walk outward to the first unstable neighbours.
  std::size_t a = ib, b = ib;
  while (a > 0 && sel.abscissa_curve[a - 1] < 0.0) --a;
  while (b + 1 < sel.k_grid.size() && sel.abscissa_curve[b + 1] < 0.0) ++b;
  auto bisect = [&](double stable_k, double unstable_k) {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (stable_k + unstable_k);
      (closed_loop_abscissa(sys, mid, M) < 0.0 ? stable_k : unstable_k) = mid;
    }
    return stable_k;
  };
  sel.hi_bracketed = a > 0;
  sel.k_hi = sel.hi_bracketed ? bisect(sel.k_grid[a], sel.k_grid[a - 1]) : sel.k_grid[a];
  sel.lo_bracketed = b + 1 < sel.k_grid.size();
  sel.k_lo = sel.lo_bracketed ? bisect(sel.k_grid[b], sel.k_grid[b + 1]) : sel.k_grid[b];
  return sel;
}

enum class DesignFailure {
  None,
  OutputUnsolvable,    // unstable output-decoupling zero: relocate sensors
  InputUnsolvable,     // unstable input-decoupling zero: actuators cannot help
  PositiveLeadingZero, // leading finite zero not in the left half-plane
  SingularHBeta,
  InfiniteZeroCheck,   // no precompensator orients the asymptotes
  NoStabilizingGain,
  CandidatesExhausted,
};

inline const char* to_string(DesignFailure f) {
  switch (f) {
    case DesignFailure::None: return "none";
    case DesignFailure::OutputUnsolvable: return "output_unsolvable";
    case DesignFailure::InputUnsolvable: return "input_unsolvable";
    case DesignFailure::PositiveLeadingZero: return "positive_leading_zero";
    case DesignFailure::SingularHBeta: return "singular_H_beta";
    case DesignFailure::InfiniteZeroCheck: return "infinite_zero_check";
    case DesignFailure::NoStabilizingGain: return "no_stabilizing_gain";
    case DesignFailure::CandidatesExhausted: return "candidates_exhausted";
  }
  return "unknown";
}

/// Per-candidate record of the actuator search.
struct CandidateDiagnostic {
  std::vector<ActuatorSpec> actuators;
  std::optional<Complex> leading_zero;
  double det_h_beta = 0.0;
  DesignFailure outcome = DesignFailure::None;
};

struct DesignOutcome {
  std::optional<ControllerSpec> spec;
  DesignFailure failure = DesignFailure::None;
  std::string message;
  std::optional<Complex> leading_zero;
  std::vector<Complex> blocking_zeros;
  std::vector<CandidateDiagnostic> candidates;
  GainSelection gain;

  bool ok() const { return spec.has_value(); }
};

inline std::vector<double> set_points_for(const FrontProfile& profile, const ModelParams& params,
                                          const SensorSpec& sensors) {
  std::vector<double> out;
  for (std::size_t d = 0; d < sensors.r_positions.size(); ++d) out.push_back(profile.spline(params.L / 2.0));
  return out;
}

namespace detail {

inline ControllerSpec make_spec(const SpectralSystem& sys, const FrontProfile& profile, const GainSelection& gain,
                                const std::optional<Precompensator>& M, Complex lead) {
  ControllerSpec spec;
  spec.sensors = sys.sensors;
  spec.actuators = sys.actuators;
  spec.set_points = set_points_for(profile, sys.params, sys.sensors);
  spec.gain = gain.k;
  spec.precompensator = M;
  spec.leading_zero = lead;
  spec.closed_loop_abscissa = gain.abscissa;
  spec.k_lo = gain.k_lo;
  spec.k_hi = gain.k_hi;
  return spec;
}

inline bool h_beta_nonsingular(const SpectralSystem& sys, double* det_out) {
  const Eigen::MatrixXd G = sys.H * sys.beta;
  double hadamard = 1.0;
  for (Eigen::Index r = 0; r < G.rows(); ++r) hadamard *= G.row(r).norm();
  const double det = G.determinant();
  if (det_out) *det_out = det;
  return hadamard > 0.0 && std::abs(det) > 1e-12 * hadamard;
}

/// Identity, then permutation matrices, then seeded random draws.
inline std::optional<Precompensator> find_precompensator(const SpectralSystem& sys, const DesignOptions& opt) {
  const int eta = sys.eta_out();
  std::vector<int> perm(static_cast<std::size_t>(eta));
  for (int d = 0; d < eta; ++d) perm[static_cast<std::size_t>(d)] = d;
  do {
    Precompensator P{Eigen::MatrixXd::Zero(eta, eta)};
    for (int d = 0; d < eta; ++d) P.M(d, perm[static_cast<std::size_t>(d)]) = 1.0;
    if (infinite_zero_check(sys.H, sys.beta, P).pass) return P;
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::mt19937_64 rng(opt.precompensator_seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int t = 0; t < opt.random_precompensator_draws; ++t) {
    Precompensator P{Eigen::MatrixXd(eta, eta)};
    for (int r = 0; r < eta; ++r)
      for (int c = 0; c < eta; ++c) P.M(r, c) = dist(rng);
    if (!(std::abs(P.M.determinant()) > 1e-3)) continue;
    if (infinite_zero_check(sys.H, sys.beta, P).pass) return P;
  }
  return std::nullopt;
}

}  // namespace detail

/// Uniform actuator psi = 1 driven by one sensor at (L/2, r1).
inline DesignOutcome design_single_actuator(const ModelParams& params, const FrontProfile& profile,
                                            const SpectralBasis& basis, double r1, const DesignOptions& opt = {},
                                            const Eigen::MatrixXd* J_cached = nullptr) {
  if (!(r1 > 0.0 && r1 < params.R)) throw std::invalid_argument("design_single_actuator: r1 must lie in (0, R)");
  const SpectralSystem sys =
      assemble_system(params, profile, basis, SensorSpec{{r1}}, {ActuatorSpec::constant()}, J_cached);
  DesignOutcome out;
  const ZeroSet zs = finite_zeros(sys);
  if (!zs.empty()) out.leading_zero = zs.leading_zero();

  const SolvabilityResult solv = check_input_solvability(sys, opt.decoupling);
  if (!solv.solvable) {
    out.failure = DesignFailure::InputUnsolvable;
    out.blocking_zeros = solv.blocking;
    out.message = "unstable input-decoupling zero; a uniform actuator cannot stabilize this width";
    return out;
  }
  if (!out.leading_zero || out.leading_zero->real() >= 0.0) {
    out.failure = DesignFailure::PositiveLeadingZero;
    out.message = "leading finite zero is not in the left half-plane";
    return out;
  }
  const InfiniteZeroCheck inf = infinite_zero_check(sys.H, sys.beta);
  if (!inf.pass) {
    out.failure = inf.singular ? DesignFailure::SingularHBeta : DesignFailure::InfiniteZeroCheck;
    out.message = "h beta is not positive";
    return out;
  }
  out.gain = select_gain(sys, std::nullopt, opt);
  if (!out.gain.stabilizing) {
    out.failure = DesignFailure::NoStabilizingGain;
    out.message = "no stabilizing gain in range";
    return out;
  }
  out.spec = detail::make_spec(sys, profile, out.gain, std::nullopt, *out.leading_zero);
  return out;
}

/// First `count` basis modes, dropping the constant mode (duplicated by the
/// uniform actuator) and modes whose z-factor vanishes on z = L/2.
inline std::vector<ModeIndex> default_candidate_modes(const SpectralBasis& basis, int count = 12) {
  std::vector<ModeIndex> out;
  for (int e = 0; e < std::min(count, basis.size()); ++e) {
    const ModeIndex m = basis[e].mode;
    if (m.i == 1 && m.j == 1) continue;
    if (m.i % 2 == 0) continue;  // cos((i-1) pi / 2) = 0
    out.push_back(m);
  }
  return out;
}

/// Actuator 1 is uniform; actuators 2..eta iterate over ordered tuples drawn
/// from candidate_modes. The first tuple with a left-half-plane leading zero
/// and nonsingular H beta that also admits a precompensator and a
/// stabilizing gain is returned.
inline DesignOutcome search_actuators(const ModelParams& params, const FrontProfile& profile,
                                      const SpectralBasis& basis, const SensorSpec& sensors,
                                      const std::vector<ModeIndex>& candidate_modes, const DesignOptions& opt = {},
                                      const Eigen::MatrixXd* J_cached = nullptr) {
  sensors.validate(params.R);
  const int eta = sensors.count();
  if (eta < 2) throw std::invalid_argument("search_actuators: need at least two sensors");
  for (const auto& m : candidate_modes) {
    if (!basis.position(m)) throw std::invalid_argument("search_actuators: candidate " + m.to_string() +
                                                        " is outside the truncated basis");
  }
  DesignOutcome out;
  const Eigen::MatrixXd J = J_cached ? *J_cached : assemble_jacobian(profile, basis);
  const SpectralSystem base = assemble_system(params, profile, basis, sensors, {ActuatorSpec::constant()}, &J);

  const SolvabilityResult solv = check_output_solvability(base, opt.decoupling);
  if (!solv.solvable) {
    out.failure = DesignFailure::OutputUnsolvable;
    out.blocking_zeros = solv.blocking;
    out.message = "unstable output-decoupling zero; shift the sensors in r";
    return out;
  }

  const int slots = eta - 1;
  const int nc = static_cast<int>(candidate_modes.size());
  if (nc < slots) {
    out.failure = DesignFailure::CandidatesExhausted;
    out.message = "fewer candidate modes than space-dependent actuators";
    return out;
  }
  // Increasing index tuples in lexicographic order.
  std::vector<int> idx(static_cast<std::size_t>(slots));
  for (int s = 0; s < slots; ++s) idx[static_cast<std::size_t>(s)] = s;
  for (;;) {
    std::vector<ActuatorSpec> acts{ActuatorSpec::constant()};
    for (int s : idx) acts.push_back(ActuatorSpec::eigen_mode(candidate_modes[static_cast<std::size_t>(s)]));
    const SpectralSystem sys = with_actuators(base, acts);
    CandidateDiagnostic diag;
    diag.actuators = acts;
    const bool nonsingular = detail::h_beta_nonsingular(sys, &diag.det_h_beta);
    const ZeroSet zs = finite_zeros(sys);
    if (!zs.empty()) diag.leading_zero = zs.leading_zero();

    if (!nonsingular) {
      diag.outcome = DesignFailure::SingularHBeta;
    } else if (!diag.leading_zero || diag.leading_zero->real() >= 0.0) {
      diag.outcome = DesignFailure::PositiveLeadingZero;
    } else {
      const auto M = detail::find_precompensator(sys, opt);
      if (!M) {
        diag.outcome = DesignFailure::InfiniteZeroCheck;
      } else {
        const std::optional<Precompensator> Mopt = M->is_identity() ? std::nullopt : M;
        GainSelection gain = select_gain(sys, Mopt, opt);
        if (!gain.stabilizing) {
          diag.outcome = DesignFailure::NoStabilizingGain;
        } else {
          out.candidates.push_back(diag);
          out.leading_zero = diag.leading_zero;
          out.gain = gain;
          out.spec = detail::make_spec(sys, profile, gain, Mopt, *diag.leading_zero);
          return out;
        }
      }
    }
    out.candidates.push_back(diag);

    int s = slots - 1;
    while (s >= 0 && idx[static_cast<std::size_t>(s)] == nc - slots + s) --s;
    if (s < 0) break;
    ++idx[static_cast<std::size_t>(s)];
    for (int t = s + 1; t < slots; ++t) idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
  }
  out.failure = DesignFailure::CandidatesExhausted;
  out.message = "no candidate actuator set works for these sensors; shift the sensors in r";
  return out;
}

/// Two-actuator law: uniform actuator plus one eigenmode actuator.
inline DesignOutcome search_two_actuator(const ModelParams& params, const FrontProfile& profile,
                                         const SpectralBasis& basis, double r1, double r2,
                                         const std::vector<ModeIndex>& candidate_modes, const DesignOptions& opt = {},
                                         const Eigen::MatrixXd* J_cached = nullptr) {
  if (r1 == r2) throw std::invalid_argument("search_two_actuator: sensors must be distinct");
  return search_actuators(params, profile, basis, SensorSpec{{r1, r2}}, candidate_modes, opt, J_cached);
}

/// Default sensor layout for eta sensors: r_d = (eta + 1 - d) R / (eta + 1),
/// i.e. descending positions (R/2; 2R/3, R/3; ...).
inline SensorSpec default_sensors(double R, int eta) {
  SensorSpec s;
  for (int d = 1; d <= eta; ++d) s.r_positions.push_back(R * (eta + 1 - d) / (eta + 1));
  return s;
}

struct MinimalDesign {
  std::vector<DesignOutcome> attempts;  // by increasing eta
  const DesignOutcome* chosen() const {
    for (const auto& a : attempts)
      if (a.ok()) return &a;
    return nullptr;
  }
};

/// Escalates eta = 1, 2, ..., max_eta with default sensor layouts and stops at
/// the first success.
inline MinimalDesign design_minimal(const ModelParams& params, const FrontProfile& profile, const SpectralBasis& basis,
                                    int max_eta = 3, const DesignOptions& opt = {}) {
  MinimalDesign md;
  const Eigen::MatrixXd J = assemble_jacobian(profile, basis);
  md.attempts.push_back(design_single_actuator(params, profile, basis, params.R / 2.0, opt, &J));
  if (md.attempts.back().ok()) return md;
  const auto cands = default_candidate_modes(basis);
  for (int eta = 2; eta <= max_eta; ++eta) {
    md.attempts.push_back(search_actuators(params, profile, basis, default_sensors(params.R, eta), cands, opt, &J));
    if (md.attempts.back().ok()) break;
  }
  return md;
}

struct SpecVerification {
  bool lengths_match = false;
  bool leading_zero_negative = false;
  bool infinite_zero_pass = false;
  bool closed_loop_stable = false;
  double abscissa = 0.0;
  bool all() const { return lengths_match && leading_zero_negative && infinite_zero_pass && closed_loop_stable; }
};

/// Recomputes every ControllerSpec invariant from scratch on a freshly
/// assembled system.
inline SpecVerification verify_spec(const ModelParams& params, const FrontProfile& profile,
                                    const SpectralBasis& basis, const ControllerSpec& spec) {
  SpecVerification v;
  v.lengths_match = spec.actuators.size() == spec.sensors.r_positions.size() &&
                    spec.set_points.size() == spec.actuators.size() && !spec.actuators.empty();
  if (!v.lengths_match) return v;
  const SpectralSystem sys = assemble_system(params, profile, basis, spec.sensors, spec.actuators);
  const ZeroSet zs = finite_zeros(sys);
  v.leading_zero_negative = !zs.empty() && zs.leading_zero().real() < 0.0;
  v.infinite_zero_pass = infinite_zero_check(sys.H, sys.beta, spec.precompensator).pass;
  v.abscissa = closed_loop_abscissa(sys, spec.gain, spec.precompensator);
  v.closed_loop_stable = spec.gain < 0.0 && v.abscissa < 0.0;
  return v;
}

}  // namespace frontctl
