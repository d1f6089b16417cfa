#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "frontctl/design.hpp"
#include "frontctl/errors.hpp"
#include "frontctl/galerkin.hpp"
#include "frontctl/model.hpp"
#include "frontctl/simulator.hpp"
#include "frontctl/zeros.hpp"

namespace frontctl {

struct DesignConfig {
  int max_eta = 3;
  int candidate_count = 12;
  double k_min = -100.0;
  double k_smallest = 1e-3;
  int gain_points = 200;
};

struct RootLocusConfig {
  double k_min = -100.0;
  double k_smallest = 1e-3;
  int points = 121;
};

struct SimulationConfig {
  int nz = 201;
  int nr = 81;
  double t_final = 100.0;
  std::optional<double> dt;  // default 0.1 min(dz, dr)^2
  int sample_every = 1000;
  Perturbation perturbation{{1, 1}, 0.05};
  bool controlled = true;  // use the minimal design
  bool write_final_field = false;
};

struct ReproduceConfig {
  bool simulations = true;
};

/// Every tunable of a command-line run. Defaults are the planar-front
/// scenario: L = 20, R = 8, gamma = 0.45, epsilon = 0.1, N = 23.
struct RunConfig {
  ModelParams model{};
  int N = 23;
  int front_nodes = 401;
  std::optional<std::vector<double>> sensors;
  std::optional<std::vector<ActuatorSpec>> actuators;
  std::optional<Precompensator> precompensator;
  DesignConfig design{};
  RootLocusConfig rootlocus{};
  SimulationConfig simulation{};
  ReproduceConfig reproduce{};
  std::uint64_t seed = 20240607;
  std::string output_dir = "frontctl_out";

  DesignOptions design_options() const {
    DesignOptions o;
    o.k_min = design.k_min;
    o.k_smallest = design.k_smallest;
    o.gain_points = design.gain_points;
    o.decoupling.seed = seed;
    o.precompensator_seed = seed + 1;
    return o;
  }

  double simulation_dt(double L, double R) const {
    if (simulation.dt) return *simulation.dt;
    const double h = std::min(L / (simulation.nz - 1), R / (simulation.nr - 1));
    return 0.1 * h * h;
  }

  /// Cross-field checks; throws ConfigError naming the offending field.
  void validate() const {
    try {
      model.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
    if (N < 1 || N > 400) throw ConfigError("N must be in [1, 400]");
    if (front_nodes < 64 || front_nodes > 100001) throw ConfigError("front_nodes must be in [64, 100001]");
    if (sensors) {
      try {
        SensorSpec{*sensors}.validate(model.R);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("sensors: ") + e.what());
      }
    }
    if (actuators) {
      if (actuators->empty()) throw ConfigError("actuators must not be empty");
      const SpectralBasis basis(model, N);
      for (const auto& a : *actuators)
        if (!a.is_constant() && !basis.position(a.mode))
          throw ConfigError("actuators: mode " + a.mode.to_string() + " is outside the N-mode basis");
      if (sensors && sensors->size() != actuators->size())
        throw ConfigError("sensors and actuators must have the same length");
    }
    if (precompensator) {
      try {
        precompensator->validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("precompensator: ") + e.what());
      }
      const std::size_t eta = actuators ? actuators->size() : (sensors ? sensors->size() : 0);
      if (eta != 0 && static_cast<std::size_t>(precompensator->M.rows()) != eta)
        throw ConfigError("precompensator size does not match the number of channels");
    }
    if (design.max_eta < 1 || design.max_eta > 3) throw ConfigError("design.max_eta must be 1, 2 or 3");
    if (design.candidate_count < 1) throw ConfigError("design.candidate_count must be positive");
    if (!(design.k_min < 0.0) || !(design.k_smallest > 0.0) || design.k_smallest >= -design.k_min)
      throw ConfigError("design: need k_min < -k_smallest < 0");
    if (design.gain_points < 2) throw ConfigError("design.gain_points must be >= 2");
    if (!(rootlocus.k_min < 0.0) || !(rootlocus.k_smallest > 0.0) || rootlocus.k_smallest >= -rootlocus.k_min)
      throw ConfigError("rootlocus: need k_min < -k_smallest < 0");
    if (rootlocus.points < 2) throw ConfigError("rootlocus.points must be >= 2");
    const auto& s = simulation;
    if (s.nz < 5 || s.nr < 5) throw ConfigError("simulation: nz and nr must be >= 5");
    if (!(s.t_final > 0.0)) throw ConfigError("simulation.t_final must be positive");
    if (s.sample_every < 1) throw ConfigError("simulation.sample_every must be >= 1");
    if (std::abs(s.perturbation.amplitude) > 0.2) throw ConfigError("simulation.perturbation.amplitude must be <= 0.2");
    if (s.perturbation.mode.i < 1 || s.perturbation.mode.j < 1) throw ConfigError("simulation.perturbation.mode must be >= (1,1)");
    const double h = std::min(model.L / (s.nz - 1), model.R / (s.nr - 1));
    if (s.dt && (!(*s.dt > 0.0) || *s.dt > 0.2 * h * h))
      throw ConfigError("simulation.dt violates dt <= 0.2 min(dz, dr)^2");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + it.key() + "'");
}

inline double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError(key + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(key + " must be finite");
  return v;
}

inline int get_int(const json& j, const std::string& key) {
  if (!j.is_number_integer()) throw ConfigError(key + " must be an integer");
  return j.get<int>();
}

inline bool get_bool(const json& j, const std::string& key) {
  if (!j.is_boolean()) throw ConfigError(key + " must be true or false");
  return j.get<bool>();
}

inline ModeIndex get_mode(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw ConfigError(key + " must be a pair of integers [i, j]");
  const ModeIndex m{j[0].get<int>(), j[1].get<int>()};
  if (m.i < 1 || m.j < 1) throw ConfigError(key + " indices start at 1");
  return m;
}

}  // namespace detail

/// Strict decoding: unknown keys and wrong types are rejected.
inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::get_bool;
  using detail::get_int;
  using detail::get_number;
  RunConfig c;
  detail::reject_unknown(j, "", {"model", "N", "front_nodes", "sensors", "actuators", "precompensator", "design",
                                 "rootlocus", "simulation", "reproduce", "seed", "output_dir"});
  if (j.contains("model")) {
    const auto& m = j["model"];
    detail::reject_unknown(m, "model", {"L", "R", "gamma", "epsilon"});
    if (m.contains("L")) c.model.L = get_number(m["L"], "model.L");
    if (m.contains("R")) c.model.R = get_number(m["R"], "model.R");
    if (m.contains("gamma")) c.model.gamma = get_number(m["gamma"], "model.gamma");
    if (m.contains("epsilon")) c.model.epsilon = get_number(m["epsilon"], "model.epsilon");
  }
  if (j.contains("N")) c.N = get_int(j["N"], "N");
  if (j.contains("front_nodes")) c.front_nodes = get_int(j["front_nodes"], "front_nodes");
  if (j.contains("sensors")) {
    if (!j["sensors"].is_array()) throw ConfigError("sensors must be an array of r positions");
    std::vector<double> s;
    for (const auto& v : j["sensors"]) s.push_back(get_number(v, "sensors[]"));
    c.sensors = s;
  }
  if (j.contains("actuators")) {
    if (!j["actuators"].is_array()) throw ConfigError("actuators must be an array");
    std::vector<ActuatorSpec> a;
    for (const auto& v : j["actuators"]) {
      if (v.is_string()) {
        if (v.get<std::string>() != "constant") throw ConfigError("actuators: unknown kind '" + v.get<std::string>() + "'");
        a.push_back(ActuatorSpec::constant());
      } else {
        a.push_back(ActuatorSpec::eigen_mode(detail::get_mode(v, "actuators[]")));
      }
    }
    c.actuators = a;
  }
  if (j.contains("precompensator")) {
    const auto& p = j["precompensator"];
    if (!p.is_array() || p.empty()) throw ConfigError("precompensator must be a square array of rows");
    const auto n = static_cast<Eigen::Index>(p.size());
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& row = p[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
        throw ConfigError("precompensator must be square");
      for (Eigen::Index k = 0; k < n; ++k) M(r, k) = get_number(row[static_cast<std::size_t>(k)], "precompensator");
    }
    c.precompensator = Precompensator{M};
  }
  if (j.contains("design")) {
    const auto& d = j["design"];
    detail::reject_unknown(d, "design", {"max_eta", "candidate_count", "k_min", "k_smallest", "gain_points"});
    if (d.contains("max_eta")) c.design.max_eta = get_int(d["max_eta"], "design.max_eta");
    if (d.contains("candidate_count")) c.design.candidate_count = get_int(d["candidate_count"], "design.candidate_count");
    if (d.contains("k_min")) c.design.k_min = get_number(d["k_min"], "design.k_min");
    if (d.contains("k_smallest")) c.design.k_smallest = get_number(d["k_smallest"], "design.k_smallest");
    if (d.contains("gain_points")) c.design.gain_points = get_int(d["gain_points"], "design.gain_points");
  }
  if (j.contains("rootlocus")) {
    const auto& d = j["rootlocus"];
    detail::reject_unknown(d, "rootlocus", {"k_min", "k_smallest", "points"});
    if (d.contains("k_min")) c.rootlocus.k_min = get_number(d["k_min"], "rootlocus.k_min");
    if (d.contains("k_smallest")) c.rootlocus.k_smallest = get_number(d["k_smallest"], "rootlocus.k_smallest");
    if (d.contains("points")) c.rootlocus.points = get_int(d["points"], "rootlocus.points");
  }
  if (j.contains("simulation")) {
    const auto& s = j["simulation"];
    detail::reject_unknown(s, "simulation", {"nz", "nr", "t_final", "dt", "sample_every", "perturbation", "controlled",
                                             "write_final_field"});
    if (s.contains("nz")) c.simulation.nz = get_int(s["nz"], "simulation.nz");
    if (s.contains("nr")) c.simulation.nr = get_int(s["nr"], "simulation.nr");
    if (s.contains("t_final")) c.simulation.t_final = get_number(s["t_final"], "simulation.t_final");
    if (s.contains("dt")) c.simulation.dt = get_number(s["dt"], "simulation.dt");
    if (s.contains("sample_every")) c.simulation.sample_every = get_int(s["sample_every"], "simulation.sample_every");
    if (s.contains("controlled")) c.simulation.controlled = get_bool(s["controlled"], "simulation.controlled");
    if (s.contains("write_final_field"))
      c.simulation.write_final_field = get_bool(s["write_final_field"], "simulation.write_final_field");
    if (s.contains("perturbation")) {
      const auto& p = s["perturbation"];
      detail::reject_unknown(p, "simulation.perturbation", {"mode", "amplitude", "activator_only"});
      if (p.contains("mode")) c.simulation.perturbation.mode = detail::get_mode(p["mode"], "simulation.perturbation.mode");
      if (p.contains("amplitude"))
        c.simulation.perturbation.amplitude = get_number(p["amplitude"], "simulation.perturbation.amplitude");
      if (p.contains("activator_only"))
        c.simulation.perturbation.activator_only =
            get_bool(p["activator_only"], "simulation.perturbation.activator_only");
    }
  }
  if (j.contains("reproduce")) {
    const auto& r = j["reproduce"];
    detail::reject_unknown(r, "reproduce", {"simulations"});
    if (r.contains("simulations")) c.reproduce.simulations = get_bool(r["simulations"], "reproduce.simulations");
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("output_dir must be a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  return c;
}

inline constexpr const char* kOutputDirEnv = "FRONTCTL_OUTPUT_DIR";

/// Reads and validates a config file (or the defaults when path is empty).
/// The FRONTCTL_OUTPUT_DIR environment variable overrides output_dir.
inline RunConfig load_config(const std::string& path) {
  RunConfig c;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    c = parse_config(j);
  }
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) c.output_dir = env;
  c.validate();
  return c;
}

}  // namespace frontctl
