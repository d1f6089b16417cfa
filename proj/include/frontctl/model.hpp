#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace frontctl {

/// Constants of the scaled two-variable reaction-diffusion system on the
/// rectangle [0, L] x [0, R].
struct ModelParams {
  double L = 20.0;
  double R = 8.0;
  double gamma = 0.45;
  double epsilon = 0.1;

  /// Throws std::invalid_argument unless the parameters admit a bistable
  /// planar front (L, R > 0, 0 < epsilon < 1, 0 < gamma < 1).
  void validate() const {
    auto bad = [](const std::string& msg) { throw std::invalid_argument("ModelParams: " + msg); };
    if (!(std::isfinite(L) && L > 0)) bad("L must be positive");
    if (!(std::isfinite(R) && R > 0)) bad("R must be positive");
    if (!(epsilon > 0 && epsilon < 1)) bad("epsilon must lie in (0, 1)");
    if (!(gamma > 0 && gamma < 1)) bad("gamma must lie in (0, 1) for a bistable front");
  }

  ModelParams with_width(double width) const {
    ModelParams p = *this;
    p.R = width;
    return p;
  }
};

// Polynomial kinetics. y is the activator, theta the slow inhibitor.

constexpr double eval_P(double y, double theta) { return -y * y * y + y + theta; }

constexpr double eval_Q(double y, double theta, double gamma) { return -gamma * y - theta; }

/// dP/dy, the weight of the linearized activator equation.
constexpr double eval_dPdy(double y) { return -3.0 * y * y + 1.0; }

/// Homogeneous stable level of the activator, sqrt(1 - gamma).
inline double upper_state(double gamma) { return std::sqrt(1.0 - gamma); }

}  // namespace frontctl
