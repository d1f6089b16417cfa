// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <fmt/core.h>

#include <chrono>
#include <random>
#include <string>
#include <vector>

#include "frontctl/scenarios.hpp"
#include "oracles.hpp"

using namespace frontctl;
using frontctl::scenarios::CriterionResult;

namespace {

// Zeros of random planted square systems against the pencil, the determinant
// oracle and the high-gain root locus.
CriterionResult check_zero_solver() {
  std::mt19937_64 rng(6006);
  std::uniform_int_distribution<int> eta_d(1, 2), ord(2, 6);
  int trials = 0, failures = 0;
  double worst_pencil = 0.0, worst_oracle = 0.0, worst_locus = 0.0;
  while (trials < 24) {
    const int eta = eta_d(rng);
    std::vector<int> orders;
    int n = 0;
    for (int c = 0; c < eta; ++c) {
      orders.push_back(ord(rng));
      n += orders.back();
    }
    if (n > 12) continue;
    ++trials;
    const auto sys = testing::planted_system(rng, orders);
    double w = 0.0;
    bool ok = testing::same_multiset(finite_zeros(sys.A, sys.B, sys.H).finite_zeros, sys.zeros, 1e-6, &w);
    worst_pencil = std::max(worst_pencil, w);
    ok = testing::same_multiset(testing::determinant_oracle_zeros(sys.A, sys.B, sys.H), sys.zeros, 1e-6, &w) && ok;
    worst_oracle = std::max(worst_oracle, w);
    ok = testing::same_multiset(testing::high_gain_finite_branches(sys.A, sys.B, sys.H, -1e8), sys.zeros, 1e-4, &w) &&
         ok;
    worst_locus = std::max(worst_locus, w);
    if (!ok) ++failures;
  }
  CriterionResult r{6, "finite-zero solver", failures == 0, ""};
  r.detail = fmt::format(
      "{} random systems (n <= 12, eta <= 2): worst relative error pencil {:.2e}, determinant oracle {:.2e} (tol 1e-6), "
      "k = -1e8 locus {:.2e} (tol 1e-4); {} failures",
      trials, worst_pencil, worst_oracle, worst_locus, failures);
  return r;
}

// Zeros are unchanged by nonsingular output mixing and positive input scaling.
CriterionResult check_zero_invariance(const scenarios::Context& ctx) {
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.2, 5.0);
  double worst = 0.0;
  int checks = 0, failures = 0;
  auto run = [&](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& H) {
    const auto ref = finite_zeros(A, B, H).finite_zeros;
    const Eigen::Index eta = H.rows();
    for (int t = 0; t < 10; ++t) {
      Eigen::MatrixXd M(eta, eta);
      do {
        for (Eigen::Index a = 0; a < eta; ++a)
          for (Eigen::Index b = 0; b < eta; ++b) M(a, b) = u(rng);
      } while (std::abs(M.determinant()) < 0.1);
      Eigen::VectorXd d(eta);
      for (Eigen::Index a = 0; a < eta; ++a) d(a) = pos(rng);
      double w = 0.0;
      ++checks;
      if (!testing::same_multiset(finite_zeros(A, B, M * H).finite_zeros, ref, 1e-8, &w)) ++failures;
      worst = std::max(worst, w);
      ++checks;
      if (!testing::same_multiset(finite_zeros(A, B * d.asDiagonal(), H).finite_zeros, ref, 1e-8, &w)) ++failures;
      worst = std::max(worst, w);
    }
  };
  const DesignOutcome two = scenarios::two_actuator_design(ctx, 8.0);
  if (two.ok()) {
    const ModelParams p = ctx.at(8.0);
    const SpectralSystem sys =
        assemble_system(p, ctx.profile, SpectralBasis(p, ctx.N), two.spec->sensors, two.spec->actuators);
    run(sys.A, sys.beta, sys.H);
  } else {
    ++failures;
  }
  for (int t = 0; t < 4; ++t) {
    const auto s = testing::planted_system(rng, {3 + t % 2, 2 + t % 3});
    run(s.A, s.B, s.H);
  }
  CriterionResult r{7, "zero invariance", failures == 0, ""};
  r.detail = fmt::format("{} output-mixing / input-scaling checks on the R=8 two-actuator and planted systems: "
                         "worst relative change {:.2e} (tol 1e-8); {} failures",
                         checks, worst, failures);
  return r;
}

// Planted uncontrollable and unobservable modes are detected by both methods.
CriterionResult check_decoupling() {
  std::mt19937_64 rng(8008);
  int trials = 0, failures = 0;
  std::string why;
  for (int t = 0; t < 12; ++t) {
    const int eta = 1 + t % 2;
    const auto pd = testing::planted_uncontrollable(rng, 3 + t % 4, 1 + t % 3, eta);
    for (bool dual : {false, true}) {
      ++trials;
      try {
        // The dual case hides the same modes from the output H = B^T of A^T.
        const DecouplingResult res = input_decoupling_analysis(pd.A, pd.B);
        const auto got = dual ? output_decoupling_zeros(pd.A.transpose(), pd.B.transpose()) : res.zeros;
        const bool ok = testing::same_multiset(got, pd.hidden, 1e-6) &&
                        testing::same_multiset(res.by_rank_test, res.by_invariance, 1e-6) &&
                        testing::same_multiset(res.zeros, pd.hidden, 1e-6);
        if (!ok) {
          ++failures;
          why += fmt::format(" trial {}{}", t, dual ? "o" : "i");
        }
      } catch (const NumericalFailure& e) {
        ++failures;
        why += fmt::format(" trial {}{} ({})", t, dual ? "o" : "i", e.what());
      }
    }
  }
  CriterionResult r{8, "decoupling zeros", failures == 0, ""};
  r.detail = fmt::format("{} planted uncontrollable/unobservable systems, invariance and rank test agree and "
                         "recover the planted modes; {} failures{}",
                         trials, failures, why);
  return r;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  const scenarios::Context ctx;
  std::vector<CriterionResult> results;
  auto timed = [&](auto&& fn) {
    const auto t0 = clock::now();
    CriterionResult r = fn();
    const double s = std::chrono::duration<double>(clock::now() - t0).count();
    fmt::print("{}  [{:.0f} s]\n", scenarios::format_line(r), s);
    std::fflush(stdout);
    results.push_back(std::move(r));
  };

  timed([&] { return scenarios::check_open_loop_spectrum(ctx); });
  timed([&] { return scenarios::check_transverse_threshold(ctx); });
  timed([&] { return scenarios::check_siso_critical_width(ctx); });
  timed([&] { return scenarios::check_two_actuator(ctx); });
  timed([&] { return scenarios::check_precompensator(ctx); });
  timed([] { return check_zero_solver(); });
  timed([&] { return check_zero_invariance(ctx); });
  timed([] { return check_decoupling(); });
  timed([&] { return scenarios::check_closed_loop(ctx); });
  timed([&] { return scenarios::check_linear_consistency(ctx); });

  int passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  fmt::print("{} of {} criteria passed\n", passed, results.size());
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}
