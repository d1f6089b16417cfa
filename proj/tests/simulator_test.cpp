#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "frontctl/simulator.hpp"

namespace frontctl {
namespace {

constexpr double kPi = std::numbers::pi;

ModelParams params_with(double R) {
  ModelParams p;
  p.R = R;
  return p;
}

double stable_dt(const Field2D& f) { return 0.1 * std::pow(std::min(f.dz(), f.dr()), 2); }

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= a.size();
  mb /= b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

class SimulatorFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { profile_ = new FrontProfile(solve_front(ModelParams{})); }
  static void TearDownTestSuite() { delete profile_; }
  static const FrontProfile& profile() { return *profile_; }

 private:
  static inline FrontProfile* profile_ = nullptr;
};

TEST(Field2D, Geometry) {
  const Field2D f(201, 81, 20.0, 8.0);
  EXPECT_NEAR(f.dz() * (f.nz - 1), 20.0, 1e-12);
  EXPECT_NEAR(f.dr() * (f.nr - 1), 8.0, 1e-12);
  EXPECT_EQ(f.z_at(200), 20.0);
  EXPECT_EQ(f.r_at(80), 8.0);
  EXPECT_THROW(Field2D(2, 10, 1.0, 1.0), std::invalid_argument);
}

TEST(Field2D, BilinearSamplingIsExactForBilinearData) {
  Field2D f(11, 7, 20.0, 6.0);
  for (int ir = 0; ir < f.nr; ++ir)
    for (int iz = 0; iz < f.nz; ++iz) f.y[f.index(iz, ir)] = 1.0 + 0.5 * f.z_at(iz) - 2.0 * f.r_at(ir) + 0.1 * f.z_at(iz) * f.r_at(ir);
  for (double z : {0.0, 3.3, 10.0, 19.99})
    for (double r : {0.0, 1.7, 5.2, 6.0})
      EXPECT_NEAR(f.sample_y(z, r), 1.0 + 0.5 * z - 2.0 * r + 0.1 * z * r, 1e-12);
}

TEST(Simulate, HomogeneousStatesAreEquilibria) {
  const ModelParams p = params_with(8.0);
  const double s = upper_state(p.gamma);
  for (double y : {0.0, s, -s}) {
    const Field2D init = make_uniform_field(p, 41, 17, y, -p.gamma * y);
    SimulationOptions opt;
    opt.sample_every = 100000;
    const Trajectory tr = simulate(p, std::nullopt, init, 10.0, stable_dt(init), opt);
    ASSERT_EQ(tr.times.back(), 10.0);
    const Field2D& fin = tr.snapshots.back();
    for (std::size_t k = 0; k < fin.y.size(); ++k) {
      EXPECT_NEAR(fin.y[k], y, 1e-10);
      EXPECT_NEAR(fin.theta[k], -p.gamma * y, 1e-10);
    }
  }
}

TEST_F(SimulatorFixture, PlanarFrontInit) {
  const ModelParams p = params_with(8.0);
  const Field2D f = make_front_init(profile(), p, 201, 81);
  for (int ir = 0; ir < f.nr; ++ir)
    for (int iz = 0; iz < f.nz; ++iz) {
      EXPECT_EQ(f.y[f.index(iz, ir)], f.y[f.index(iz, 0)]);
      EXPECT_DOUBLE_EQ(f.theta[f.index(iz, ir)], -p.gamma * f.y[f.index(iz, ir)]);
    }
  const FrontCurve c = front_position(f);
  EXPECT_FALSE(c.front_lost());
  for (double z : c.z_front) EXPECT_LE(std::abs(z - p.L / 2), f.dz());
  EXPECT_THROW(make_front_init(profile(), p, 201, 81, {{1, 2}, 0.3}), std::invalid_argument);
}

TEST_F(SimulatorFixture, InitSatisfiesNeumannConditions) {
  // Second-order one-sided differences at every edge; both the cosine and the
  // clamped profile have vanishing odd derivatives there, so the residual is
  // higher order in h.
  const ModelParams p = params_with(8.0);
  const Field2D f = make_front_init(profile(), p, 401, 801, {{1, 2}, 0.05});
  double worst = 0.0;
  for (int iz = 0; iz < f.nz; ++iz) {
    auto y = [&](int ir) { return f.y[f.index(iz, ir)]; };
    const int n = f.nr - 1;
    worst = std::max(worst, std::abs(-3 * y(0) + 4 * y(1) - y(2)) / (2 * f.dr()));
    worst = std::max(worst, std::abs(3 * y(n) - 4 * y(n - 1) + y(n - 2)) / (2 * f.dr()));
  }
  EXPECT_LT(worst, 1e-8);
  // Along z the ends are clamped by construction of the profile spline.
  for (int ir = 0; ir < f.nr; ir += 100) {
    const double h = 1e-6;
    const double r = f.r_at(ir);
    const double slope0 = (profile().spline(h) - profile().spline(0.0)) / h;
    const double slope1 = (profile().spline(p.L) - profile().spline(p.L - h)) / h;
    EXPECT_LT(std::abs(slope0), 1e-8) << r;
    EXPECT_LT(std::abs(slope1), 1e-8) << r;
  }
}

TEST(FrontPosition, TranslationAndLostFront) {
  const ModelParams p = params_with(4.0);
  Field2D f(201, 21, p.L, p.R);
  const double delta = 0.737;
  for (int ir = 0; ir < f.nr; ++ir)
    for (int iz = 0; iz < f.nz; ++iz) f.y[f.index(iz, ir)] = f.z_at(iz) - (p.L / 2 + delta);
  const FrontCurve c = front_position(f);
  for (double z : c.z_front) EXPECT_NEAR(z, p.L / 2 + delta, 1e-12);
  EXPECT_NEAR(c.mean_displacement, delta, 1e-12);
  EXPECT_NEAR(c.max_deviation, delta, 1e-12);

  const Field2D up = make_uniform_field(p, 21, 11, 0.7, -0.3);
  const FrontCurve lost = front_position(up);
  EXPECT_TRUE(lost.front_lost());
  EXPECT_EQ(lost.missing_rows.size(), 11u);
  EXPECT_EQ(lost.max_deviation, p.L / 2);
}

TEST_F(SimulatorFixture, TransverseModeShapesTheFront) {
  const ModelParams p = params_with(8.0);
  const Field2D f = make_front_init(profile(), p, 201, 81, {{1, 2}, 0.02});
  const FrontCurve c = front_position(f);
  std::vector<double> shape;
  for (double r : c.r) shape.push_back(std::cos(kPi * r / p.R));
  // y_s + a cos(pi r/R) = 0 moves the crossing opposite to the bump.
  EXPECT_LT(correlation(c.z_front, shape), -0.99);
  EXPECT_GT(c.max_deviation, 0.0);
  EXPECT_GT(std::abs(c.z_front.front() - c.z_front.back()), 0.01);
}

TEST_F(SimulatorFixture, RejectsBadSteps) {
  const ModelParams p = params_with(4.0);
  const Field2D f = make_front_init(profile(), p, 41, 9);
  const double h = std::min(f.dz(), f.dr());
  EXPECT_THROW(simulate(p, std::nullopt, f, 1.0, 0.21 * h * h), std::invalid_argument);
  EXPECT_THROW(simulate(p, std::nullopt, f, 0.0, 0.1 * h * h), std::invalid_argument);
  EXPECT_THROW(simulate(params_with(5.0), std::nullopt, f, 1.0, 0.1 * h * h), std::invalid_argument);
  SimulationOptions opt;
  opt.sample_every = 0;
  EXPECT_THROW(simulate(p, std::nullopt, f, 1.0, 0.1 * h * h, opt), std::invalid_argument);
}

TEST_F(SimulatorFixture, NonFiniteStateAborts) {
  const ModelParams p = params_with(4.0);
  Field2D f = make_front_init(profile(), p, 41, 9);
  f.y[f.index(20, 4)] = NAN;
  try {
    simulate(p, std::nullopt, f, 1.0, stable_dt(f));
    FAIL() << "expected NumericalFailure";
  } catch (const NumericalFailure& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST_F(SimulatorFixture, SamplingContract) {
  const ModelParams p = params_with(4.0);
  const Field2D f = make_front_init(profile(), p, 41, 9);
  SimulationOptions opt;
  opt.sample_every = 50;
  const Trajectory tr = simulate(p, std::nullopt, f, 1.0, stable_dt(f), opt);
  ASSERT_GE(tr.times.size(), 2u);
  EXPECT_EQ(tr.times.front(), 0.0);
  EXPECT_EQ(tr.times.back(), 1.0);
  for (std::size_t k = 1; k < tr.times.size(); ++k) EXPECT_GT(tr.times[k], tr.times[k - 1]);
  EXPECT_EQ(tr.snapshots.size(), tr.times.size());
  EXPECT_EQ(tr.front_curves.size(), tr.times.size());
  EXPECT_EQ(tr.control_history.size(), tr.times.size());
  EXPECT_TRUE(tr.control_history.front().empty());
}

TEST_F(SimulatorFixture, PlanarFrontStaysCentred) {
  const ModelParams p = params_with(4.0);
  const Field2D f = make_front_init(profile(), p, 81, 9);
  SimulationOptions opt;
  opt.sample_every = 1000000;
  const Trajectory tr = simulate(p, std::nullopt, f, 5.0, stable_dt(f), opt);
  EXPECT_LT(std::abs(tr.front_curves.back().mean_displacement), 1e-8);
}

TEST_F(SimulatorFixture, GridConvergence) {
  const ModelParams p = params_with(4.0);
  std::vector<double> z0;
  for (int level = 0; level < 3; ++level) {
    const int nz = 40 * (1 << level) + 1;
    const int nr = 4 * (1 << level) + 1;
    const Field2D f = make_front_init(profile(), p, nz, nr, {{1, 2}, 0.05});
    SimulationOptions opt;
    opt.sample_every = 1000000;
    opt.keep_snapshots = false;
    const Trajectory tr = simulate(p, std::nullopt, f, 2.0, 0.1 * std::pow(std::min(f.dz(), f.dr()), 2), opt);
    z0.push_back(tr.front_curves.back().z_front.front());  // row r = 0 exists on every grid
  }
  const double e1 = std::abs(z0[0] - z0[1]);
  const double e2 = std::abs(z0[1] - z0[2]);
  EXPECT_GT(e1 / e2, 3.0) << e1 << " " << e2;
  EXPECT_LT(e1 / e2, 5.0) << e1 << " " << e2;
}

TEST_F(SimulatorFixture, ControlledRunRecordsActuation) {
  const ModelParams p = params_with(4.0);
  const SpectralBasis basis(p, 23);
  const DesignOutcome d = design_single_actuator(p, profile(), basis, p.R / 2);
  ASSERT_TRUE(d.ok());
  const Field2D f = make_front_init(profile(), p, 81, 17, {{1, 1}, 0.05});
  SimulationOptions opt;
  opt.sample_every = 200;
  const Trajectory tr = simulate(p, d.spec, f, 40.0, stable_dt(f), opt);
  ASSERT_EQ(tr.control_history.front().size(), 1u);
  // Positive deviation at the sensor, negative gain: the actuator pushes down.
  EXPECT_LT(tr.control_history.front()[0], 0.0);
  EXPECT_NEAR(tr.control_history.front()[0], d.spec->gain * 0.05, 1e-3);
  // The closed loop is oscillatory (complex leading pair), so the deviation
  // overshoots early; by t = 40 it has decayed well below the initial value.
  EXPECT_LT(tr.front_curves.back().max_deviation, 0.25 * tr.front_curves.front().max_deviation);
}

TEST(FitGrowthRate, ExactExponential) {
  std::vector<double> t, v;
  for (int k = 0; k <= 40; ++k) {
    t.push_back(0.25 * k);
    v.push_back(-3.0 * std::exp(0.35 * t.back()));
  }
  EXPECT_NEAR(fit_growth_rate(t, v, 2.0, 8.0), 0.35, 1e-12);
  EXPECT_THROW(fit_growth_rate(t, v, 20.0, 30.0), std::invalid_argument);
}

}  // namespace
}  // namespace frontctl
