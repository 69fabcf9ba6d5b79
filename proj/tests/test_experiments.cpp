#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dwh/dwh.hpp"

using namespace dwh;

namespace {

const TimeSeries& artifact(const RunOutput& run, const std::string& label) {
  for (const auto& a : run.artifacts)
    if (a.label == label) return a.series;
  throw std::runtime_error("no artifact " + label);
}

// Least-squares slope of log|peak| over the local maxima of |v|.
double envelope_rate(const TimeSeries& s, const std::vector<double>& v) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const double a = std::abs(v[i - 1]), b = std::abs(v[i]), c = std::abs(v[i + 1]);
    if (b > a && b >= c) {
      const double x = s.times[i], y = std::log(b);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST(Fig3, StartValues) {
  const auto a = fig3_series(fig3_scenario('a'));
  const auto b = fig3_series(fig3_scenario('b'));
  EXPECT_NEAR(a.current.front(), 0.446683968450657, 1e-9);
  EXPECT_NEAR(b.current.front(), 2.7777777777e-7, 1e-12);
  for (double c : a.current) EXPECT_LE(std::abs(c), 1.0);
  EXPECT_EQ(a.size(), 2048u);
}

TEST(Fig3, ModulationPeriod) {
  const auto sc = fig3_scenario('a');
  const auto s = fig3_series(sc);
  const double drift = 0.5 * sc.cavity.xi * sc.trap.n_atoms;
  EXPECT_DOUBLE_EQ(drift, 50.0);
  const double dt = s.times[1] - s.times[0];
  EXPECT_NEAR(modulation_period(s, drift), 2.0 * std::numbers::pi / 30.0, dt);
}

TEST(Fig3, CurrentIsOpticalBohdOfPhase) {
  const auto s = fig3_series(fig3_scenario('a'));
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s.current[i], optical_bohd(s.phase[i]), 1e-14);
}

TEST(Fig3, RejectsUnknownVariant) { EXPECT_THROW(fig3_scenario('c'), InvalidParameter); }

TEST(Fig4, BothParameterizationsEmitted) {
  const auto run = run_fig4();
  ASSERT_EQ(run.artifacts.size(), 2u);
  EXPECT_EQ(run.artifacts[0].label, "fig4_caption");
  EXPECT_EQ(run.artifacts[1].label, "fig4_text");
  EXPECT_EQ(run.artifacts[0].series.meta.at("parameterization"), "caption");
  EXPECT_TRUE(run.figure);
  for (const auto& a : run.artifacts) {
    EXPECT_TRUE(a.series.has_current());
    EXPECT_TRUE(a.series.has_phase());
  }
}

TEST(Fig4, CaptionEnvelopeMatchesDampedRotationEigenvalues) {
  const auto sc = fig4_scenario("caption");
  const auto s = run_scenario(sc).artifacts.front().series;
  const double w = scenario_rates(sc).omega_prime;
  const double g = sc.cavity.coupling();
  const double gam = *sc.gamma_meas;
  Eigen::Matrix3d a;
  a << 0, -w, 0, w, -gam / 2, g, 0, -g, -gam / 2;
  const Eigen::Vector3cd ev = a.eigenvalues();
  double oscillating = 0.0;
  for (int k = 0; k < 3; ++k)
    if (std::abs(ev(k).imag()) > 0.1) oscillating = -ev(k).real();
  EXPECT_NEAR(oscillating, gam / 4, 0.05 * gam);
  std::vector<double> jy;
  for (const auto& b : s.states) jy.push_back(b.jy);
  EXPECT_NEAR(envelope_rate(s, jy), oscillating, 0.02 * oscillating);
}

TEST(Fig4, NoLightNoDampingIsRabiRotation) {
  auto sc = fig4_scenario("caption");
  sc.gamma_meas = 0.0;
  sc.cavity.xi = 0.0;
  sc.grid.t_end = 50.0;
  const auto s = run_scenario(sc).artifacts.front().series;
  const auto b0 = initial_bloch(sc);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto ref = rabi_analytic(b0.jx, b0.jy, 1.0, s.times[i]);
    ASSERT_NEAR(s.states[i].jx, ref.jx, 1e-6 * sc.trap.j());
    ASSERT_NEAR(s.states[i].jy, ref.jy, 1e-6 * sc.trap.j());
  }
}

TEST(Fig4, RejectsUnknownParameterization) { EXPECT_THROW(fig4_scenario("other"), InvalidParameter); }

TEST(Fig5, EmitsTrajectoriesEnsembleAndMaster) {
  auto sc = fig5_scenario(6, 3, 11);
  sc.grid.t_end = 5.0;
  sc.grid.samples = 64;
  const auto run = run_scenario(sc);
  ASSERT_EQ(run.artifacts.size(), 5u);
  EXPECT_EQ(run.artifacts[0].label, "fig5_traj0");
  EXPECT_EQ(run.artifacts[3].label, "fig5_ensemble");
  EXPECT_EQ(run.artifacts[4].label, "fig5_master");
  EXPECT_TRUE(run.artifacts[0].series.find("dW") != nullptr);
  EXPECT_EQ(run.meta.at("seed"), "11");
  EXPECT_NE(sc.note.find("N = 6"), std::string::npos);
}

TEST(Fig5, SeededRunIsBitIdentical) {
  auto sc = fig5_scenario(6, 2, 5);
  sc.grid.t_end = 3.0;
  sc.grid.samples = 32;
  const auto a = run_scenario(sc);
  const auto b = run_scenario(sc);
  ASSERT_EQ(a.artifacts.size(), b.artifacts.size());
  for (std::size_t i = 0; i < a.artifacts.size(); ++i)
    EXPECT_EQ(csv_text(a.artifacts[i].series), csv_text(b.artifacts[i].series));
}

TEST(Fig5, NoMeasurementMeansUnitaryTrajectories) {
  auto sc = fig5_scenario(6, 3, 1);
  sc.gamma_meas = 0.0;
  sc.grid.t_end = 4.0;
  sc.grid.dt = 2e-3;
  sc.grid.samples = 32;
  const auto run = run_scenario(sc);
  const auto& master = artifact(run, "fig5_master");
  for (const char* label : {"fig5_traj0", "fig5_traj1", "fig5_traj2"}) {
    const auto& s = artifact(run, label);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s.states[i].jx, master.states[i].jx, 1e-9);
  }
}

TEST(Sweep, RegimeCells) {
  Scenario sc;
  sc.route = Route::sweep;
  sc.trap.omega = 1.0;
  sc.trap.n_atoms = 1000;
  sc.sweep.kappa_n_over_omega = {0.0, 10.0};
  sc.sweep.eta_over_kappa = {0.0, 1.0};
  const auto t = regime_sweep(sc);
  ASSERT_EQ(t.cells.size(), 4u);
  for (const auto& c : t.cells) EXPECT_TRUE(c.error.empty()) << c.error;
  EXPECT_LT(std::abs(t.at(0, 0).order_parameter), 0.1);
  EXPECT_GT(t.at(1, 0).order_parameter, 0.5);
  EXPECT_LT(t.at(1, 1).order_parameter, 0.1);
}

TEST(Sweep, CellErrorsAreRecordedNotThrown) {
  Scenario sc;
  sc.route = Route::sweep;
  sc.trap.omega = 1.0;
  sc.trap.n_atoms = 1000;
  sc.trap.lambda = std::numeric_limits<double>::infinity();
  sc.sweep.kappa_n_over_omega = {0.0, 20.0};
  sc.sweep.eta_over_kappa = {0.0};
  const auto t = regime_sweep(sc);
  ASSERT_EQ(t.cells.size(), 2u);
  for (const auto& c : t.cells) {
    EXPECT_NE(c.error.find("lambda"), std::string::npos);
    EXPECT_TRUE(std::isnan(c.order_parameter));
  }
  sc.trap.lambda = 0.0;
  sc.sweep.kappa_n_over_omega = {-1.0};
  EXPECT_THROW(regime_sweep(sc), InvalidParameter);
}

TEST(CrossValidate, RabiScenario) {
  Scenario sc;
  sc.trap = {2.0, 0.01, 0.01, 0.001, 100};
  sc.initial.jx0 = 10.0;
  sc.initial.jy0 = 20.0;
  sc.grid.t_end = 5.0;
  sc.grid.samples = 256;
  const auto rep = cross_validate(sc);
  EXPECT_TRUE(rep.passed()) << report_text(rep);
  EXPECT_FALSE(rep.entries[0].skipped);
  EXPECT_TRUE(rep.entries[0].passed);
}

TEST(CrossValidate, LightCoupledZerothOrder) {
  Scenario sc;
  sc.trap.omega = 25.0;
  sc.trap.n_atoms = 100;
  sc.cavity.xi = 0.01;
  sc.cavity.n_photons = std::sqrt(275.0) / 0.01;
  sc.initial.jy0 = 1.0;
  sc.grid.t_end = 1.0;
  sc.grid.samples = 256;
  const auto rep = cross_validate(sc);
  EXPECT_TRUE(rep.passed()) << report_text(rep);
  int ran = 0;
  for (const auto& e : rep.entries)
    if (!e.skipped && e.hard) ++ran;
  EXPECT_GE(ran, 3);
}

TEST(CrossValidate, QuantumEntryIsInformational) {
  Scenario sc;
  sc.trap = {1.0, 0.0, 0.0, 0.0, 10};
  sc.initial.theta = std::numbers::pi / 2;
  sc.initial.phi = 0.0;
  sc.grid.t_end = 5.0;
  sc.grid.samples = 64;
  const auto rep = cross_validate(sc);
  const auto& q = rep.entries.back();
  EXPECT_EQ(q.name, "quantum_vs_meanfield");
  EXPECT_FALSE(q.skipped);
  EXPECT_FALSE(q.hard);
  EXPECT_LT(q.max_dev, q.tol);
}

TEST(Scenario, RouteNamesRoundTrip) {
  for (Route r : {Route::meanfield, Route::perturbative, Route::master, Route::trajectory, Route::fig3, Route::fig5,
                  Route::sweep})
    EXPECT_EQ(route_from_string(to_string(r)), r);
  EXPECT_THROW(route_from_string("quantum"), InvalidParameter);
}

TEST(Scenario, PerturbativeRouteEmitsOrders) {
  Scenario sc;
  sc.route = Route::perturbative;
  sc.trap = {25.0, 0.001, 0.0, 0.0, 100};
  sc.cavity.xi = 0.01;
  sc.cavity.n_photons = 1000.0;
  sc.initial.jy0 = 1.0;
  sc.grid.t_end = 0.5;
  sc.grid.samples = 128;
  const auto s = run_scenario(sc).artifacts.front().series;
  for (const char* c : {"jx_zeroth", "jx_first_re", "jx_first_im", "jx_full", "phase_first_im"})
    ASSERT_NE(s.find(c), nullptr) << c;
  EXPECT_EQ(s.size(), 128u);
  EXPECT_NO_THROW(s.check_consistent());
  const auto in = scenario_perturbation(sc);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s.find("jx_zeroth")->values[i], jx_zeroth(in, s.times[i]));
    EXPECT_EQ(s.find("jx_full")->values[i], jx_full(in, s.times[i]));
  }
}

TEST(Presets, MatchScenarioBuilders) {
  const std::string dir = DWH_PRESET_DIR;
  EXPECT_EQ(parse_config(dir + "/fig3a.cfg").scenario, fig3_scenario('a'));
  EXPECT_EQ(parse_config(dir + "/fig3b.cfg").scenario, fig3_scenario('b'));
  EXPECT_EQ(parse_config(dir + "/fig4_caption.cfg").scenario, fig4_scenario("caption"));
  EXPECT_EQ(parse_config(dir + "/fig4_text.cfg").scenario, fig4_scenario("text"));
  EXPECT_EQ(parse_config(dir + "/fig5.cfg").scenario, fig5_scenario());
}

TEST(Presets, AllParseAndValidate) {
  const std::string dir = DWH_PRESET_DIR;
  for (const char* name : {"rabi", "light_coupled", "sweep", "fig3a"}) {
    const auto cfg = parse_config(dir + "/" + name + ".cfg");
    const auto rep = cross_validate(cfg.scenario);
    EXPECT_TRUE(rep.passed()) << name << "\n" << report_text(rep);
  }
}
