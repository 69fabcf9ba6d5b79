#pragma once

// Scenario runners: the figure reproductions, the self-trapping regime map
// and cross-validation of the analytic, mean-field and exact routes.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dwh/errors.hpp"
#include "dwh/meanfield.hpp"
#include "dwh/model.hpp"
#include "dwh/perturbation.hpp"
#include "dwh/quantum.hpp"
#include "dwh/timeseries.hpp"

namespace dwh {

enum class Route { meanfield, perturbative, master, trajectory, fig3, fig5, sweep };

inline std::string_view to_string(Route r) {
  switch (r) {
    case Route::meanfield: return "meanfield";
    case Route::perturbative: return "perturbative";
    case Route::master: return "master";
    case Route::trajectory: return "trajectory";
    case Route::fig3: return "fig3";
    case Route::fig5: return "fig5";
    case Route::sweep: return "sweep";
  }
  return "unknown";
}

inline Route route_from_string(std::string_view s) {
  for (Route r : {Route::meanfield, Route::perturbative, Route::master, Route::trajectory, Route::fig3, Route::fig5,
                  Route::sweep})
    if (to_string(r) == s) return r;
  throw InvalidParameter("unknown route '" + std::string(s) + "'");
}

struct InitialConditions {
  double jx0 = 0.0;
  double jy0 = 0.0;
  double jz0 = 0.0;
  // Coherent-state direction measured from +x; overrides jx0, jy0, jz0 when set.
  std::optional<double> theta;
  std::optional<double> phi;
  double phase0 = 0.0;
  std::optional<double> beta_mag;  // defaults to sqrt(N/2)

  friend bool operator==(const InitialConditions&, const InitialConditions&) = default;
};

struct TimeGrid {
  double t0 = 0.0;
  double t_end = 1.0;
  double dt = 1e-3;
  std::size_t stride = 1;
  std::size_t samples = 2048;  // 0 = emit every stride-th step

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

struct StochasticSettings {
  std::uint64_t seed = 0;
  std::size_t trajectories = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
  SseForm form = SseForm::normalized;
  std::size_t noise_substeps = 1;

  friend bool operator==(const StochasticSettings&, const StochasticSettings&) = default;
};

struct SweepGrid {
  std::vector<double> kappa_n_over_omega{0.0, 2.0, 5.0, 10.0, 20.0};
  std::vector<double> eta_over_kappa{0.0, 0.25, 0.5, 0.75, 1.0};
  double jx_fraction = 0.9;  // jx(0) = fraction * N/2
  int jz_sign = 1;           // sign of jz(0) = +-sqrt(j^2 - jx(0)^2)
  double periods = 100.0;    // run length in bare tunnelling periods 2 pi / omega
  double max_step_phase = 0.05;

  friend bool operator==(const SweepGrid&, const SweepGrid&) = default;
};

struct Scenario {
  std::string name = "scenario";
  Route route = Route::meanfield;
  MeanfieldVariant variant;
  TrapParams trap;
  CavityParams cavity;
  std::optional<double> gamma_meas;  // overrides the value derived from the cavity
  InitialConditions initial;
  TimeGrid grid;
  StochasticSettings stochastic;
  SweepGrid sweep;
  std::string note;  // free text echoed into the manifest

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// ---------------------------------------------------------------------------
// Scenario helpers

inline BlochState initial_bloch(const Scenario& sc) {
  const auto& in = sc.initial;
  if (in.theta || in.phi) {
    const double j = sc.trap.j();
    const double th = in.theta.value_or(0.0);
    const double ph = in.phi.value_or(0.0);
    return {j * std::cos(th), j * std::sin(th) * std::cos(ph), j * std::sin(th) * std::sin(ph)};
  }
  return {in.jx0, in.jy0, in.jz0};
}

/// Coherent state along the configured angles, or along the direction of
/// (jx0, jy0, jz0) when no angles are given.
inline QuantumState initial_quantum_state(const Scenario& sc, const SpinOperators& ops) {
  const auto& in = sc.initial;
  if (in.theta || in.phi) return coherent_spin_state(in.theta.value_or(0.0), in.phi.value_or(0.0), ops);
  const double r = std::sqrt(in.jx0 * in.jx0 + in.jy0 * in.jy0 + in.jz0 * in.jz0);
  if (r == 0.0) throw InvalidParameter("initial Bloch vector is zero: give theta/phi for quantum routes");
  return coherent_spin_state(std::acos(std::clamp(in.jx0 / r, -1.0, 1.0)), std::atan2(in.jz0, in.jy0), ops);
}

inline DerivedRates scenario_rates(const Scenario& sc) {
  return derived_rates(sc.trap, sc.cavity, initial_bloch(sc).jz);
}

inline double scenario_gamma(const Scenario& sc) { return sc.gamma_meas.value_or(scenario_rates(sc).gamma_meas); }

inline PerturbationInputs scenario_perturbation(const Scenario& sc) {
  const auto b = initial_bloch(sc);
  auto in = make_perturbation_inputs(scenario_rates(sc), sc.trap.n_atoms, sc.cavity.xi, b.jy,
                                     sc.initial.beta_mag.value_or(0.0));
  in.cav_amp = sc.cavity.cav_amp;
  in.lo_amp = sc.cavity.lo_amp;
  return in;
}

inline std::vector<double> sample_times(const TimeGrid& g) {
  const StepGrid sg = make_grid(g.t0, g.t_end, g.dt, g.stride, g.samples);
  std::vector<double> t;
  t.reserve(sg.n_samples());
  for (std::size_t s = 0; s <= sg.n_steps; s += sg.stride) t.push_back(sg.time(s));
  return t;
}

// ---------------------------------------------------------------------------
// Outputs

struct Artifact {
  std::string label;
  TimeSeries series;
};

struct SweepCell {
  double kappa_n_over_omega = 0.0;
  double eta_over_kappa = 0.0;
  double order_parameter = std::nan("");
  std::string error;  // empty when the cell ran
};

struct SweepTable {
  std::vector<double> kappa_axis;
  std::vector<double> ratio_axis;
  std::vector<SweepCell> cells;  // row-major: kappa rows, ratio columns

  const SweepCell& at(std::size_t row, std::size_t col) const { return cells.at(row * ratio_axis.size() + col); }

  bool row_non_increasing(std::size_t row, double tol = 0.0) const {
    for (std::size_t c = 1; c < ratio_axis.size(); ++c)
      if (!(at(row, c).order_parameter <= at(row, c - 1).order_parameter + tol)) return false;
    return true;
  }
};

struct CheckEntry {
  std::string name;
  std::string channel;
  double max_dev = 0.0;
  double tol = 0.0;
  bool passed = false;
  bool hard = true;
  bool skipped = false;
  std::string note;
};

struct ValidationReport {
  std::string scenario;
  std::vector<CheckEntry> entries;

  bool passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const CheckEntry& e) { return e.skipped || !e.hard || e.passed; });
  }
};

struct RunOutput {
  std::string name;
  std::vector<Artifact> artifacts;
  std::optional<SweepTable> sweep;
  std::optional<ValidationReport> report;
  Meta meta;
  bool figure = false;  // figure runs also emit two-column curve files
};

// ---------------------------------------------------------------------------
// Figure 3: analytic homodyne current

/// Fig. 3 parameters: Omega' = 25, omega = 30 (xi N_f = sqrt(275)), xi = 0.01,
/// N = 10^4, jy0 = 1667 (a) or 0.001 (b), t in [0, 1].
inline Scenario fig3_scenario(char variant) {
  if (variant != 'a' && variant != 'b') throw InvalidParameter("fig3 variant must be 'a' or 'b'");
  Scenario sc;
  sc.name = std::string("fig3") + variant;
  sc.route = Route::fig3;
  sc.trap.omega = 25.0;
  sc.trap.n_atoms = 10000;
  sc.cavity.xi = 0.01;
  sc.cavity.n_photons = std::sqrt(275.0) / 0.01;
  sc.initial.jy0 = variant == 'a' ? 1667.0 : 0.001;
  sc.grid.t_end = 1.0;
  sc.grid.dt = 1e-3;
  sc.grid.samples = 2048;
  return sc;
}

inline TimeSeries fig3_series(const Scenario& sc) {
  const auto in = scenario_perturbation(sc);
  const double jy0 = initial_bloch(sc).jy;
  TimeSeries out;
  out.times = sample_times(sc.grid);
  out.phase.reserve(out.size());
  out.current.reserve(out.size());
  for (double t : out.times) {
    out.phase.push_back(phase_trajectory(jy0, in, t));
    out.current.push_back(homodyne_current_analytic(jy0, in, t));
  }
  out.meta["route"] = "fig3";
  out.meta["omega_prime"] = format_double(in.rates.omega_prime);
  out.meta["omega_eff"] = format_double(in.rates.omega_eff);
  return out;
}

/// Period of the momentum-carrying part of the phase: the drift
/// -drift_rate * t is removed and the spacing of the zero crossings of the
/// remaining cosine is measured.
inline double modulation_period(const TimeSeries& s, double drift_rate) {
  if (!s.has_phase()) throw InvalidParameter("series has no phase channel");
  std::vector<double> crossings;
  auto detrended = [&](std::size_t i) { return s.phase[i] + drift_rate * (s.times[i] - s.times.front()); };
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double a = detrended(i - 1), b = detrended(i);
    if ((a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)) {
      const double f = a / (a - b);
      crossings.push_back(s.times[i - 1] + f * (s.times[i] - s.times[i - 1]));
    }
  }
  if (crossings.size() < 2) throw InvalidParameter("fewer than two zero crossings: run is shorter than a period");
  return 2.0 * (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
}

// ---------------------------------------------------------------------------
// Figure 4: damped moments under both printed parameterizations

/// `which` is "caption" (Gamma/Omega' = 0.0065, xi|c0|^2/Omega' = 0.04) or
/// "text" (Gamma/Omega' = 0.0001, eta/Omega' = kappa/Omega' = 0.04, with the
/// caption's xi|c0|^2/Omega'). Omega' = 1, so time is in units of 1/Omega'.
inline Scenario fig4_scenario(const std::string& which) {
  Scenario sc;
  sc.name = "fig4_" + which;
  sc.route = Route::meanfield;
  sc.variant.tag = Variant::damped_moments;
  sc.trap.omega = 1.0;
  sc.trap.n_atoms = 10000;
  sc.cavity.xi = 1e-4;
  sc.cavity.n_photons = 0.04 / 1e-4;
  sc.initial.jy0 = 1667.0;
  sc.grid.t_end = 500.0;
  sc.grid.dt = 1e-2;
  sc.grid.samples = 2048;
  if (which == "caption") {
    sc.gamma_meas = 0.0065;
  } else if (which == "text") {
    sc.gamma_meas = 0.0001;
    sc.trap.kappa = sc.trap.eta = 0.04;
  } else {
    throw InvalidParameter("fig4 parameterization must be 'caption' or 'text'");
  }
  return sc;
}

// ---------------------------------------------------------------------------
// Figure 5: conditional currents at desk-scale N

/// Fig. 5 ratios at N atoms: Omega' = 1, kappa = eta = 0.04, Gamma = 1e-4,
/// xi N_f = 0.04 and xi = 1/N, which keeps the drift rate xi N / 2 = 0.5 of
/// the Fig. 4 runs. The initial state is the equal-population coherent state
/// with maximal momentum.
inline Scenario fig5_scenario(int n_atoms = 10, std::size_t trajectories = 20, std::uint64_t seed = 2024) {
  Scenario sc;
  sc.name = "fig5";
  sc.route = Route::fig5;
  sc.trap.omega = 1.0;
  sc.trap.kappa = sc.trap.eta = 0.04;
  sc.trap.n_atoms = n_atoms;
  sc.cavity.xi = 1.0 / n_atoms;
  sc.cavity.n_photons = 0.04 * n_atoms;
  sc.gamma_meas = 1e-4;
  sc.initial.theta = std::numbers::pi / 2;
  sc.initial.phi = 0.0;
  sc.grid.t_end = 200.0;
  sc.grid.dt = 1e-2;
  sc.grid.samples = 2048;
  sc.stochastic.seed = seed;
  sc.stochastic.trajectories = trajectories;
  sc.note = "Gamma/Omega', eta/Omega' and xi N/2 kept at their Fig. 4/5 values with N = " +
            std::to_string(n_atoms) + " in place of 10^4";
  return sc;
}

// ---------------------------------------------------------------------------
// Regime map

inline SweepTable regime_sweep(const Scenario& sc) {
  const auto& g = sc.sweep;
  if (g.kappa_n_over_omega.empty() || g.eta_over_kappa.empty()) throw InvalidParameter("sweep axes must be non-empty");
  if (!(sc.trap.omega > 0.0)) throw InvalidParameter("sweep needs omega > 0");
  if (!(g.jx_fraction > 0.0 && g.jx_fraction <= 1.0)) throw InvalidParameter("jx_fraction must be in (0, 1]");
  if (!(g.periods > 0.0)) throw InvalidParameter("periods must be > 0");
  for (double v : g.kappa_n_over_omega)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("kappa_n_over_omega entries must be >= 0");
  for (double v : g.eta_over_kappa)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("eta_over_kappa entries must be >= 0");

  SweepTable table;
  table.kappa_axis = g.kappa_n_over_omega;
  table.ratio_axis = g.eta_over_kappa;
  const std::size_t n_cells = table.kappa_axis.size() * table.ratio_axis.size();
  table.cells.resize(n_cells);

  const int n = sc.trap.n_atoms;
  const double j = 0.5 * n;
  const double jx0 = g.jx_fraction * j;
  const BlochState s0{jx0, 0.0, (g.jz_sign < 0 ? -1.0 : 1.0) * std::sqrt(std::max(0.0, j * j - jx0 * jx0))};
  const double t1 = g.periods * 2.0 * std::numbers::pi / sc.trap.omega;

  auto run_cell = [&](std::size_t idx) {
    SweepCell& cell = table.cells[idx];
    cell.kappa_n_over_omega = table.kappa_axis[idx / table.ratio_axis.size()];
    cell.eta_over_kappa = table.ratio_axis[idx % table.ratio_axis.size()];
    try {
      MeanfieldSystem sys;
      sys.variant.tag = Variant::closed;
      sys.trap = sc.trap;
      sys.trap.kappa = cell.kappa_n_over_omega * sc.trap.omega / n;
      sys.trap.eta = cell.eta_over_kappa * sys.trap.kappa;
      const auto rates = derived_rates(sys.trap, sys.cavity, s0.jz);
      IntegratorSettings is;
      is.dt = g.max_step_phase / max_frequency(sys, rates, 0.0, std::sqrt(s0.norm2()));
      is.max_step_phase = g.max_step_phase * (1.0 + 1e-9);
      is.samples = sc.grid.samples >= 2 ? sc.grid.samples : 2048;
      // The order parameter is a trapezoidal average; sample densely enough
      // that the emitted grid resolves the fastest oscillation.
      is.samples = std::max<std::size_t>(is.samples, static_cast<std::size_t>(t1 / (20.0 * is.dt)) + 1);
      cell.order_parameter = selftrap_order_parameter(integrate(sys, s0, 0.0, 0.0, t1, is));
    } catch (const Error& e) {
      cell.error = e.what();
    }
  };

  unsigned threads = sc.stochastic.threads ? sc.stochastic.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_cells));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_cells; i = next++) run_cell(i);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return table;
}

// ---------------------------------------------------------------------------
// Cross-validation

namespace detail {
inline CheckEntry make_entry(std::string name, std::string channel, double dev, double tol, bool hard,
                             std::string note = {}) {
  return {std::move(name), std::move(channel), dev, tol, dev <= tol, hard, false, std::move(note)};
}
inline CheckEntry skipped_entry(std::string name, std::string why) {
  CheckEntry e;
  e.name = std::move(name);
  e.skipped = true;
  e.passed = true;
  e.note = std::move(why);
  return e;
}
}  // namespace detail

/// Runs every route that applies to the scenario and compares them.
inline ValidationReport cross_validate(const Scenario& sc) {
  ValidationReport rep;
  rep.scenario = sc.name;
  const auto s0 = initial_bloch(sc);
  const auto rates = scenario_rates(sc);
  const double j = sc.trap.j();
  const double g = sc.cavity.coupling();
  const double t0 = sc.grid.t0, t1 = sc.grid.t_end;
  const double fast = std::max({std::abs(rates.omega_prime), rates.omega_eff, 1e-300}) +
                      8.0 * (sc.trap.kappa + sc.trap.eta) * std::sqrt(s0.norm2());

  // Collision shift equal in both wells and no light: rigid Rabi rotation.
  if (sc.trap.kappa == sc.trap.eta && g == 0.0) {
    MeanfieldSystem sys{{Variant::closed, false}, sc.trap, sc.cavity, std::nullopt};
    IntegratorSettings is;
    is.dt = std::min(sc.grid.dt, 1e-3 / fast);
    is.samples = sc.grid.samples;
    const auto series = integrate(sys, s0, 0.0, t0, t1, is);
    double dev = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto ref = rabi_analytic(s0.jx, s0.jy, rates.omega_prime, series.times[i] - t0, s0.jz);
      dev = std::max({dev, std::abs(series.states[i].jx - ref.jx), std::abs(series.states[i].jy - ref.jy),
                      std::abs(series.states[i].jz - ref.jz)});
    }
    rep.entries.push_back(detail::make_entry("meanfield_vs_rabi_closed_form", "jx,jy,jz", dev, 1e-6 * j, true));
  } else {
    rep.entries.push_back(detail::skipped_entry("meanfield_vs_rabi_closed_form", "needs kappa = eta and no light"));
  }

  const bool zero_start = s0.jx == 0.0 && s0.jz == 0.0;
  // No self-collisions with light: rigid rotation at omega, i.e. the zeroth order.
  if (sc.trap.kappa == 0.0 && g > 0.0 && zero_start) {
    MeanfieldSystem sys{{Variant::light_coupled, false}, sc.trap, sc.cavity, std::nullopt};
    IntegratorSettings is;
    is.dt = std::min(sc.grid.dt, 1e-3 / fast);
    is.samples = sc.grid.samples;
    const auto series = integrate(sys, s0, 0.0, t0, t1, is);
    auto in = scenario_perturbation(sc);
    double dev = 0.0, dev_phase = 0.0, scale = 1.0;
    const double offset = phase_trajectory(s0.jy, in, t0);
    for (std::size_t i = 0; i < series.size(); ++i) {
      const double t = series.times[i] - t0;
      dev = std::max(dev, std::abs(series.states[i].jx - jx_zeroth(in, t)));
      const double ref = phase_trajectory(s0.jy, in, t) - offset;
      dev_phase = std::max(dev_phase, std::abs(series.phase[i] - ref));
      scale = std::max(scale, std::abs(ref));
    }
    rep.entries.push_back(detail::make_entry("meanfield_vs_zeroth_order", "jx", dev, 1e-6 * j, true));
    rep.entries.push_back(detail::make_entry("meanfield_vs_phase_trajectory", "phase", dev_phase, 1e-9 * scale, true));
  } else {
    rep.entries.push_back(detail::skipped_entry("meanfield_vs_zeroth_order", "needs kappa = 0, light and jx0 = jz0 = 0"));
  }

  // Weak self-collisions: first-order expansion against the guarded integrator.
  if (sc.trap.kappa > 0.0 && g > 0.0 && zero_start && rates.has_epsilon()) {
    MeanfieldSystem sys{{Variant::light_coupled, true}, sc.trap, sc.cavity, std::nullopt};
    IntegratorSettings is;
    is.dt = std::min(sc.grid.dt, 1e-3 / fast);
    is.samples = sc.grid.samples;
    const double period_end = std::min(t1, t0 + 2.0 * std::numbers::pi / rates.omega_eff);
    const auto series = integrate(sys, s0, 0.0, t0, period_end, is);
    const auto in = scenario_perturbation(sc);
    double dev = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i)
      dev = std::max(dev, std::abs(series.states[i].jx - jx_full(in, series.times[i] - t0)));
    const double tol = 10.0 * rates.epsilon * std::max(1.0, std::abs(s0.jy));
    rep.entries.push_back(detail::make_entry("meanfield_vs_first_order", "jx", dev, tol, false,
                                             "first period; tolerance 10 epsilon |jy0|"));
  } else {
    rep.entries.push_back(detail::skipped_entry("meanfield_vs_first_order", "needs kappa > 0, light and jx0 = jz0 = 0"));
  }

  if (sc.cavity.xi != 0.0) {
    const auto in = scenario_perturbation(sc);
    double dev = 0.0;
    for (double t : sample_times(sc.grid))
      dev = std::max(dev, std::abs(optical_bohd(phase_trajectory(s0.jy, in, t), in.cav_amp, in.lo_amp) -
                                   homodyne_current_analytic(s0.jy, in, t)));
    rep.entries.push_back(detail::make_entry("bohd_identity", "current", dev, 1e-14, true));
  } else {
    rep.entries.push_back(detail::skipped_entry("bohd_identity", "needs xi != 0"));
  }

  // Exact dynamics against the mean field it factorizes into.
  const double gamma = scenario_gamma(sc);
  const bool quantum_ok = sc.trap.n_atoms <= kDimensionCap && sc.trap.kappa == sc.trap.eta &&
                          (gamma == 0.0 || (sc.trap.kappa == 0.0 && sc.trap.n_atoms <= 64));
  if (quantum_ok) {
    const auto ops = build_spin_operators(sc.trap.n_atoms);
    const auto h = build_hamiltonian(sc.trap, sc.cavity, ops);
    const auto psi = initial_quantum_state(sc, ops);
    const auto start = bloch_vector(ops, psi.vector());
    const auto times = sample_times(sc.grid);
    std::vector<double> qjx;
    if (gamma == 0.0) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
      const CVector coeff = es.eigenvectors().adjoint() * psi.vector();
      for (double t : times) {
        CVector phased = coeff;
        for (Eigen::Index k = 0; k < phased.size(); ++k) phased(k) *= std::polar(1.0, -es.eigenvalues()(k) * (t - t0));
        qjx.push_back(expectation(ops.jx, CVector(es.eigenvectors() * phased)));
      }
    } else {
      MasterSettings ms;
      ms.dt = std::min(sc.grid.dt, 0.2 / (spectral_width(h) + 0.5 * gamma * sc.trap.n_atoms * sc.trap.n_atoms));
      ms.samples = times.size();
      for (const auto& s : evolve_master(psi, h, ops, gamma, t0, t1, ms).series.states) qjx.push_back(s.jx);
    }
    MeanfieldSystem sys;
    sys.trap = sc.trap;
    sys.cavity = sc.cavity;
    sys.gamma_meas = gamma;
    sys.variant = gamma == 0.0 ? MeanfieldVariant{Variant::light_coupled, true} : MeanfieldVariant{Variant::damped_moments, false};
    IntegratorSettings is;
    is.dt = std::min(sc.grid.dt, 1e-3 / std::max(fast, 8.0 * sc.trap.kappa * j));
    is.samples = times.size();
    const auto mf = integrate(sys, start, 0.0, t0, t1, is);
    double dev = 0.0;
    for (std::size_t i = 0; i < std::min(mf.size(), qjx.size()); ++i) dev = std::max(dev, std::abs(mf.states[i].jx - qjx[i]));
    rep.entries.push_back(detail::make_entry("quantum_vs_meanfield", "jx", dev, 2.0 * j / sc.trap.n_atoms, false,
                                             "coherent-state start; finite-N corrections expected"));
  } else {
    rep.entries.push_back(detail::skipped_entry(
        "quantum_vs_meanfield", "needs kappa = eta, N within the dimension cap, and Gamma = 0 unless kappa = 0 and N <= 64"));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Dispatch

namespace detail {

inline void echo_scenario(Meta& m, const Scenario& sc) {
  m["scenario"] = sc.name;
  m["route"] = std::string(to_string(sc.route));
  if (!sc.note.empty()) m["note"] = sc.note;
}

inline TimeSeries map_to_cavity(const TimeSeries& s, const Scenario& sc) {
  return conditional_current_via_cavity(s, sc.cavity, sc.trap.n_atoms, sc.initial.phase0);
}

inline SseSettings sse_settings(const Scenario& sc) {
  SseSettings ss;
  ss.dt = sc.grid.dt;
  ss.stride = sc.grid.stride;
  ss.samples = sc.grid.samples;
  ss.form = sc.stochastic.form;
  ss.noise_substeps = sc.stochastic.noise_substeps;
  return ss;
}

inline std::string index_label(const std::string& prefix, std::size_t i, std::size_t count) {
  std::string digits = std::to_string(i);
  const std::size_t width = std::to_string(count > 0 ? count - 1 : 0).size();
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

}  // namespace detail

inline RunOutput run_scenario(const Scenario& sc) {
  RunOutput out;
  out.name = sc.name;
  detail::echo_scenario(out.meta, sc);

  switch (sc.route) {
    case Route::meanfield: {
      MeanfieldSystem sys{sc.variant, sc.trap, sc.cavity, sc.gamma_meas};
      IntegratorSettings is;
      is.dt = sc.grid.dt;
      is.stride = sc.grid.stride;
      is.samples = sc.grid.samples;
      out.artifacts.push_back({sc.name, integrate(sys, initial_bloch(sc), sc.initial.phase0, sc.grid.t0, sc.grid.t_end, is)});
      break;
    }
    case Route::perturbative: {
      const auto in = scenario_perturbation(sc);
      TimeSeries s;
      s.times = sample_times(sc.grid);
      for (const char* c : {"jx_zeroth", "jx_first_re", "jx_first_im", "jx_full", "phase_first_im"}) s.add_channel(c);
      auto& zeroth = s.extra[0].values;
      auto& first_re = s.extra[1].values;
      auto& first_im = s.extra[2].values;
      auto& full = s.extra[3].values;
      auto& phase_im = s.extra[4].values;
      for (double t : s.times) {
        const double tau = t - sc.grid.t0;
        zeroth.push_back(jx_zeroth(in, tau));
        const auto f = jx_first(in, tau);
        first_re.push_back(f.real());
        first_im.push_back(f.imag());
        full.push_back(jx_full(in, tau));
        s.phase.push_back(phase_full(in, tau));
        phase_im.push_back(phase_first(in, tau).imag());
        s.current.push_back(optical_bohd(s.phase.back(), in.cav_amp, in.lo_amp));
      }
      s.meta["route"] = "perturbative";
      s.meta["epsilon"] = format_double(in.rates.epsilon);
      s.meta["omega_prime"] = format_double(in.rates.omega_prime);
      s.meta["omega_eff"] = format_double(in.rates.omega_eff);
      s.meta["beta_mag"] = format_double(in.beta_mag);
      out.artifacts.push_back({sc.name, std::move(s)});
      break;
    }
    case Route::master: {
      const auto ops = build_spin_operators(sc.trap.n_atoms);
      MasterSettings ms;
      ms.dt = sc.grid.dt;
      ms.stride = sc.grid.stride;
      ms.samples = sc.grid.samples;
      auto res = evolve_master(initial_quantum_state(sc, ops), build_hamiltonian(sc.trap, sc.cavity, ops), ops,
                               scenario_gamma(sc), sc.grid.t0, sc.grid.t_end, ms);
      out.artifacts.push_back({sc.name, detail::map_to_cavity(res.series, sc)});
      break;
    }
    case Route::trajectory:
    case Route::fig5: {
      const auto ops = build_spin_operators(sc.trap.n_atoms);
      const auto h = build_hamiltonian(sc.trap, sc.cavity, ops);
      const auto psi = initial_quantum_state(sc, ops);
      const double gamma = scenario_gamma(sc);
      const std::size_t count = sc.stochastic.trajectories;
      if (count == 0) throw InvalidParameter("trajectories must be >= 1");
      auto runs = run_sse_ensemble(psi, h, ops, gamma, sc.grid.t0, sc.grid.t_end, sc.stochastic.seed, count,
                                   detail::sse_settings(sc), sc.stochastic.threads);
      std::vector<TimeSeries> mapped;
      mapped.reserve(count);
      for (auto& r : runs) mapped.push_back(detail::map_to_cavity(r.series, sc));
      TimeSeries mean = ensemble_average(mapped);
      for (std::size_t i = 0; i < count; ++i) {
        attach_record(mapped[i], runs[i].record);
        out.artifacts.push_back({detail::index_label(sc.name + "_traj", i, count), std::move(mapped[i])});
      }
      out.artifacts.push_back({sc.name + "_ensemble", std::move(mean)});
      if (sc.route == Route::fig5) {
        MasterSettings ms;
        ms.dt = sc.grid.dt;
        ms.stride = sc.grid.stride;
        ms.samples = sc.grid.samples;
        auto res = evolve_master(psi, h, ops, gamma, sc.grid.t0, sc.grid.t_end, ms);
        out.artifacts.push_back({sc.name + "_master", detail::map_to_cavity(res.series, sc)});
        out.figure = true;
      }
      out.meta["seed"] = std::to_string(sc.stochastic.seed);
      out.meta["trajectories"] = std::to_string(count);
      break;
    }
    case Route::fig3:
      out.artifacts.push_back({sc.name, fig3_series(sc)});
      out.figure = true;
      break;
    case Route::sweep:
      out.sweep = regime_sweep(sc);
      break;
  }
  return out;
}

inline RunOutput run_fig3(char variant) { return run_scenario(fig3_scenario(variant)); }

/// Both Fig. 4 parameterizations side by side. Each artifact's current comes
/// from the damped moments, the cavity phase and the optical homodyne stage.
inline RunOutput run_fig4() {
  RunOutput out;
  out.name = "fig4";
  out.figure = true;
  out.meta["scenario"] = "fig4";
  out.meta["parameterizations"] = "caption,text";
  for (const char* which : {"caption", "text"}) {
    auto run = run_scenario(fig4_scenario(which));
    run.artifacts.front().series.meta["parameterization"] = which;
    out.artifacts.push_back(std::move(run.artifacts.front()));
  }
  return out;
}

inline RunOutput run_fig5(int n_atoms = 10, std::size_t trajectories = 20, std::uint64_t seed = 2024) {
  return run_scenario(fig5_scenario(n_atoms, trajectories, seed));
}

}  // namespace dwh
