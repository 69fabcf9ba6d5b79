#pragma once

// Mean-field (factorized) Schwinger dynamics. Operator anticommutators are
// closed as [A,B]_+ -> 2<A><B>. Four right-hand sides are provided:
//
//   closed          full two-mode dynamics with self and cross collisions
//   rabi_limit      kappa -> eta: linear rotation at omega_prime
//   light_coupled   dispersive cavity coupling plus the cavity phase
//   damped_moments  measurement-averaged moments plus the cavity phase

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "dwh/errors.hpp"
#include "dwh/model.hpp"
#include "dwh/rk4.hpp"
#include "dwh/timeseries.hpp"

namespace dwh {

enum class Variant { closed, rabi_limit, light_coupled, damped_moments };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::closed: return "closed";
    case Variant::rabi_limit: return "rabi_limit";
    case Variant::light_coupled: return "light_coupled";
    case Variant::damped_moments: return "damped_moments";
  }
  return "unknown";
}

inline Variant variant_from_string(std::string_view s) {
  if (s == "closed") return Variant::closed;
  if (s == "rabi_limit") return Variant::rabi_limit;
  if (s == "light_coupled") return Variant::light_coupled;
  if (s == "damped_moments") return Variant::damped_moments;
  throw InvalidParameter("unknown mean-field variant '" + std::string(s) + "'");
}

struct MeanfieldVariant {
  Variant tag = Variant::closed;
  // light_coupled only: use the bare tunnelling rate in place of omega_prime,
  // since omega_prime already contains the 8 kappa jz(0) shift that the
  // explicit collision terms add again.
  bool double_count_guard = false;

  friend bool operator==(const MeanfieldVariant&, const MeanfieldVariant&) = default;
};

// ---------------------------------------------------------------------------
// Right-hand sides

/// Closed two-mode equations of motion.
inline BlochState deriv_closed(const BlochState& s, const TrapParams& trap) {
  const double w0 = trap.bare_tunneling();
  const double k = trap.kappa;
  const double e = trap.eta;
  return {-w0 * s.jy - 8.0 * e * s.jy * s.jz,
          w0 * s.jx - 4.0 * (k - 3.0 * e) * s.jz * s.jx,
          4.0 * (k - e) * s.jy * s.jx};
}

inline BlochState deriv_rabi(const BlochState& s, double omega_prime) {
  return {-omega_prime * s.jy, omega_prime * s.jx, 0.0};
}

/// d(phi)/dt = -xi (N/2 + <Jx>).
inline double cavity_phase_rate(double jx, double xi, int n_atoms) {
  return -xi * (0.5 * n_atoms + jx);
}

struct LightCoupledRate {
  BlochState state;
  double phase = 0.0;
};

inline LightCoupledRate deriv_light_coupled(const BlochState& s, double /*phase*/, const TrapParams& trap,
                                            const CavityParams& cavity, const DerivedRates& rates,
                                            bool guard) {
  const double w = guard ? trap.bare_tunneling() : rates.omega_prime;
  const double k = trap.kappa;
  const double g = cavity.coupling();
  return {{-w * s.jy - 8.0 * k * s.jy * s.jz,
           w * s.jx + 8.0 * k * s.jx * s.jz + g * s.jz,
           -g * s.jy},
          cavity_phase_rate(s.jx, cavity.xi, trap.n_atoms)};
}

/// Ensemble-averaged moments under continuous measurement of Jx.
inline BlochState deriv_damped_moments(const BlochState& s, double omega_prime,
                                       const CavityParams& cavity, double gamma_meas) {
  const double g = cavity.coupling();
  const double half = 0.5 * gamma_meas;
  return {-omega_prime * s.jy,
          omega_prime * s.jx + g * s.jz - half * s.jy,
          -g * s.jy - half * s.jz};
}

// ---------------------------------------------------------------------------
// Closed forms

/// Exact solution of jx' = -w jy, jy' = w jx, jz' = 0.
inline BlochState rabi_analytic(double jx0, double jy0, double omega_prime, double t, double jz0 = 0.0) {
  const double c = std::cos(omega_prime * t);
  const double s = std::sin(omega_prime * t);
  return {jx0 * c - jy0 * s, jy0 * c + jx0 * s, jz0};
}

/// Imbalance produced by the temporal beam splitter from equal populations:
/// <Jx(t)> = |beta| sin(omega_prime t) <X_{theta - pi/2}>.
inline double atomic_bohd_signal(double jy0, double beta_mag, double omega_prime, double t) {
  return beta_mag * std::sin(omega_prime * t) * quadrature_from_jy(jy0, beta_mag);
}

// ---------------------------------------------------------------------------
// Integration

struct MeanfieldSystem {
  MeanfieldVariant variant;
  TrapParams trap;
  CavityParams cavity;
  std::optional<double> gamma_meas;  // overrides 16 xi^2 drive^2 / gamma^2 when set
};

struct IntegratorSettings {
  double dt = 1e-3;
  std::size_t stride = 1;
  std::size_t samples = 0;  // when >= 2, overrides stride and refines dt to emit exactly this many
  bool enforce_step_guard = true;
  double max_step_phase = 0.1;      // dt * (fastest rate) must not exceed this
  double divergence_factor = 1.01;  // abort once |J|^2 > factor * j(j+1)
};

namespace detail {

struct MeanfieldPoint {
  BlochState s;
  double phase = 0.0;
  friend MeanfieldPoint operator+(const MeanfieldPoint& a, const MeanfieldPoint& b) {
    return {a.s + b.s, a.phase + b.phase};
  }
  friend MeanfieldPoint operator*(double k, const MeanfieldPoint& a) { return {k * a.s, k * a.phase}; }
};

inline bool carries_phase(Variant v) {
  return v == Variant::light_coupled || v == Variant::damped_moments;
}

}  // namespace detail

/// Fastest rate of the linearized dynamics, used for the step guard.
inline double max_frequency(const MeanfieldSystem& sys, const DerivedRates& rates, double gamma_meas,
                            double bloch_norm) {
  const auto& t = sys.trap;
  switch (sys.variant.tag) {
    case Variant::closed:
      return std::abs(t.bare_tunneling()) + 8.0 * (t.kappa + t.eta) * bloch_norm;
    case Variant::rabi_limit:
      return std::abs(rates.omega_prime);
    case Variant::light_coupled: {
      const double w = sys.variant.double_count_guard ? t.bare_tunneling() : rates.omega_prime;
      return std::abs(w) + 8.0 * t.kappa * bloch_norm + std::abs(sys.cavity.coupling());
    }
    case Variant::damped_moments:
      return std::abs(rates.omega_prime) + std::abs(sys.cavity.coupling()) + 0.5 * gamma_meas;
  }
  return 0.0;
}

/// Fixed-step RK4 integration of the selected variant over [t0, t1].
inline TimeSeries integrate(const MeanfieldSystem& sys, const BlochState& state0, double phase0, double t0,
                            double t1, const IntegratorSettings& settings) {
  sys.trap.validate();
  sys.cavity.validate();
  if (!within_casimir(state0, sys.trap.n_atoms))
    throw InvalidParameter("initial Bloch vector exceeds the Casimir bound j(j+1)");
  if (!std::isfinite(phase0)) throw InvalidParameter("phase0 must be finite");

  const DerivedRates rates = derived_rates(sys.trap, sys.cavity, state0.jz);
  const double gamma_meas = sys.gamma_meas.value_or(rates.gamma_meas);
  if (!(gamma_meas >= 0.0) || !std::isfinite(gamma_meas)) throw InvalidParameter("gamma_meas must be >= 0");

  const StepGrid grid = make_grid(t0, t1, settings.dt, settings.stride, settings.samples);
  const double fmax = max_frequency(sys, rates, gamma_meas, std::sqrt(state0.norm2()));
  if (settings.enforce_step_guard && grid.dt * fmax > settings.max_step_phase)
    throw InvalidParameter("dt too large: dt * max frequency = " + format_double(grid.dt * fmax) +
                           " exceeds " + format_double(settings.max_step_phase));

  const Variant tag = sys.variant.tag;
  const bool guard = sys.variant.double_count_guard;
  auto rhs = [&](double, const detail::MeanfieldPoint& p) -> detail::MeanfieldPoint {
    switch (tag) {
      case Variant::closed: return {deriv_closed(p.s, sys.trap), 0.0};
      case Variant::rabi_limit: return {deriv_rabi(p.s, rates.omega_prime), 0.0};
      case Variant::light_coupled: {
        auto r = deriv_light_coupled(p.s, p.phase, sys.trap, sys.cavity, rates, guard);
        return {r.state, r.phase};
      }
      case Variant::damped_moments:
        return {deriv_damped_moments(p.s, rates.omega_prime, sys.cavity, gamma_meas),
                cavity_phase_rate(p.s.jx, sys.cavity.xi, sys.trap.n_atoms)};
    }
    return {};
  };

  const bool with_phase = detail::carries_phase(tag);
  TimeSeries out;
  const std::size_t n_samples = grid.n_samples();
  out.times.reserve(n_samples);
  out.states.reserve(n_samples);
  if (with_phase) {
    out.phase.reserve(n_samples);
    out.current.reserve(n_samples);
  }
  auto emit = [&](std::size_t step, const detail::MeanfieldPoint& p) {
    out.times.push_back(grid.time(step));
    out.states.push_back(p.s);
    if (with_phase) {
      out.phase.push_back(p.phase);
      out.current.push_back(optical_bohd(p.phase, sys.cavity.cav_amp, sys.cavity.lo_amp));
    }
  };

  const double limit = settings.divergence_factor * sys.trap.casimir();
  detail::MeanfieldPoint p{state0, phase0};
  emit(0, p);
  for (std::size_t step = 1; step <= grid.n_steps; ++step) {
    p = rk4_step(p, grid.time(step - 1), grid.dt, rhs);
    const double n2 = p.s.norm2();
    if (!std::isfinite(n2) || n2 > limit)
      throw IntegrationDiverged("mean-field integration diverged at step " + std::to_string(step) +
                                    " (t = " + format_double(grid.time(step)) + ")",
                                step);
    if (step % grid.stride == 0) emit(step, p);
  }

  auto& m = out.meta;
  m["route"] = "meanfield";
  m["variant"] = std::string(to_string(tag));
  m["double_count_guard"] = guard ? "true" : "false";
  m["dt"] = format_double(grid.dt);
  m["dt_requested"] = format_double(settings.dt);
  m["stride"] = std::to_string(grid.stride);
  m["n_steps"] = std::to_string(grid.n_steps);
  m["t0"] = format_double(t0);
  m["t1"] = format_double(t1);
  m["omega_prime"] = format_double(rates.omega_prime);
  m["omega_eff"] = format_double(rates.omega_eff);
  m["gamma_meas"] = format_double(gamma_meas);
  return out;
}

/// Time average of jx(t)/jx(0): near 1 for a self-trapped run, near 0 for
/// full Rabi oscillation.
inline double selftrap_order_parameter(const TimeSeries& series) {
  if (series.states.size() < 2 || series.states.size() != series.times.size())
    throw InvalidParameter("order parameter needs a series with at least two states");
  const double jx0 = series.states.front().jx;
  if (jx0 == 0.0) throw InvalidParameter("order parameter undefined for jx(0) = 0");
  double area = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i)
    area += 0.5 * (series.times[i] - series.times[i - 1]) * (series.states[i].jx + series.states[i - 1].jx);
  return area / (jx0 * (series.times.back() - series.times.front()));
}

}  // namespace dwh
