#pragma once

// Closed-form first-order expansion in epsilon = kappa / (xi N_f) of the
// light-coupled condensate: imbalance, cavity phase and homodyne current.
//
// Quadrature profiles are functions of time. The default zeroth-order profile
// is the one generated by equal initial populations and initial momentum
// jy0 under the dressed rotation,
//   X0(t) = -(jy0 / |beta|) cos(omega t),
// which makes jx_zeroth the exact kappa = 0 solution and phase_zeroth equal
// to phase_trajectory.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "dwh/errors.hpp"
#include "dwh/model.hpp"

namespace dwh {

using QuadratureProfile = std::function<double(double)>;

inline QuadratureProfile constant_profile(double x) {
  return [x](double) { return x; };
}

inline QuadratureProfile rabi_profile(double jy0, double beta_mag, double omega_eff) {
  const double x0 = quadrature_from_jy(jy0, beta_mag);
  return [x0, omega_eff](double t) { return x0 * std::cos(omega_eff * t); };
}

struct PerturbationInputs {
  DerivedRates rates;
  int n_atoms = 1;
  double xi = 0.0;
  double beta_mag = 1.0;
  double jy0 = 0.0;
  double cav_amp = 1.0;
  double lo_amp = 1.0;
  QuadratureProfile x_quad_zero;
  QuadratureProfile x_quad_one;
};

/// Inputs with the default profiles. |beta| defaults to sqrt(N/2), the
/// reference-mode amplitude of an evenly split condensate; the first-order
/// profile reuses the zeroth-order one.
inline PerturbationInputs make_perturbation_inputs(const DerivedRates& rates, int n_atoms, double xi, double jy0,
                                                   double beta_mag = 0.0) {
  PerturbationInputs in;
  in.rates = rates;
  in.n_atoms = n_atoms;
  in.xi = xi;
  in.jy0 = jy0;
  in.beta_mag = beta_mag > 0.0 ? beta_mag : std::sqrt(0.5 * n_atoms);
  in.x_quad_zero = rabi_profile(jy0, in.beta_mag, rates.omega_eff);
  in.x_quad_one = in.x_quad_zero;
  return in;
}

namespace detail {
inline void require_omega(const PerturbationInputs& in) {
  if (!(in.rates.omega_eff > 0.0)) throw InvalidParameter("omega_eff must be positive");
}
inline void require_omega_prime(const PerturbationInputs& in) {
  require_omega(in);
  if (in.rates.omega_prime == 0.0) throw InvalidParameter("omega_prime must be non-zero");
}
inline double epsilon_or_zero(const PerturbationInputs& in) {
  // A run without cavity coupling has no expansion; only the zeroth order survives.
  return in.rates.has_epsilon() ? in.rates.epsilon : 0.0;
}
}  // namespace detail

/// Zeroth order: (omega'/omega) |beta| X0(t - pi / (2 omega)).
inline double jx_zeroth(const PerturbationInputs& in, double t) {
  detail::require_omega(in);
  const double w = in.rates.omega_eff;
  return in.rates.omega_prime / w * in.beta_mag * in.x_quad_zero(t - std::numbers::pi / (2.0 * w));
}

/// First-order term from variation of parameters. The printed closed form has
/// an imaginary part; observables use the real part.
inline std::complex<double> jx_first(const PerturbationInputs& in, double t) {
  detail::require_omega_prime(in);
  const double w = in.rates.omega_eff;
  const double wp = in.rates.omega_prime;
  const double c2 = std::cos(2.0 * w * t);
  const double s2 = std::sin(2.0 * w * t);
  const double s1 = std::sin(w * t);
  const std::complex<double> bracket(1.5 * t + c2 * s2 / (4.0 * w), -(3.0 * w / (wp * wp)) * s1 * s1);
  return wp * in.beta_mag / (1.0 + c2 * c2) * bracket * in.x_quad_one(t);
}

inline double jx_full(const PerturbationInputs& in, double t) {
  const double eps = detail::epsilon_or_zero(in);
  const double zeroth = jx_zeroth(in, t);
  if (eps == 0.0) return zeroth;
  return zeroth + eps * jx_first(in, t).real();
}

/// phi0(t) = xi ( omega' |beta| / omega^2 X0(t) - N t / 2 ).
inline double phase_zeroth(const PerturbationInputs& in, double t) {
  detail::require_omega(in);
  const double w = in.rates.omega_eff;
  return in.xi * (in.rates.omega_prime * in.beta_mag / (w * w) * in.x_quad_zero(t) - 0.5 * in.n_atoms * t);
}

inline std::complex<double> phase_first(const PerturbationInputs& in, double t) {
  detail::require_omega_prime(in);
  const double w = in.rates.omega_eff;
  const double wp = in.rates.omega_prime;
  const double c2 = std::cos(2.0 * w * t);
  const double s2 = std::sin(2.0 * w * t);
  const double s1 = std::sin(w * t);
  const double c1 = std::cos(w * t);
  const std::complex<double> bracket(0.75 * t * t + s2 * s2 / (16.0 * w * w),
                                     -(3.0 * w / (2.0 * wp * wp)) * (t - s1 * c1 / w));
  const std::complex<double> modulated = wp * in.beta_mag / (1.0 + c2 * c2) * bracket * in.x_quad_one(t);
  return -in.xi * (0.5 * in.n_atoms * t + modulated);
}

inline double phase_full(const PerturbationInputs& in, double t) {
  const double eps = detail::epsilon_or_zero(in);
  const double zeroth = phase_zeroth(in, t);
  if (eps == 0.0) return zeroth;
  return zeroth + eps * phase_first(in, t).real();
}

/// Inverse of phase_zeroth: the condensate quadrature inferred from the light phase.
inline double quadrature_from_phase(double phase, double t, const PerturbationInputs& in) {
  if (in.xi == 0.0) throw InvalidParameter("xi = 0: the light phase carries no condensate information");
  if (!(in.rates.omega_prime > 0.0)) throw InvalidParameter("omega_prime must be positive");
  detail::require_beta(in.beta_mag);
  const double w = in.rates.omega_eff;
  return w * w / (in.rates.omega_prime * in.beta_mag) * (phase / in.xi + 0.5 * in.n_atoms * t);
}

namespace detail {
// xi ( omega'/omega^2 cos(omega t) jy0 + N t / 2 ), shared so that the phase
// and the current are exact negatives of the same number.
inline double phase_argument(double jy0, const PerturbationInputs& in, double t) {
  require_omega(in);
  const double w = in.rates.omega_eff;
  return in.xi * (in.rates.omega_prime / (w * w) * std::cos(w * t) * jy0 + 0.5 * in.n_atoms * t);
}
}  // namespace detail

/// Explicit zeroth-order cavity phase for equal initial populations.
inline double phase_trajectory(double jy0, const PerturbationInputs& in, double t) {
  return -detail::phase_argument(jy0, in, t);
}

/// |c||d| sin[ xi ( omega'/omega^2 cos(omega t) jy0 + N t / 2 ) ].
inline double homodyne_current_analytic(double jy0, const PerturbationInputs& in, double t) {
  return in.cav_amp * in.lo_amp * std::sin(detail::phase_argument(jy0, in, t));
}

}  // namespace dwh
