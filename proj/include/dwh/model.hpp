#pragma once

// Physical parameters of the double-well condensate and its optical readout,
// the composite rates built from them, and the homodyne identities that tie
// population imbalance, matter-wave quadrature and cavity phase together.
//
// Conventions: hbar = 1, every rate is an angular frequency (rad/s), and the
// Schwinger components follow the imbalance-first naming
//   Jx = (b'b - a'a)/2   population imbalance
//   Jy = i(b'a - a'b)/2  relative momentum
//   Jz = (a'b + b'a)/2   tunnelling coherence

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "dwh/errors.hpp"

namespace dwh {

struct TrapParams {
  double omega = 0.0;   // tunnelling rate
  double kappa = 0.0;   // self-collision rate
  double eta = 0.0;     // cross-collision rate
  double lambda = 0.0;  // cross-collision tunnelling correction
  int n_atoms = 1;

  double j() const noexcept { return 0.5 * n_atoms; }
  double casimir() const noexcept { return j() * (j() + 1.0); }

  // Omega + 2 Lambda (N - 1): the tunnelling rate before the collisional shift.
  double bare_tunneling() const noexcept { return omega + 2.0 * lambda * (n_atoms - 1); }

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (n_atoms < 1) out.push_back("n_atoms must be >= 1");
    if (!std::isfinite(omega)) out.push_back("omega must be finite");
    if (!std::isfinite(lambda)) out.push_back("lambda must be finite");
    if (!(std::isfinite(kappa) && kappa >= 0.0)) out.push_back("kappa must be finite and >= 0");
    if (!(std::isfinite(eta) && eta >= 0.0)) out.push_back("eta must be finite and >= 0");
    return out;
  }

  void validate() const {
    if (auto v = violations(); !v.empty()) throw ValidationError(std::move(v));
  }

  friend bool operator==(const TrapParams&, const TrapParams&) = default;
};

struct CavityParams {
  double xi = 0.0;         // dispersive coupling
  double n_photons = 0.0;  // mean intracavity photon number N_f
  double gamma = 1.0;      // cavity damping
  double drive = 0.0;      // coherent drive strength
  double detuning = 0.0;
  double lo_amp = 1.0;   // |d|
  double cav_amp = 1.0;  // |c|

  // xi N_f, the light-induced rotation rate of the Bloch vector.
  double coupling() const noexcept { return xi * n_photons; }

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    auto finite = [&](double v, const char* name) {
      if (!std::isfinite(v)) out.push_back(std::string(name) + " must be finite");
    };
    finite(xi, "xi");
    finite(drive, "drive");
    finite(detuning, "detuning");
    if (!(std::isfinite(n_photons) && n_photons >= 0.0)) out.push_back("n_photons must be >= 0");
    if (!(std::isfinite(gamma) && gamma >= 0.0)) out.push_back("gamma must be >= 0");
    if (!(std::isfinite(lo_amp) && lo_amp >= 0.0)) out.push_back("lo_amp must be >= 0");
    if (!(std::isfinite(cav_amp) && cav_amp >= 0.0)) out.push_back("cav_amp must be >= 0");
    return out;
  }

  void validate() const {
    if (auto v = violations(); !v.empty()) throw ValidationError(std::move(v));
  }

  friend bool operator==(const CavityParams&, const CavityParams&) = default;
};

struct DerivedRates {
  double omega_prime = 0.0;  // effective tunnelling frequency
  double omega_eff = 0.0;    // dressed frequency sqrt(omega_prime^2 + (xi N_f)^2)
  double epsilon = 0.0;      // kappa / (xi N_f); +inf when there is no cavity coupling
  double gamma_meas = 0.0;   // measurement strength 16 xi^2 drive^2 / gamma^2

  bool has_epsilon() const noexcept { return std::isfinite(epsilon); }
};

inline constexpr double kNoEpsilon = std::numeric_limits<double>::infinity();

/// Composite rates for a run whose initial tunnelling coherence is `jz0`.
inline DerivedRates derived_rates(const TrapParams& trap, const CavityParams& cavity, double jz0) {
  trap.validate();
  cavity.validate();
  if (!std::isfinite(jz0)) throw InvalidParameter("jz0 must be finite");

  DerivedRates r;
  r.omega_prime = trap.bare_tunneling() + 8.0 * trap.kappa * jz0;
  const double g = cavity.coupling();
  r.omega_eff = std::hypot(r.omega_prime, g);
  r.epsilon = (g == 0.0) ? kNoEpsilon : trap.kappa / g;
  if (cavity.drive == 0.0) {
    r.gamma_meas = 0.0;
  } else {
    if (cavity.gamma == 0.0)
      throw InvalidParameter("gamma: measurement strength needs a damped cavity (gamma > 0)");
    const double ratio = cavity.xi * cavity.drive / cavity.gamma;
    r.gamma_meas = 16.0 * ratio * ratio;
  }
  return r;
}

struct BlochState {
  double jx = 0.0;
  double jy = 0.0;
  double jz = 0.0;

  double norm2() const noexcept { return jx * jx + jy * jy + jz * jz; }

  friend BlochState operator+(BlochState a, const BlochState& b) noexcept {
    return {a.jx + b.jx, a.jy + b.jy, a.jz + b.jz};
  }
  friend BlochState operator-(BlochState a, const BlochState& b) noexcept {
    return {a.jx - b.jx, a.jy - b.jy, a.jz - b.jz};
  }
  friend BlochState operator*(double s, const BlochState& a) noexcept {
    return {s * a.jx, s * a.jy, s * a.jz};
  }
  friend bool operator==(const BlochState&, const BlochState&) = default;
};

// Physicality bound jx^2 + jy^2 + jz^2 <= j(j+1).
inline bool within_casimir(const BlochState& s, int n_atoms, double slack = 1.0) {
  const double j = 0.5 * n_atoms;
  return s.norm2() <= slack * j * (j + 1.0);
}

struct CondensateSignal {
  double beta_mag = 0.0;  // |beta| of the reference (coherent) mode
  double theta = 0.0;     // its phase
  double x_quad = 0.0;    // <X_{theta - pi/2}> of the signal mode
};

namespace detail {
inline void require_beta(double beta_mag) {
  if (!(beta_mag > 0.0) || !std::isfinite(beta_mag))
    throw InvalidParameter("beta_mag must be positive and finite");
}
}  // namespace detail

/// Signal quadrature carried by an initial momentum: <X> = -<Jy(0)> / |beta|.
inline double quadrature_from_jy(double jy0, double beta_mag) {
  detail::require_beta(beta_mag);
  return -jy0 / beta_mag;
}

/// Quadrature read off a measured imbalance at a 50:50 time: <X> = <Jx> / |beta|.
inline double atomic_bohd_invert(double jx, double beta_mag) {
  detail::require_beta(beta_mag);
  return jx / beta_mag;
}

inline CondensateSignal condensate_signal(double jy0, double beta_mag, double theta = 0.0) {
  return {beta_mag, theta, quadrature_from_jy(jy0, beta_mag)};
}

/// Times t_n = (2n+1) pi / (2 omega_prime), n = 0..n_max, at which the double
/// well acts as a balanced beam splitter.
inline std::vector<double> optimal_beamsplitter_times(double omega_prime, int n_max) {
  if (!(omega_prime > 0.0) || !std::isfinite(omega_prime))
    throw InvalidParameter("omega_prime must be positive");
  if (n_max < 0) throw InvalidParameter("n_max must be >= 0");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n)
    out.push_back((2.0 * n + 1.0) * std::numbers::pi / (2.0 * omega_prime));
  return out;
}

/// Photocount difference of the optical homodyne stage, -|c||d| sin(phase).
inline double optical_bohd(double phase, double cav_amp = 1.0, double lo_amp = 1.0) {
  return -cav_amp * lo_amp * std::sin(phase);
}

}  // namespace dwh
