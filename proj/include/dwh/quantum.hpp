#pragma once

// Exact dynamics in the fixed-N (Dicke) sector of dimension N + 1.
//
// Matrices are written in the eigenbasis of the imbalance Jx, ordered
// m = -j, ..., +j, so the measured observable and the dephasing it causes are
// diagonal. Jy and Jz are built from the ladder operator about the x axis,
// J+ = Jy + i Jz.
//
// Unconditional evolution integrates
//   rho' = -i[H, rho] - (Gamma/2) [Jx, [Jx, rho]]
// and conditional evolution follows the diffusive homodyne unravelling
//   dpsi = [-iH dt - (Gamma/2)(Jx - <Jx>)^2 dt + sqrt(Gamma)(Jx - <Jx>) dW] psi
//   I(t) = 2 Gamma <Jx> + sqrt(Gamma) dW/dt.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <variant>
#include <vector>

#include "dwh/errors.hpp"
#include "dwh/model.hpp"
#include "dwh/rk4.hpp"
#include "dwh/timeseries.hpp"

namespace dwh {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr int kDimensionCap = 512;

struct SpinOperators {
  int n_atoms = 0;
  CMatrix jx, jy, jz, j2;

  Eigen::Index dim() const noexcept { return jx.rows(); }
  double j() const noexcept { return 0.5 * n_atoms; }
  // Jx eigenvalue of basis index k.
  double m(Eigen::Index k) const noexcept { return static_cast<double>(k) - j(); }
};

inline SpinOperators build_spin_operators(int n_atoms, int cap = kDimensionCap) {
  if (n_atoms < 1) throw InvalidParameter("n_atoms must be >= 1");
  if (n_atoms > cap)
    throw ResourceLimit("n_atoms = " + std::to_string(n_atoms) + " exceeds the dimension cap " +
                        std::to_string(cap));
  SpinOperators ops;
  ops.n_atoms = n_atoms;
  const Eigen::Index d = n_atoms + 1;
  const double j = ops.j();

  CMatrix raise = CMatrix::Zero(d, d);
  ops.jx = CMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double m = ops.m(k);
    ops.jx(k, k) = m;
    if (k + 1 < d) raise(k + 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  const CMatrix lower = raise.adjoint();
  ops.jy = 0.5 * (raise + lower);
  ops.jz = Complex(0.0, -0.5) * (raise - lower);
  ops.j2 = ops.jx * ops.jx + ops.jy * ops.jy + ops.jz * ops.jz;
  return ops;
}

/// [Omega + 2 Lambda (N-1)] Jz + 4 eta Jz^2 + 2 (kappa - eta) Jx^2 - xi N_f Jx,
/// with the cavity treated as an undepleted classical field. The constant
/// -xi N N_f / 2 is a global phase and is dropped.
inline CMatrix build_hamiltonian(const TrapParams& trap, const CavityParams& cavity, const SpinOperators& ops) {
  trap.validate();
  cavity.validate();
  if (trap.n_atoms != ops.n_atoms) throw InvalidParameter("trap n_atoms does not match the operator set");
  CMatrix h = trap.bare_tunneling() * ops.jz;
  h += 4.0 * trap.eta * (ops.jz * ops.jz);
  h += 2.0 * (trap.kappa - trap.eta) * (ops.jx * ops.jx);
  h -= cavity.coupling() * ops.jx;
  return h;
}

class QuantumState {
 public:
  static QuantumState pure(CVector psi) { return QuantumState(std::move(psi)); }
  static QuantumState mixed(CMatrix rho) { return QuantumState(std::move(rho)); }

  bool is_pure() const noexcept { return std::holds_alternative<CVector>(data_); }
  const CVector& vector() const { return std::get<CVector>(data_); }
  const CMatrix& matrix() const { return std::get<CMatrix>(data_); }

  Eigen::Index dim() const { return is_pure() ? vector().size() : matrix().rows(); }

  CMatrix density() const {
    if (is_pure()) return vector() * vector().adjoint();
    return matrix();
  }

  void validate(double tol = 1e-10, double positivity_tol = 1e-8) const {
    if (is_pure()) {
      if (std::abs(vector().squaredNorm() - 1.0) > tol) throw InvalidParameter("pure state is not normalized");
      return;
    }
    const CMatrix& r = matrix();
    if (r.rows() != r.cols()) throw InvalidParameter("density matrix must be square");
    if (std::abs(r.trace() - Complex(1.0, 0.0)) > tol) throw InvalidParameter("density matrix trace is not 1");
    if ((r - r.adjoint()).cwiseAbs().maxCoeff() > tol) throw InvalidParameter("density matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(r, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -positivity_tol)
      throw InvalidParameter("density matrix is not positive semidefinite");
  }

 private:
  explicit QuantumState(CVector v) : data_(std::move(v)) {}
  explicit QuantumState(CMatrix m) : data_(std::move(m)) {}
  std::variant<CVector, CMatrix> data_;
};

inline double expectation(const CMatrix& op, const CVector& psi) {
  return (psi.adjoint() * op * psi)(0, 0).real() / psi.squaredNorm();
}

inline double expectation(const CMatrix& op, const CMatrix& rho) { return (op * rho).trace().real(); }

inline BlochState bloch_vector(const SpinOperators& ops, const CVector& psi) {
  return {expectation(ops.jx, psi), expectation(ops.jy, psi), expectation(ops.jz, psi)};
}

inline BlochState bloch_vector(const SpinOperators& ops, const CMatrix& rho) {
  return {expectation(ops.jx, rho), expectation(ops.jy, rho), expectation(ops.jz, rho)};
}

/// SU(2) coherent state pointing along (theta, phi) measured from +x:
/// <Jx> = j cos(theta), <Jy> = j sin(theta) cos(phi), <Jz> = j sin(theta) sin(phi).
inline QuantumState coherent_spin_state(double theta, double phi, const SpinOperators& ops) {
  const Eigen::Index d = ops.dim();
  const double two_j = static_cast<double>(ops.n_atoms);
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  CVector psi(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double up = static_cast<double>(k);  // j + m
    const double down = two_j - up;            // j - m
    double mag = 0.0;
    const bool vanishes = (c == 0.0 && up > 0) || (s == 0.0 && down > 0);
    if (!vanishes) {
      double log_mag = 0.5 * (std::lgamma(two_j + 1.0) - std::lgamma(up + 1.0) - std::lgamma(down + 1.0));
      if (up > 0) log_mag += up * std::log(std::abs(c));
      if (down > 0) log_mag += down * std::log(std::abs(s));
      mag = std::exp(log_mag);
      const bool negative = (c < 0.0 && static_cast<long>(up) % 2 == 1) != (s < 0.0 && static_cast<long>(down) % 2 == 1);
      if (negative) mag = -mag;
    }
    psi(k) = mag * std::polar(1.0, -ops.m(k) * phi);
  }
  psi.normalize();
  return QuantumState::pure(std::move(psi));
}

/// exp(-i H tau) by diagonalization.
inline CMatrix propagator(const CMatrix& h, double tau) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const auto& lam = es.eigenvalues();
  CVector phases(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k) phases(k) = std::polar(1.0, -lam(k) * tau);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline double spectral_width(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Master equation

struct MasterSettings {
  double dt = 1e-3;
  std::size_t stride = 1;
  std::size_t samples = 0;
  bool keep_states = false;
  double max_step_phase = 1.0;  // dt * (spectral width of H + Gamma/2 (2j)^2)
  double positivity_tol = 1e-8;
  double trace_tol = 1e-10;
};

struct MasterResult {
  TimeSeries series;            // jx, jy, jz and a "purity" channel
  std::vector<CMatrix> states;  // filled when keep_states is set
};

inline MasterResult evolve_master(const QuantumState& initial, const CMatrix& h, const SpinOperators& ops,
                                  double gamma_meas, double t0, double t1, const MasterSettings& settings) {
  if (initial.dim() != ops.dim() || h.rows() != ops.dim())
    throw InvalidParameter("state, Hamiltonian and operators have different dimensions");
  if (!(gamma_meas >= 0.0) || !std::isfinite(gamma_meas)) throw InvalidParameter("gamma_meas must be >= 0");
  initial.validate();

  const StepGrid grid = make_grid(t0, t1, settings.dt, settings.stride, settings.samples);
  const double two_j = static_cast<double>(ops.n_atoms);
  const double rate = spectral_width(h) + 0.5 * gamma_meas * two_j * two_j;
  if (grid.dt * rate > settings.max_step_phase)
    throw StepSizeError("dt = " + format_double(grid.dt) + " does not resolve the dynamics (dt * rate = " +
                        format_double(grid.dt * rate) + "); reduce dt");

  const Eigen::Index d = ops.dim();
  Eigen::MatrixXd damping(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) {
      const double dm = ops.m(a) - ops.m(b);
      damping(a, b) = -0.5 * gamma_meas * dm * dm;
    }
  const CMatrix minus_i_h = Complex(0.0, -1.0) * h;
  auto rhs = [&](double, const CMatrix& rho) -> CMatrix {
    CMatrix out = minus_i_h * rho - rho * minus_i_h;
    out += damping.cast<Complex>().cwiseProduct(rho);
    return out;
  };

  MasterResult result;
  auto& series = result.series;
  auto& purity = series.add_channel("purity");
  auto emit = [&](std::size_t step, const CMatrix& rho) {
    if (std::abs(rho.trace() - Complex(1.0, 0.0)) > settings.trace_tol)
      throw StepSizeError("trace drifted at t = " + format_double(grid.time(step)) + "; reduce dt");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -settings.positivity_tol)
      throw StepSizeError("density matrix lost positivity at t = " + format_double(grid.time(step)) +
                          "; reduce dt");
    series.times.push_back(grid.time(step));
    series.states.push_back(bloch_vector(ops, rho));
    purity.push_back(rho.cwiseAbs2().sum());
    if (settings.keep_states) result.states.push_back(rho);
  };

  CMatrix rho = initial.density();
  emit(0, rho);
  for (std::size_t step = 1; step <= grid.n_steps; ++step) {
    rho = rk4_step(rho, grid.time(step - 1), grid.dt, rhs);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    if (step % grid.stride == 0) emit(step, rho);
  }

  auto& m = series.meta;
  m["route"] = "master";
  m["n_atoms"] = std::to_string(ops.n_atoms);
  m["gamma_meas"] = format_double(gamma_meas);
  m["dt"] = format_double(grid.dt);
  m["dt_requested"] = format_double(settings.dt);
  m["stride"] = std::to_string(grid.stride);
  m["n_steps"] = std::to_string(grid.n_steps);
  m["t0"] = format_double(t0);
  m["t1"] = format_double(t1);
  return result;
}

// ---------------------------------------------------------------------------
// Conditional (diffusive) trajectories

enum class SseForm {
  normalized,  // norm-preserving unravelling (default)
  linear,      // unnormalized propagation driven by the recorded current; norm kept as a channel
};

struct SseSettings {
  double dt = 1e-3;
  std::size_t stride = 1;
  std::size_t samples = 0;
  SseForm form = SseForm::normalized;
  double max_measurement_step = 0.1;  // Gamma j^2 dt
  // Each step's Wiener increment is the sum of this many draws of variance
  // dt / noise_substeps. A run at dt with k substeps sees the same Brownian
  // path as a run at dt / k with one, so step-size studies are coupled.
  std::size_t noise_substeps = 1;
};

// Homodyne record at the emission resolution: entry k covers
// (times[k] - dt, times[k]], current is the mean photocurrent over that
// interval and noise_increments the summed Wiener increment.
struct HomodyneRecord {
  std::vector<double> times;
  std::vector<double> current;
  std::vector<double> noise_increments;
  std::uint64_t seed = 0;
  double dt = 0.0;
  double gamma_meas = 0.0;

  std::size_t size() const noexcept { return times.size(); }
};

struct Trajectory {
  TimeSeries series;
  HomodyneRecord record;
};

/// splitmix64 mix of (master seed, trajectory index): one independent
/// generator stream per trajectory.
inline std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Trajectory sse_trajectory(const QuantumState& initial, const CMatrix& h, const SpinOperators& ops,
                                 double gamma_meas, double t0, double t1, std::uint64_t seed,
                                 const SseSettings& settings) {
  if (!initial.is_pure()) throw InvalidParameter("trajectories need a pure initial state");
  if (initial.dim() != ops.dim() || h.rows() != ops.dim())
    throw InvalidParameter("state, Hamiltonian and operators have different dimensions");
  if (!(gamma_meas >= 0.0) || !std::isfinite(gamma_meas)) throw InvalidParameter("gamma_meas must be >= 0");
  initial.validate();

  const StepGrid grid = make_grid(t0, t1, settings.dt, settings.stride, settings.samples);
  const double j = ops.j();
  if (gamma_meas * j * j * grid.dt > settings.max_measurement_step)
    throw StepSizeError("dt too large for the measurement strength (Gamma j^2 dt = " +
                        format_double(gamma_meas * j * j * grid.dt) + ")");

  // Strang splitting: half a unitary step, the measurement update, half a
  // unitary step. Jx is diagonal, so the measurement update is the exact
  // solution of the linear equation for a given record increment,
  // psi_m *= exp(sqrt(Gamma) m dY - Gamma m^2 dt).
  const CMatrix half_step = propagator(h, 0.5 * grid.dt);
  const Eigen::Index d = ops.dim();
  Eigen::VectorXd m_values(d);
  for (Eigen::Index k = 0; k < d; ++k) m_values(k) = ops.m(k);

  if (settings.noise_substeps == 0) throw InvalidParameter("noise_substeps must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sqrt_sub = std::sqrt(grid.dt / static_cast<double>(settings.noise_substeps));
  const double sqrt_gamma = std::sqrt(gamma_meas);
  const bool linear = settings.form == SseForm::linear;

  Trajectory out;
  auto& series = out.series;
  auto& rec = out.record;
  rec.seed = seed;
  rec.dt = grid.dt * static_cast<double>(grid.stride);
  rec.gamma_meas = gamma_meas;
  std::vector<double>* log_norm = linear ? &series.add_channel("log_norm") : nullptr;

  CVector psi = initial.vector();
  double log_norm_acc = 0.0;
  auto emit = [&](std::size_t step) {
    series.times.push_back(grid.time(step));
    series.states.push_back(bloch_vector(ops, psi));
    if (log_norm) log_norm->push_back(log_norm_acc);
  };

  emit(0);
  double block_dy = 0.0;  // sum of sqrt(Gamma) * dY over the current block
  double block_dw = 0.0;
  for (std::size_t step = 1; step <= grid.n_steps; ++step) {
    psi = half_step * psi;
    const double mean_jx = psi.cwiseAbs2().dot(m_values) / psi.squaredNorm();
    double dw = 0.0;
    for (std::size_t k = 0; k < settings.noise_substeps; ++k) dw += sqrt_sub * normal(rng);
    const double dy = 2.0 * sqrt_gamma * mean_jx * grid.dt + dw;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double m = m_values(k);
      psi(k) *= std::exp(sqrt_gamma * m * dy - gamma_meas * m * m * grid.dt);
    }
    const double n2 = psi.squaredNorm();
    if (!(n2 > 1e-12) || !std::isfinite(n2))
      throw StepSizeError("state norm collapsed at t = " + format_double(grid.time(step)) + "; reduce dt");
    // The linear form only differs by its norm, which is tracked in log form
    // so that it cannot underflow.
    if (linear) log_norm_acc += 0.5 * std::log(n2);
    psi /= std::sqrt(n2);
    psi = half_step * psi;

    block_dy += sqrt_gamma * dy;
    block_dw += dw;
    if (step % grid.stride == 0) {
      rec.times.push_back(grid.time(step));
      rec.current.push_back(block_dy / rec.dt);
      rec.noise_increments.push_back(block_dw);
      block_dy = 0.0;
      block_dw = 0.0;
      emit(step);
    }
  }

  auto& m = series.meta;
  m["route"] = "trajectory";
  m["sse_form"] = linear ? "linear" : "normalized";
  m["n_atoms"] = std::to_string(ops.n_atoms);
  m["gamma_meas"] = format_double(gamma_meas);
  m["seed"] = std::to_string(seed);
  m["dt"] = format_double(grid.dt);
  m["dt_requested"] = format_double(settings.dt);
  m["stride"] = std::to_string(grid.stride);
  m["n_steps"] = std::to_string(grid.n_steps);
  m["noise_substeps"] = std::to_string(settings.noise_substeps);
  m["t0"] = format_double(t0);
  m["t1"] = format_double(t1);
  return out;
}

/// Adds the record to its series as "photocurrent" and "dW" channels. Row 0
/// has no preceding interval: dW = 0 and the photocurrent is nan.
inline void attach_record(TimeSeries& series, const HomodyneRecord& rec) {
  if (rec.size() + 1 != series.size()) throw AlignmentError("record does not match the series grid");
  std::vector<double> current{std::nan("")};
  std::vector<double> dw{0.0};
  current.insert(current.end(), rec.current.begin(), rec.current.end());
  dw.insert(dw.end(), rec.noise_increments.begin(), rec.noise_increments.end());
  series.extra.push_back({"photocurrent", std::move(current)});
  series.extra.push_back({"dW", std::move(dw)});
  series.meta["seed"] = std::to_string(rec.seed);
  series.meta["record_dt"] = format_double(rec.dt);
}

/// Independent trajectories, stream i seeded with trajectory_seed(master, i).
/// Results are stored by index, so the output does not depend on scheduling.
inline std::vector<Trajectory> run_sse_ensemble(const QuantumState& initial, const CMatrix& h,
                                                const SpinOperators& ops, double gamma_meas, double t0,
                                                double t1, std::uint64_t master_seed, std::size_t count,
                                                const SseSettings& settings, unsigned threads = 0) {
  std::vector<Trajectory> out(count);
  if (count == 0) return out;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));

  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned worker) {
    try {
      for (std::size_t i = worker; i < count; i += threads)
        out[i] = sse_trajectory(initial, h, ops, gamma_meas, t0, t1, trajectory_seed(master_seed, i), settings);
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

namespace detail {
inline bool same_grid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 1e-9 * std::max(1.0, std::abs(a[i]))) return false;
  return true;
}

struct MeanAccumulator {
  std::vector<double> sum, sum_sq;
  explicit MeanAccumulator(std::size_t n) : sum(n, 0.0), sum_sq(n, 0.0) {}
  void add(std::size_t i, double v) {
    sum[i] += v;
    sum_sq[i] += v * v;
  }
  // Mean and standard error (sample standard deviation / sqrt(n)).
  std::pair<double, double> at(std::size_t i, std::size_t n) const {
    const double mean = sum[i] / static_cast<double>(n);
    if (n < 2) return {mean, 0.0};
    const double var = std::max(0.0, (sum_sq[i] - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1));
    return {mean, std::sqrt(var / static_cast<double>(n))};
  }
};
}  // namespace detail

/// Per-sample mean of every channel plus "<channel>_se" standard errors.
inline TimeSeries ensemble_average(std::span<const TimeSeries> runs) {
  if (runs.empty()) throw InvalidParameter("ensemble_average needs at least one series");
  const TimeSeries& first = runs.front();
  const std::size_t n = first.size();
  for (const auto& r : runs) {
    if (!detail::same_grid(r.times, first.times)) throw AlignmentError("ensemble members do not share a time grid");
    if (r.has_states() != first.has_states() || r.has_phase() != first.has_phase() ||
        r.has_current() != first.has_current())
      throw AlignmentError("ensemble members carry different channels");
  }
  const std::size_t count = runs.size();
  TimeSeries out;
  out.times = first.times;
  out.meta = first.meta;
  out.meta["ensemble_size"] = std::to_string(count);
  out.meta.erase("seed");

  if (first.has_states()) {
    detail::MeanAccumulator ax(n), ay(n), az(n);
    for (const auto& r : runs)
      for (std::size_t i = 0; i < n; ++i) {
        ax.add(i, r.states[i].jx);
        ay.add(i, r.states[i].jy);
        az.add(i, r.states[i].jz);
      }
    out.states.resize(n);
    std::vector<double> sx(n), sy(n), sz(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::tie(out.states[i].jx, sx[i]) = ax.at(i, count);
      std::tie(out.states[i].jy, sy[i]) = ay.at(i, count);
      std::tie(out.states[i].jz, sz[i]) = az.at(i, count);
    }
    out.extra.push_back({"jx_se", std::move(sx)});
    out.extra.push_back({"jy_se", std::move(sy)});
    out.extra.push_back({"jz_se", std::move(sz)});
  }
  auto reduce = [&](auto member, std::vector<double>& mean_out, const char* se_name) {
    detail::MeanAccumulator acc(n);
    for (const auto& r : runs)
      for (std::size_t i = 0; i < n; ++i) acc.add(i, (r.*member)[i]);
    mean_out.resize(n);
    std::vector<double> se(n);
    for (std::size_t i = 0; i < n; ++i) std::tie(mean_out[i], se[i]) = acc.at(i, count);
    out.extra.push_back({se_name, std::move(se)});
  };
  if (first.has_phase()) reduce(&TimeSeries::phase, out.phase, "phase_se");
  if (first.has_current()) reduce(&TimeSeries::current, out.current, "current_se");
  return out;
}

/// Integrates phi' = -xi (N/2 + <Jx>) along the series (trapezoidal rule) and
/// maps the phase through the optical homodyne stage.
inline TimeSeries conditional_current_via_cavity(const TimeSeries& series, const CavityParams& cavity, int n_atoms,
                                                 double phase0 = 0.0) {
  if (!series.has_states() || series.states.size() != series.size())
    throw InvalidParameter("series must carry <Jx>");
  TimeSeries out = series;
  out.phase.assign(series.size(), 0.0);
  out.current.assign(series.size(), 0.0);
  if (series.size() == 0) return out;
  auto rate = [&](std::size_t i) { return -cavity.xi * (0.5 * n_atoms + series.states[i].jx); };
  double phi = phase0;
  out.phase[0] = phi;
  for (std::size_t i = 1; i < series.size(); ++i) {
    phi += 0.5 * (series.times[i] - series.times[i - 1]) * (rate(i - 1) + rate(i));
    out.phase[i] = phi;
  }
  for (std::size_t i = 0; i < series.size(); ++i)
    out.current[i] = optical_bohd(out.phase[i], cavity.cav_amp, cavity.lo_amp);
  out.meta["phase0"] = format_double(phase0);
  out.meta["xi"] = format_double(cavity.xi);
  return out;
}

}  // namespace dwh
