#pragma once

// Classical fixed-step fourth-order Runge-Kutta. State must support
// State + State and double * State; Eigen matrices and the small value
// types in this library both qualify.

#include <cmath>
#include <algorithm>
#include <cstddef>

#include "dwh/errors.hpp"

namespace dwh {

template <class State, class Deriv>
State rk4_step(const State& y, double t, double h, Deriv&& f) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * h, State(y + (0.5 * h) * k1));
  const State k3 = f(t + 0.5 * h, State(y + (0.5 * h) * k2));
  const State k4 = f(t + h, State(y + h * k3));
  return State(y + (h / 6.0) * State(k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

// Uniform grid on [t0, t1]: n_steps steps of size dt, every `stride`-th
// state emitted (always including both end points).
struct StepGrid {
  double t0 = 0.0;
  double dt = 0.0;
  std::size_t n_steps = 0;
  std::size_t stride = 1;

  double time(std::size_t step) const noexcept { return t0 + static_cast<double>(step) * dt; }
  std::size_t n_samples() const noexcept { return n_steps / stride + 1; }
};

/// Grid whose step is the largest value <= dt_max that divides [t0, t1]
/// exactly. With samples > 0 the step count is also made a multiple of
/// samples - 1 so that exactly `samples` states are emitted.
inline StepGrid make_grid(double t0, double t1, double dt_max, std::size_t stride = 1,
                          std::size_t samples = 0) {
  if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1))
    throw InvalidParameter("time span must satisfy t0 < t1");
  if (!(dt_max > 0.0) || !std::isfinite(dt_max)) throw InvalidParameter("dt must be positive");
  const double span = t1 - t0;
  auto steps_for = [&](double h) {
    // 1e-9 keeps an exactly dividing dt from rounding up to one extra step.
    return static_cast<std::size_t>(std::ceil(span / h - 1e-9));
  };
  StepGrid g;
  g.t0 = t0;
  if (samples >= 2) {
    const std::size_t intervals = samples - 1;
    const std::size_t min_steps = std::max<std::size_t>(steps_for(dt_max), 1);
    g.stride = (min_steps + intervals - 1) / intervals;
    g.n_steps = g.stride * intervals;
  } else {
    if (stride == 0) throw InvalidParameter("stride must be >= 1");
    g.stride = stride;
    std::size_t n = std::max<std::size_t>(steps_for(dt_max), 1);
    n = ((n + stride - 1) / stride) * stride;
    g.n_steps = n;
  }
  g.dt = span / static_cast<double>(g.n_steps);
  return g;
}

}  // namespace dwh
