#include "tlz/propagator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <boost/numeric/odeint.hpp>

namespace tlz {

namespace {

namespace odeint = boost::numeric::odeint;

// (Re a0, Im a0, Re a1, Im a1)
using State = std::array<double, 4>;
using Stepper = odeint::runge_kutta_fehlberg78<State>;

constexpr double kStepSafety = 0.1;

State to_state(const Spinor& s) {
  return {s[0].real(), s[0].imag(), s[1].real(), s[1].imag()};
}

Spinor to_spinor(const State& x) { return {complex(x[0], x[1]), complex(x[2], x[3])}; }

// d psi/dt = -i pi (b . sigma) psi
struct Schroedinger {
  const FieldFunction& field;

  void operator()(const State& x, State& dxdt, double t) const {
    const FieldVector b = field(t);
    const complex a0(x[0], x[1]);
    const complex a1(x[2], x[3]);
    const complex h0 = b.bz * a0 + complex(b.bx, -b.by) * a1;
    const complex h1 = complex(b.bx, b.by) * a0 - b.bz * a1;
    const complex minus_i_pi(0.0, -kPi);
    const complex d0 = minus_i_pi * h0;
    const complex d1 = minus_i_pi * h1;
    dxdt = {d0.real(), d0.imag(), d1.real(), d1.imag()};
  }
};

void check_sweep_params(const DriveParams& p) {
  p.validate();
  if (p.F == 0.0) throw DomainError("propagation requires F != 0");
  if (!(p.T > 0.0)) throw DomainError("propagation requires T > 0");
}

FieldFunction model_field(const DriveParams& p, const PropagationOptions& opts) {
  const double scale = opts.drive_amp_scale;
  const double offset = opts.bz_offset;
  return [p, scale, offset](double t) {
    FieldVector b = field_at_coordinate(p, sweep_coordinate(p, t));
    b.by *= scale;
    b.bz = b.bz * scale + offset;
    return b;
  };
}

}  // namespace

void PropagationOptions::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("tolerances must be positive");
  if (!(max_step >= 0.0)) throw DomainError("max_step must be positive (or 0 for default)");
  if (!(drive_amp_scale > 0.0)) throw DomainError("drive_amp_scale must be positive");
  if (!std::isfinite(bz_offset)) throw DomainError("bz_offset must be finite");
  if (step_budget == 0) throw DomainError("step_budget must be positive");
}

Spinor initial_state(const DriveParams& p) {
  return instantaneous_eigensystem(field_at_coordinate(p, sweep_coordinate(p, 0.0))).v1;
}

Spinor target_state(const DriveParams& p) {
  return instantaneous_eigensystem(field_at_coordinate(p, sweep_coordinate(p, p.T))).v2;
}

Spinor evolve(const FieldFunction& field, Spinor psi, double t0, double t1,
              const PropagationOptions& opts, double max_step, std::size_t& n_steps) {
  if (t1 <= t0) return psi;
  // Error scale on |x| only: odeint's default also adds dt |dx/dt|, which
  // loosens the control for fast phase rotation. The per-step safety factor
  // keeps the accumulated norm drift of a ~2000-step sweep near rel_tol.
  using Controlled = odeint::controlled_runge_kutta<Stepper>;
  Controlled stepper(Controlled::error_checker_type(kStepSafety * opts.abs_tol,
                                                    kStepSafety * opts.rel_tol, 1.0, 0.0));
  const Schroedinger rhs{field};
  State x = to_state(psi);

  double t = t0;
  double dt = std::min(max_step, 0.01 * (t1 - t0));
  std::size_t attempts = 0;
  while (t < t1) {
    dt = std::min(dt, max_step);
    bool last = false;
    if (t + dt >= t1) {
      dt = t1 - t;
      last = true;
    }
    if (++attempts > opts.step_budget) {
      throw IntegrationError("integrator exceeded step budget of " +
                             std::to_string(opts.step_budget) + " at t = " + std::to_string(t));
    }
    const double t_before = t;
    if (stepper.try_step(rhs, x, t, dt) == odeint::success) {
      ++n_steps;
      if (last) t = t1;  // land exactly on the end point
    } else if (t + dt == t || !(dt > 0.0)) {
      throw IntegrationError("integrator step size underflow at t = " + std::to_string(t_before));
    }
  }
  return to_spinor(x);
}

SweepResult propagate_field(const FieldFunction& field, double T, const Spinor& initial,
                            const Spinor& target, const PropagationOptions& opts) {
  opts.validate();
  if (!(T > 0.0)) throw DomainError("propagation requires T > 0");
  const double max_step = opts.max_step > 0.0 ? opts.max_step : T / 1000.0;

  SweepResult r;
  r.final_state = evolve(field, initial, 0.0, T, opts, max_step, r.n_steps);
  const double nsq = norm_squared(r.final_state);
  r.norm_drift = std::abs(nsq - 1.0);

  // Splitting the norm over {target, target-perp} keeps p in [0, 1] exactly.
  const Spinor perp{-std::conj(target[1]), std::conj(target[0])};
  const double hit = std::norm(inner(target, r.final_state));
  const double miss = std::norm(inner(perp, r.final_state));
  r.p = hit + miss > 0.0 ? hit / (hit + miss) : 0.0;
  return r;
}

SweepResult propagate_states(const DriveParams& p, const Spinor& initial, const Spinor& target,
                             const PropagationOptions& opts) {
  check_sweep_params(p);
  return propagate_field(model_field(p, opts), p.T, initial, target, opts);
}

SweepResult propagate_sweep(const DriveParams& p, const PropagationOptions& opts) {
  check_sweep_params(p);
  return propagate_states(p, initial_state(p), target_state(p), opts);
}

double tunneling_probability(const DriveParams& p) {
  return propagate_sweep(resolve_duration(p)).p;
}

std::vector<TrajectoryPoint> trajectory(const DriveParams& p, std::size_t n_samples,
                                        const PropagationOptions& opts) {
  check_sweep_params(p);
  opts.validate();
  if (n_samples < 2) throw DomainError("trajectory needs at least 2 samples");

  const FieldFunction field = model_field(p, opts);
  const double max_step = opts.max_step > 0.0 ? opts.max_step : p.T / 1000.0;
  Spinor psi = initial_state(p);
  std::size_t steps = 0;

  std::vector<TrajectoryPoint> out;
  out.reserve(n_samples);
  double t_prev = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = k + 1 == n_samples ? p.T : p.T * static_cast<double>(k) / (n_samples - 1);
    psi = evolve(field, psi, t_prev, t, opts, max_step, steps);
    t_prev = t;
    const double n = std::sqrt(norm_squared(psi));
    const Spinor unit{psi[0] / n, psi[1] / n};
    out.push_back({t, bloch_vector(unit), field(t)});
  }
  return out;
}

}  // namespace tlz
