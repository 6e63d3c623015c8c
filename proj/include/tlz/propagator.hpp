// Time-dependent Schroedinger propagation of the swept two-level drive.
#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "tlz/model.hpp"

namespace tlz {

/// The adaptive integrator could not reach the end of the sweep.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PropagationOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.0;          // s; 0 selects T / 1000
  double bz_offset = 0.0;         // Hz, static resonance shift added to b_z
  double drive_amp_scale = 1.0;   // alpha applied to b_y and b_z
  std::size_t step_budget = 20'000'000;

  void validate() const;
};

struct SweepResult {
  double p = 0.0;          // |<target|psi(T)>|^2 / <psi(T)|psi(T)>
  Spinor final_state{};
  double norm_drift = 0.0;  // | <psi(T)|psi(T)> - 1 |
  std::size_t n_steps = 0;  // accepted integrator steps
};

using FieldFunction = std::function<FieldVector(double t)>;

/// Lower eigenstate |1> of the offset-free, unscaled field at t = 0.
Spinor initial_state(const DriveParams& p);

/// Upper eigenstate |2> of the offset-free, unscaled field at t = T.
Spinor target_state(const DriveParams& p);

/// Evolves psi from t0 to t1 under i d/dt psi = 2 pi (b(t) . S) psi using an
/// adaptive Runge-Kutta-Fehlberg 7(8) pair. `n_steps` is incremented by the number
/// of accepted steps.
Spinor evolve(const FieldFunction& field, Spinor psi, double t0, double t1,
              const PropagationOptions& opts, double max_step, std::size_t& n_steps);

/// General sweep on [0, T] from `initial`, scored against `target`. The
/// options' bz_offset and drive_amp_scale act on `field` during the sweep.
SweepResult propagate_field(const FieldFunction& field, double T, const Spinor& initial,
                            const Spinor& target, const PropagationOptions& opts = {});

/// Sweep of the model field with explicit prep/projection states.
SweepResult propagate_states(const DriveParams& p, const Spinor& initial, const Spinor& target,
                             const PropagationOptions& opts = {});

/// Sweep from |1(q = FT/2)> projected on |2(q = -FT/2)> using p.T as given.
SweepResult propagate_sweep(const DriveParams& p, const PropagationOptions& opts = {});

/// propagate_sweep(...).p with default tolerances; T <= 0 selects
/// sweep_duration(p).
double tunneling_probability(const DriveParams& p);

struct TrajectoryPoint {
  double t = 0.0;
  std::array<double, 3> bloch{};  // (<2Sx>, <2Sy>, <2Sz>)
  FieldVector field{};
};

/// Bloch-vector samples at n_samples uniformly spaced times over [0, p.T].
std::vector<TrajectoryPoint> trajectory(const DriveParams& p, std::size_t n_samples,
                                        const PropagationOptions& opts = {});

}  // namespace tlz
