// Quasi-static dephasing ensembles, amplitude-error injection and the Rabi
// robustness baseline.
#pragma once

#include <span>
#include <vector>

#include "tlz/model.hpp"
#include "tlz/propagator.hpp"

namespace tlz {

/// Gaussian resonance line. The shift is constant within one sweep and
/// enters as an offset on b_z.
struct DephasingModel {
  double fwhm = 148e3;       // Hz
  int n_nodes = 41;          // Gauss-Legendre nodes, odd, >= 11
  double span_sigmas = 4.0;  // integration half-width in standard deviations

  void validate() const;
  double sigma() const;  // fwhm / (2 sqrt(2 ln 2))
};

struct DephasingProfile {
  std::vector<double> shifts;   // Hz
  std::vector<double> weights;  // normalized Gaussian weights, sum to 1
  std::vector<double> probabilities;
  double p = 0.0;               // weighted mean
};

/// Per-node tunneling probabilities and their Gaussian-weighted mean. T <= 0
/// in params selects sweep_duration.
DephasingProfile dephasing_profile(const DriveParams& params, const DephasingModel& model,
                                   unsigned jobs = 1);

double dephased_probability(const DriveParams& params, const DephasingModel& model,
                            unsigned jobs = 1);

enum class AmplitudeChannel { drive, prep, both };

/// Tunneling probability with a relative amplitude error alpha. The drive
/// channel scales b_y and b_z during the sweep (nu -> alpha nu,
/// kappa -> kappa / alpha); the prep channel scales the rectangular prep and
/// readout rotation angles. The sweep duration is that of the error-free
/// pulse.
double amplitude_error_probability(const DriveParams& params, double alpha,
                                   AmplitudeChannel channel);

/// Resonant pi-pulse with rotation angle alpha * pi: (1 - cos(alpha pi)) / 2.
double rabi_probability(double alpha);

enum class ControlMethod { rabi, tlz };

struct RobustnessSpec {
  ControlMethod method = ControlMethod::rabi;
  DriveParams params{};  // tlz only; F is used as given
  AmplitudeChannel channel = AmplitudeChannel::drive;
};

struct RobustnessInterval {
  ControlMethod method = ControlMethod::rabi;
  double threshold = 0.0;
  double alpha_lo = 1.0;
  double alpha_hi = 1.0;
  bool empty = false;       // the error-free point misses the threshold
  bool lo_clipped = false;  // interval reaches the low end of the grid
  bool hi_clipped = false;
};

/// Probability of `spec` at amplitude error alpha.
double control_probability(const RobustnessSpec& spec, double alpha);

/// Largest contiguous alpha-interval around alpha = 1 with probability >=
/// threshold. Crossings found on `alpha_grid` are refined by bisection to
/// 1e-3.
RobustnessInterval robustness_interval(const RobustnessSpec& spec, double threshold,
                                       std::span<const double> alpha_grid, unsigned jobs = 1);

/// Widest contiguous alpha-interval anywhere on the grid with probability >=
/// threshold, edges refined by bisection to 1e-3. `empty` when no grid
/// point passes.
RobustnessInterval widest_interval(const RobustnessSpec& spec, double threshold,
                                   std::span<const double> alpha_grid, unsigned jobs = 1);

/// Uniform grid on [lo, hi] with `count` points.
std::vector<double> linear_grid(double lo, double hi, std::size_t count);

}  // namespace tlz
