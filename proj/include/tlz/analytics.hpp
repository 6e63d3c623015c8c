// Closed-form LZ/TLZ probabilities, perfect-tunneling speeds and the
// numerical geometric amplitude factor.
#pragma once

#include <cstddef>

#include "tlz/model.hpp"

namespace tlz {

/// A closed-form probability. `limit` marks the F = 0 convention (0 for an
/// open effective gap, 1 for a closed one), which no sweep can realize.
struct AnalyticProbability {
  double value = 0.0;
  bool limit = false;
};

/// exp(-pi^2 m^2 / (nu |F|)).
AnalyticProbability lz_probability(double m, double nu, double F);

/// exp(-(pi^2 / (nu |F|)) (m + F nu kappa / (4 pi))^2).
AnalyticProbability tlz_probability(double m, double nu, double kappa, double F);

/// Effective gap m + F nu kappa / (4 pi), Hz.
double effective_gap(double m, double nu, double kappa, double F);

enum class PtKind { analytic, numeric };

struct PtCondition {
  double f_pt = 0.0;
  PtKind kind = PtKind::analytic;
  double p_at_pt = 1.0;
  bool on_boundary = false;  // numeric only: the maximum sat on the bracket edge
};

/// F_PT = -4 pi m / (nu kappa); 0 when m = 0. Throws DomainError for
/// kappa = 0 with m > 0.
PtCondition pt_speed(double m, double nu, double kappa);

struct SpeedBracket {
  double lo = -1.0;
  double hi = 1.0;
};

struct PtSearchOptions {
  std::size_t grid_points = 41;  // coarse grid, >= 21
  double f_tol = 1e-4;           // golden-section termination width
  unsigned jobs = 1;             // concurrent grid evaluations
};

/// Speed maximizing the simulated tunneling probability (T re-derived from
/// sweep_duration at every F). For m > 0 the search keeps only the sign of F
/// given by -kappa. The coarse grid never samples F = 0.
PtCondition pt_speed_numeric(const DriveParams& params, SpeedBracket bracket,
                             const PtSearchOptions& opts = {});

/// pt_speed_numeric seeded with the analytic speed +-50 %, widening the
/// bracket away from whichever edge the maximum lands on. For m = 0 the seed
/// bracket is [-0.02, 0.02].
PtCondition pt_speed_search(const DriveParams& params, const PtSearchOptions& opts = {},
                            int max_widenings = 8);

struct BerryConnection {
  double a11 = 0.0;
  double a22 = 0.0;
  complex a12{};
  double diag_imag = 0.0;  // largest |Im| dropped from a11, a22
};

/// A_nl(q) = <n(q)| i d/dq |l(q)> by central differences of the gauge-fixed
/// instantaneous eigenvectors.
BerryConnection berry_connection(const DriveParams& params, double q, double dq);

/// R12(q) = -A11 + A22 + d/dq arg A12, same units as nu * kappa.
double geometric_amplitude_factor(const DriveParams& params, double q, double dq);

/// 1e-4 of the swept q-range T |F|.
double default_fd_step(const DriveParams& params);

}  // namespace tlz
