// Quadratic twisted Landau-Zener model: parameters, drive field and the
// instantaneous eigenbasis.
//
// Everything is stored in frequency units: m in Hz, nu in Hz^2, kappa in s,
// the sweep coordinate q in s. The spin Hamiltonian is 2*pi*(b . S) with
// S = sigma/2, so eigenenergies are +-|b|/2 in Hz.
#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

namespace tlz {

using complex = std::complex<double>;

/// Complex amplitude pair (a0, a1) in the fixed sigma_z basis.
using Spinor = std::array<complex, 2>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Argument outside an operation's domain (t outside [0, T], F = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The field magnitude vanished where an eigenbasis was required.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hardware limits used to bound the sweep duration. Defaults are the
/// microwave limits of the NV-center setup (13.6 MHz Rabi, 50 MHz detuning,
/// 10 us sweep cap).
struct HardwareLimits {
  double f_r_max = 13.6e6;    // Hz
  double f_det_max = 50e6;    // Hz
  double t_cap = 10e-6;       // s
};

/// One instance of the quadratic TLZ drive.
struct DriveParams {
  double m = 0.0;       // gap parameter, Hz
  double nu = 1e14;     // slope parameter, Hz^2
  double kappa = 0.0;   // geodesic curvature, s
  double F = 0.0;       // dimensionless sweep speed (signed)
  double T = 0.0;       // sweep duration, s; <= 0 means "use sweep_duration"
  HardwareLimits limits{};

  /// Throws DomainError when an invariant is broken. Does not require F != 0
  /// or T > 0; propagation checks those itself.
  void validate() const;
};

struct FieldVector {
  double bx = 0.0;
  double by = 0.0;
  double bz = 0.0;

  double norm() const;
  FieldVector operator*(double s) const { return {bx * s, by * s, bz * s}; }
  FieldVector operator+(const FieldVector& o) const {
    return {bx + o.bx, by + o.by, bz + o.bz};
  }
  FieldVector operator-(const FieldVector& o) const {
    return {bx - o.bx, by - o.by, bz - o.bz};
  }
};

/// Instantaneous eigenpairs of 2*pi*(b . S), energies in Hz.
/// v1 is the lower state |1>, v2 the upper state |2>. Gauge: leading
/// component real and >= 0; when it is below 1e-12 in magnitude, the second
/// component is made real and >= 0 instead.
struct EigenSystem {
  double e1 = 0.0;
  double e2 = 0.0;
  Spinor v1{};
  Spinor v2{};
};

/// q = -F (t - T/2).
double sweep_coordinate(const DriveParams& p, double t);

/// b(q) = (m, nu q, kappa nu^2 q^2 / 2), no domain check on q.
FieldVector field_at_coordinate(const DriveParams& p, double q);

/// Field at lab time t in [0, T].
FieldVector field_at(const DriveParams& p, double t);

/// min(t_cap, T_R, T_det) with T_R = 2 f_r_max / (nu |F|) and
/// T_det = 2 sqrt(2 f_det_max / |kappa|) / (nu |F|). kappa = 0 means no
/// detuning limit.
double sweep_duration(const DriveParams& p);

/// Copy of p with T = sweep_duration(p).
DriveParams with_auto_duration(DriveParams p);

/// Keeps a pinned T > 0, otherwise fills in sweep_duration(p).
DriveParams resolve_duration(DriveParams p);

EigenSystem instantaneous_eigensystem(const FieldVector& b);

/// Bloch vector (<sigma_x>, <sigma_y>, <sigma_z>) of a normalized spinor.
std::array<double, 3> bloch_vector(const Spinor& psi);

double norm_squared(const Spinor& psi);
complex inner(const Spinor& a, const Spinor& b);  // <a|b>

}  // namespace tlz
