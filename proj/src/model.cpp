#include "tlz/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tlz {

namespace {

constexpr double kGaugeThreshold = 1e-12;

bool finite(double x) { return std::isfinite(x); }

// Multiply by a unit phase so the gauge-fixing component is real and >= 0.
Spinor fix_gauge(Spinor v) {
  const std::size_t k = std::abs(v[0]) >= kGaugeThreshold ? 0 : 1;
  const double mag = std::abs(v[k]);
  if (mag == 0.0) return v;
  const complex phase = std::conj(v[k]) / mag;
  v[0] *= phase;
  v[1] *= phase;
  v[k] = complex(std::abs(v[k]), 0.0);
  return v;
}

Spinor normalized(Spinor v) {
  const double n = std::sqrt(norm_squared(v));
  v[0] /= n;
  v[1] /= n;
  return v;
}

}  // namespace

void DriveParams::validate() const {
  if (!(nu > 0.0) || !finite(nu)) throw DomainError("nu must be positive and finite");
  if (!(m >= 0.0) || !finite(m)) throw DomainError("m must be >= 0 and finite");
  if (!finite(kappa)) throw DomainError("kappa must be finite");
  if (!finite(F)) throw DomainError("F must be finite");
  if (!(T >= 0.0) || !finite(T)) throw DomainError("T must be >= 0 and finite");
  if (!(limits.f_r_max > 0.0)) throw DomainError("f_r_max must be positive");
  if (!(limits.f_det_max > 0.0)) throw DomainError("f_det_max must be positive");
  if (!(limits.t_cap > 0.0)) throw DomainError("t_cap must be positive");
}

double FieldVector::norm() const { return std::sqrt(bx * bx + by * by + bz * bz); }

double sweep_coordinate(const DriveParams& p, double t) { return -p.F * (t - 0.5 * p.T); }

FieldVector field_at_coordinate(const DriveParams& p, double q) {
  return {p.m, p.nu * q, 0.5 * p.kappa * p.nu * p.nu * q * q};
}

FieldVector field_at(const DriveParams& p, double t) {
  if (!(t >= 0.0 && t <= p.T)) {
    throw DomainError("field_at: t = " + std::to_string(t) + " outside [0, T]");
  }
  return field_at_coordinate(p, sweep_coordinate(p, t));
}

double sweep_duration(const DriveParams& p) {
  if (p.F == 0.0) throw DomainError("sweep_duration: F = 0 gives an infinite sweep");
  if (!(p.nu > 0.0)) throw DomainError("sweep_duration: nu must be positive");
  const double rate = p.nu * std::abs(p.F);
  const double t_rabi = 2.0 * p.limits.f_r_max / rate;
  const double t_det = p.kappa == 0.0
                           ? std::numeric_limits<double>::infinity()
                           : 2.0 * std::sqrt(2.0 * p.limits.f_det_max / std::abs(p.kappa)) / rate;
  return std::min({p.limits.t_cap, t_rabi, t_det});
}

DriveParams with_auto_duration(DriveParams p) {
  p.T = sweep_duration(p);
  return p;
}

DriveParams resolve_duration(DriveParams p) {
  if (!(p.T > 0.0)) p.T = sweep_duration(p);
  return p;
}

EigenSystem instantaneous_eigensystem(const FieldVector& b) {
  const double r = b.norm();
  if (!(r > 0.0)) throw DegeneracyError("eigenbasis undefined for |b| = 0");

  // Upper state is the +1 eigenvector of n.sigma. Pick the better conditioned
  // of the two unnormalized column forms to avoid cancellation near the poles.
  const double nx = b.bx / r, ny = b.by / r, nz = b.bz / r;
  const complex n_plus(nx, ny);  // nx + i ny
  Spinor up;
  Spinor down;
  if (nz >= 0.0) {
    up = {complex(1.0 + nz, 0.0), n_plus};
    down = {-std::conj(n_plus), complex(1.0 + nz, 0.0)};
  } else {
    up = {std::conj(n_plus), complex(1.0 - nz, 0.0)};
    down = {complex(1.0 - nz, 0.0), -n_plus};
  }

  EigenSystem es;
  es.e1 = -0.5 * r;
  es.e2 = 0.5 * r;
  es.v1 = fix_gauge(normalized(down));
  es.v2 = fix_gauge(normalized(up));
  return es;
}

std::array<double, 3> bloch_vector(const Spinor& psi) {
  const complex c = std::conj(psi[0]) * psi[1];
  return {2.0 * c.real(), 2.0 * c.imag(), std::norm(psi[0]) - std::norm(psi[1])};
}

double norm_squared(const Spinor& psi) { return std::norm(psi[0]) + std::norm(psi[1]); }

complex inner(const Spinor& a, const Spinor& b) {
  return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1];
}

}  // namespace tlz
