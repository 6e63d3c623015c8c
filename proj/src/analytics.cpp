#include "tlz/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tlz/parallel.hpp"
#include "tlz/propagator.hpp"

namespace tlz {

namespace {

constexpr double kMinA12 = 1e-14;

AnalyticProbability gap_probability(double gap, double nu, double F) {
  if (!(nu > 0.0)) throw DomainError("nu must be positive");
  if (F == 0.0) return {gap == 0.0 ? 1.0 : 0.0, true};
  return {std::exp(-(kPi * kPi / (nu * std::abs(F))) * gap * gap), false};
}

// Wraps an angle difference into (-pi, pi].
double wrap(double a) {
  while (a > kPi) a -= kTwoPi;
  while (a <= -kPi) a += kTwoPi;
  return a;
}

double simulated_probability(const DriveParams& base, double F) {
  DriveParams p = base;
  p.F = F;
  p.T = 0.0;
  return tunneling_probability(p);
}

}  // namespace

double effective_gap(double m, double nu, double kappa, double F) {
  return m + F * nu * kappa / (4.0 * kPi);
}

AnalyticProbability lz_probability(double m, double nu, double F) {
  return gap_probability(m, nu, F);
}

AnalyticProbability tlz_probability(double m, double nu, double kappa, double F) {
  return gap_probability(effective_gap(m, nu, kappa, F), nu, F);
}

PtCondition pt_speed(double m, double nu, double kappa) {
  if (!(nu > 0.0)) throw DomainError("nu must be positive");
  if (m == 0.0) return {0.0, PtKind::analytic, 1.0, false};
  if (kappa == 0.0) throw DomainError("no finite perfect-tunneling speed for kappa = 0, m > 0");
  return {-4.0 * kPi * m / (nu * kappa), PtKind::analytic, 1.0, false};
}

PtCondition pt_speed_numeric(const DriveParams& params, SpeedBracket bracket,
                             const PtSearchOptions& opts) {
  params.validate();
  if (params.kappa == 0.0) throw DomainError("pt_speed_numeric requires kappa != 0");
  if (opts.grid_points < 21) throw DomainError("pt_speed_numeric needs >= 21 grid points");
  double lo = std::min(bracket.lo, bracket.hi);
  double hi = std::max(bracket.lo, bracket.hi);
  if (params.m > 0.0) {
    if (params.kappa > 0.0) hi = std::min(hi, 0.0);
    else lo = std::max(lo, 0.0);
  }
  if (!(hi > lo)) throw DomainError("pt_speed_numeric: bracket excludes the perfect-tunneling sign");

  const std::size_t n = opts.grid_points;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = i + 1 == n ? hi : lo + step * static_cast<double>(i);
    if (grid[i] == 0.0) grid[i] = i + 1 == n ? -0.5 * step : 0.5 * step;
  }
  std::vector<double> probs(n);
  parallel_for(n, opts.jobs, [&](std::size_t i) { probs[i] = simulated_probability(params, grid[i]); });

  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (probs[i] > probs[best]) best = i;
  }

  PtCondition out{grid[best], PtKind::numeric, probs[best], best == 0 || best + 1 == n};

  // Golden-section refinement on the neighbouring grid cells.
  auto eval = [&](double F) {
    if (F == 0.0) F = 1e-3 * step;
    const double p = simulated_probability(params, F);
    if (p > out.p_at_pt) {
      out.f_pt = F;
      out.p_at_pt = p;
    }
    return p;
  };
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[best + 1 == n ? n - 1 : best + 1];
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = eval(x1);
  double f2 = eval(x2);
  while (b - a > opts.f_tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = eval(x2);
    }
  }
  return out;
}

PtCondition pt_speed_search(const DriveParams& params, const PtSearchOptions& opts,
                            int max_widenings) {
  if (params.m == 0.0) return pt_speed_numeric(params, {-0.02, 0.02}, opts);
  const double seed = pt_speed(params.m, params.nu, params.kappa).f_pt;
  // far: the high-speed edge, near: the edge closer to F = 0
  double far = 1.5 * seed;
  double near = 0.5 * seed;
  PtCondition best = pt_speed_numeric(params, {far, near}, opts);
  for (int i = 0; i < max_widenings && best.on_boundary; ++i) {
    if (std::abs(best.f_pt - far) < std::abs(best.f_pt - near)) far *= 2.0;
    else near *= 0.5;
    best = pt_speed_numeric(params, {far, near}, opts);
  }
  return best;
}

BerryConnection berry_connection(const DriveParams& params, double q, double dq) {
  if (!(dq > 0.0)) throw DomainError("berry_connection requires dq > 0");
  const EigenSystem centre = instantaneous_eigensystem(field_at_coordinate(params, q));
  const EigenSystem plus = instantaneous_eigensystem(field_at_coordinate(params, q + dq));
  const EigenSystem minus = instantaneous_eigensystem(field_at_coordinate(params, q - dq));

  auto derivative = [&](const Spinor& p, const Spinor& m) {
    return Spinor{(p[0] - m[0]) / (2.0 * dq), (p[1] - m[1]) / (2.0 * dq)};
  };
  const Spinor d1 = derivative(plus.v1, minus.v1);
  const Spinor d2 = derivative(plus.v2, minus.v2);
  const complex i(0.0, 1.0);

  const complex a11 = i * inner(centre.v1, d1);
  const complex a22 = i * inner(centre.v2, d2);
  BerryConnection out;
  out.a11 = a11.real();
  out.a22 = a22.real();
  out.a12 = i * inner(centre.v1, d2);
  out.diag_imag = std::max(std::abs(a11.imag()), std::abs(a22.imag()));
  return out;
}

double geometric_amplitude_factor(const DriveParams& params, double q, double dq) {
  const BerryConnection centre = berry_connection(params, q, dq);
  const BerryConnection plus = berry_connection(params, q + dq, dq);
  const BerryConnection minus = berry_connection(params, q - dq, dq);
  for (const auto* c : {&centre, &plus, &minus}) {
    if (std::abs(c->a12) < kMinA12) {
      throw DomainError("geometric_amplitude_factor: |A12| vanishes, phase undefined");
    }
  }
  const double darg = wrap(std::arg(plus.a12) - std::arg(minus.a12)) / (2.0 * dq);
  return -centre.a11 + centre.a22 + darg;
}

double default_fd_step(const DriveParams& params) {
  const double span = params.T * std::abs(params.F);
  if (!(span > 0.0)) throw DomainError("default_fd_step needs T |F| > 0");
  return 1e-4 * span;
}

}  // namespace tlz
