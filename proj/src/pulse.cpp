#include "tlz/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <span>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

namespace tlz {

namespace {

// Maps an angle into (-pi, pi].
double principal(double a) {
  a = std::remainder(a, kTwoPi);
  return a <= -kPi ? a + kTwoPi : a;
}

// Closed-form integral of b_z over [0, t].
double detuning_cycles(const DriveParams& p, double t) {
  const double u = t - 0.5 * p.T;
  const double h = 0.5 * p.T;
  return p.kappa * p.nu * p.nu * p.F * p.F / 6.0 * (u * u * u + h * h * h);
}

// d/dx of the Lagrange interpolant through (x[j], y[j]) at x0.
double lagrange_derivative(std::span<const double> x, std::span<const double> y, double x0) {
  double d = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    double wj = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (k == j) continue;
      double term = 1.0 / (x[j] - x[k]);
      for (std::size_t l = 0; l < x.size(); ++l) {
        if (l == j || l == k) continue;
        term *= (x0 - x[l]) / (x[j] - x[l]);
      }
      wj += term;
    }
    d += wj * y[j];
  }
  return d;
}

}  // namespace

PulseProgram synthesize_drive(const DriveParams& params, double sample_rate) {
  params.validate();
  if (params.F == 0.0) throw DomainError("synthesize_drive requires F != 0");
  if (!(params.T > 0.0)) throw DomainError("synthesize_drive requires T > 0");
  if (!(sample_rate * params.T >= 100.0)) {
    throw DomainError("synthesize_drive: sample_rate below 100 samples per sweep");
  }

  std::size_t intervals = static_cast<std::size_t>(std::ceil(params.T * sample_rate - 1e-9));
  if (params.m == 0.0 && intervals % 2 == 0) ++intervals;
  const std::size_t n = intervals + 1;

  PulseProgram prog;
  prog.sample_rate = sample_rate;
  prog.T = params.T;
  prog.samples.reserve(n);
  double prev_phi = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = k + 1 == n ? params.T : params.T * static_cast<double>(k) / intervals;
    const FieldVector b = field_at(params, t);
    PulseSample s;
    s.t = t;
    s.f_r = std::hypot(b.bx, b.by);
    double phi = -std::atan2(b.by, b.bx);
    if (k > 0) phi = prev_phi + principal(phi - prev_phi);
    s.phi = prev_phi = phi;
    s.detuning_cycles = detuning_cycles(params, t);
    s.f_det = t > 0.0 ? s.detuning_cycles / t : b.bz;
    prog.samples.push_back(s);
  }

  const FieldVector b0 = field_at(params, 0.0);
  const FieldVector bT = field_at(params, params.T);
  prog.prep.theta_i = std::acos(b0.bz / b0.norm());
  prog.prep.phi_i = principal(-(0.5 * kPi + std::atan2(b0.by, b0.bx)));
  prog.prep.theta_f = std::acos(bT.bz / bT.norm());
  prog.prep.phi_f = principal(kTwoPi * prog.samples.back().detuning_cycles -
                              (-0.5 * kPi + std::atan2(bT.by, bT.bx)));

  prog.constraints = verify_constraints(prog, params);
  return prog;
}

std::vector<FieldVector> reconstruct_field(const PulseProgram& prog) {
  const auto& s = prog.samples;
  if (s.size() < 2) throw DomainError("reconstruct_field needs at least two samples");
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (!(s[k].t > s[k - 1].t)) throw DomainError("reconstruct_field: timestamps not increasing");
  }

  std::vector<double> t(s.size()), cycles(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    t[k] = s[k].t;
    cycles[k] = s[k].detuning_cycles;
  }
  const std::size_t width = std::min<std::size_t>(5, s.size());

  std::vector<FieldVector> out(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    const std::size_t first = std::min(k - std::min(k, width / 2), s.size() - width);
    const std::span<const double> xs(t.data() + first, width);
    const std::span<const double> ys(cycles.data() + first, width);
    out[k] = {s[k].f_r * std::cos(s[k].phi), -s[k].f_r * std::sin(s[k].phi),
              lagrange_derivative(xs, ys, t[k])};
  }
  return out;
}

ConstraintReport verify_constraints(const PulseProgram& prog, const DriveParams& params,
                                    double rel_slack) {
  double rabi = 0.0;
  for (const auto& s : prog.samples) rabi = std::max(rabi, std::abs(s.f_r));
  double detuning = 0.0;
  if (prog.samples.size() >= 2) {
    for (const auto& b : reconstruct_field(prog)) detuning = std::max(detuning, std::abs(b.bz));
  }

  auto check = [rel_slack](std::string name, double limit, double observed) {
    return ConstraintCheck{std::move(name), limit, observed, observed <= limit * (1.0 + rel_slack)};
  };
  return {check("rabi_frequency", params.limits.f_r_max, rabi),
          check("detuning", params.limits.f_det_max, detuning),
          check("duration", params.limits.t_cap, prog.T)};
}

PulseProgram prep_rotation_error(PulseProgram prog, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("prep_rotation_error requires alpha > 0");
  prog.prep.theta_i *= alpha;
  prog.prep.theta_f *= alpha;
  return prog;
}

Spinor rotate_xy(const Spinor& psi, double theta, double axis_azimuth) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  // -i sin(theta/2) (cos chi sigma_x + sin chi sigma_y)
  const complex off_up = complex(0.0, -s) * std::polar(1.0, -axis_azimuth);
  const complex off_down = complex(0.0, -s) * std::polar(1.0, axis_azimuth);
  return {c * psi[0] + off_up * psi[1], off_down * psi[0] + c * psi[1]};
}

PrepStates prep_states(const PulseProgram& prog) {
  if (prog.samples.empty()) throw DomainError("prep_states: empty program");
  const Spinor up{complex(1.0, 0.0), complex(0.0, 0.0)};
  const Spinor down{complex(0.0, 0.0), complex(1.0, 0.0)};
  // Readout phase carries the detuning frame term; strip it to get the axis
  // in the frame of the drive field.
  const double frame = kTwoPi * prog.samples.back().detuning_cycles;
  const double axis_i = -prog.prep.phi_i;
  const double axis_f = -(prog.prep.phi_f - frame);
  return {rotate_xy(down, prog.prep.theta_i, axis_i), rotate_xy(up, -prog.prep.theta_f, axis_f)};
}

FieldFunction sampled_field(const PulseProgram& prog, const std::vector<FieldVector>& field) {
  const auto& s = prog.samples;
  if (s.size() < 4 || field.size() != s.size()) {
    throw DomainError("sampled_field needs >= 4 samples matching the program");
  }
  const double h = (s.back().t - s.front().t) / static_cast<double>(s.size() - 1);
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (std::abs((s[k].t - s[k - 1].t) - h) > 1e-6 * h) {
      throw DomainError("sampled_field requires uniformly spaced samples");
    }
  }
  using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
  std::vector<double> bx, by, bz;
  for (const auto& b : field) {
    bx.push_back(b.bx);
    by.push_back(b.by);
    bz.push_back(b.bz);
  }
  const double t0 = s.front().t;
  auto sx = std::make_shared<Spline>(bx.begin(), bx.end(), t0, h);
  auto sy = std::make_shared<Spline>(by.begin(), by.end(), t0, h);
  auto sz = std::make_shared<Spline>(bz.begin(), bz.end(), t0, h);
  const double t_end = s.back().t;
  return [sx, sy, sz, t0, t_end](double t) {
    t = std::clamp(t, t0, t_end);
    return FieldVector{(*sx)(t), (*sy)(t), (*sz)(t)};
  };
}

void write_waveform_csv(const PulseProgram& prog, const std::filesystem::path& path,
                        WaveformColumns columns) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  if (columns == WaveformColumns::polar) {
    out << "t_s,f_R_Hz,phi_rad,f_det_Hz\n";
    for (const auto& s : prog.samples) {
      out << s.t << ',' << s.f_r << ',' << s.phi << ',' << s.f_det << '\n';
    }
  } else {
    out << "t_s,I_Hz,Q_Hz,f_det_Hz\n";
    for (const auto& s : prog.samples) {
      out << s.t << ',' << s.f_r * std::cos(s.phi) << ',' << s.f_r * std::sin(s.phi) << ','
          << s.f_det << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace tlz
