#include "tlz/scan.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "tlz/parallel.hpp"
#include "tlz/propagator.hpp"

namespace tlz {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Half-width of the m = 0 numeric search grid cell next to F = 0.
constexpr double kGaplessCell = 1e-3;

bool numeric_like(ScanMode mode) { return mode != ScanMode::analytic; }

void set_param(ScanSpec& spec, DriveParams& p, ScanParam which, double v) {
  switch (which) {
    case ScanParam::F: p.F = v; break;
    case ScanParam::kappa: p.kappa = v; break;
    case ScanParam::m: p.m = v; break;
    case ScanParam::alpha: spec.alpha = v; break;
  }
}

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

void ScanSpec::validate() const {
  if (axes.empty() || axes.size() > 2) throw SpecError("scan needs one or two axes");
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const Axis& a = axes[i];
    const std::string name = "axis" + std::to_string(i + 1);
    if (a.count < 2) throw SpecError(name + ".count must be >= 2");
    if (!std::isfinite(a.lo) || !std::isfinite(a.hi)) throw SpecError(name + " range must be finite");
    if (a.scale == AxisScale::log && !(a.lo * a.hi > 0.0)) {
      throw SpecError(name + ": log axis needs nonzero endpoints of one sign");
    }
    if (a.param == ScanParam::alpha && mode != ScanMode::amplitude_error) {
      throw SpecError(name + ": alpha axis requires mode=amplitude-error");
    }
  }
  if (axes.size() == 2 && axes[0].param == axes[1].param) {
    throw SpecError("axes must scan different parameters");
  }
  try {
    fixed.validate();
    dephasing.validate();
  } catch (const DomainError& e) {
    throw SpecError(e.what());
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw SpecError("alpha must be > 0");
}

std::vector<double> axis_values(const Axis& axis, ScanMode mode) {
  if (axis.count < 2) throw SpecError("axis count must be >= 2");
  const std::size_t n = axis.count;
  std::vector<double> v(n);
  if (axis.scale == AxisScale::log) {
    if (!(axis.lo * axis.hi > 0.0)) throw SpecError("log axis needs nonzero endpoints of one sign");
    const double sign = axis.lo < 0.0 ? -1.0 : 1.0;
    const double a = std::log(std::abs(axis.lo));
    const double b = std::log(std::abs(axis.hi));
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = i + 1 == n ? axis.hi
             : i == 0   ? axis.lo
                        : sign * std::exp(a + (b - a) * static_cast<double>(i) / (n - 1));
    }
    return v;
  }
  const double step = (axis.hi - axis.lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = i + 1 == n ? axis.hi : axis.lo + step * static_cast<double>(i);
    if (axis.param == ScanParam::F && numeric_like(mode) && v[i] == 0.0) {
      v[i] = (i + 1 == n ? -0.5 : 0.5) * step;
    }
  }
  return v;
}

std::size_t ScanResult::failures() const {
  std::size_t n = 0;
  for (const auto& pt : points) n += pt.error.empty() ? 0 : 1;
  return n;
}

ScanPoint evaluate_point(const ScanSpec& spec, const std::vector<double>& coords) {
  ScanPoint out;
  out.coords = coords;
  ScanSpec local = spec;
  DriveParams p = spec.fixed;
  for (std::size_t i = 0; i < coords.size() && i < spec.axes.size(); ++i) {
    set_param(local, p, spec.axes[i].param, coords[i]);
  }
  try {
    switch (spec.mode) {
      case ScanMode::analytic: {
        p.validate();
        const AnalyticProbability a = tlz_probability(p.m, p.nu, p.kappa, p.F);
        out.p = a.value;
        out.limit = a.limit;
        break;
      }
      case ScanMode::numeric: {
        const SweepResult r = propagate_sweep(resolve_duration(p));
        out.p = r.p;
        out.norm_drift = r.norm_drift;
        out.n_steps = r.n_steps;
        break;
      }
      case ScanMode::dephased:
        out.p = dephased_probability(p, spec.dephasing, 1);
        break;
      case ScanMode::amplitude_error:
        out.p = amplitude_error_probability(p, local.alpha, spec.channel);
        break;
    }
  } catch (const std::exception& e) {
    out.p = kNaN;
    out.norm_drift = kNaN;
    out.n_steps = 0;
    out.error = one_line(e.what());
  }
  return out;
}

ScanResult run_scan(const ScanSpec& spec, unsigned jobs) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();

  ScanResult result;
  result.spec = spec;
  std::size_t total = 1;
  for (const auto& a : spec.axes) {
    result.grid.push_back(axis_values(a, spec.mode));
    total *= a.count;
  }

  result.points.resize(total);
  parallel_for(total, jobs, [&](std::size_t idx) {
    std::vector<double> coords(spec.axes.size());
    std::size_t rest = idx;
    for (std::size_t k = spec.axes.size(); k-- > 0;) {
      coords[k] = result.grid[k][rest % spec.axes[k].count];
      rest /= spec.axes[k].count;
    }
    result.points[idx] = evaluate_point(spec, coords);
  });

  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<PtLocusPoint> pt_locus(const DriveParams& base, double kappa_lo, double kappa_hi,
                                   std::size_t count, PtMethod method, unsigned jobs) {
  if (count < 2) throw SpecError("pt-locus needs at least 2 kappa points");
  if (!std::isfinite(kappa_lo) || !std::isfinite(kappa_hi)) throw SpecError("kappa range must be finite");
  if (base.m > 0.0 && kappa_lo * kappa_hi <= 0.0) {
    throw SpecError("kappa range must exclude 0 when m > 0");
  }
  const std::vector<double> kappas = linear_grid(kappa_lo, kappa_hi, count);
  std::vector<PtLocusPoint> out(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    PtLocusPoint& pt = out[i];
    pt.kappa = kappas[i];
    DriveParams p = base;
    p.kappa = kappas[i];
    p.T = 0.0;
    try {
      p.validate();
      if (method == PtMethod::analytic) {
        const PtCondition c = pt_speed(p.m, p.nu, p.kappa);
        pt.f_pt = c.f_pt;
        pt.p_at_pt = tlz_probability(p.m, p.nu, p.kappa, c.f_pt).value;
        return;
      }
      if (p.m == 0.0 && p.kappa == 0.0) {
        // Gapless LZ: P -> 1 as F -> 0 with nothing to search for.
        p.F = 0.5 * kGaplessCell;
        pt.f_pt = 0.0;
        pt.p_at_pt = tunneling_probability(p);
        return;
      }
      const PtCondition c = pt_speed_search(p);
      pt.f_pt = c.f_pt;
      pt.p_at_pt = c.p_at_pt;
      pt.on_boundary = c.on_boundary;
      if (p.m == 0.0) {
        // The maximum approaches the excluded point F = 0.
        if (std::abs(c.f_pt) <= kGaplessCell) pt.f_pt = 0.0;
        else pt.error = "gapless maximum away from F = 0";
      } else if (c.on_boundary) {
        pt.error = "bracket exhausted";
      }
    } catch (const std::exception& e) {
      pt.f_pt = kNaN;
      pt.p_at_pt = kNaN;
      pt.error = one_line(e.what());
    }
  });
  return out;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_scan_csv(const ScanResult& result, std::ostream& out, const CsvOptions& opts) {
  const ScanSpec& spec = result.spec;
  out << "# tlz-scan v" << kToolVersion << '\n';
  for (const auto& [k, v] : spec_echo(spec)) out << "# " << k << '=' << v << '\n';
  if (!opts.deterministic) out << "# wall_time_s=" << format_double(result.wall_time_s) << '\n';
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const ScanPoint& pt = result.points[i];
    if (!pt.error.empty()) out << "# failed." << i << '=' << pt.error << '\n';
    if (pt.limit) out << "# limit." << i << "=F=0 convention\n";
  }

  const bool diag = spec.mode == ScanMode::numeric;
  for (const auto& a : spec.axes) out << to_string(a.param) << ',';
  out << 'P';
  if (diag) out << ",norm_drift,n_steps";
  out << '\n';

  for (const auto& pt : result.points) {
    for (double c : pt.coords) out << format_double(c) << ',';
    out << format_double(pt.p);
    if (diag) out << ',' << format_double(pt.norm_drift) << ',' << pt.n_steps;
    out << '\n';
  }
}

void export_csv(const ScanResult& result, const std::filesystem::path& path,
                const CsvOptions& opts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_scan_csv(result, out, opts);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

CsvTable read_scan_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find('=');
      if (eq != std::string::npos) {
        table.meta[body.substr(0, eq)] = body.substr(eq + 1);
      } else if (const auto sp = body.find(' '); sp != std::string::npos) {
        table.meta[body.substr(0, sp)] = body.substr(sp + 1);
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (table.columns.empty()) {
      table.columns = std::move(cells);
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0') {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace tlz
