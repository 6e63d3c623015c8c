// tlz: command-line front end for the twisted Landau-Zener simulator.
//
//   tlz sweep --m 0.5e6 --kappa 0.2e-6 --F -0.3142
//   tlz scan --config scan.cfg --format svg --out scan.svg --jobs 8
//   tlz pt-locus --m 2e6 --kappa-lo 0.5e-6 --kappa-hi 3e-6 --method numeric
//   tlz pulse --m 0.5e6 --kappa 0.2e-6 --F -0.3142 --rate 1e9 --out wave.csv
//   tlz robustness --m 0.5e6 --kappa 0.2e-6 --threshold 0.9
//   tlz dephase --F 0.005 --fwhm 148e3
//
// Exit status: 0 ok, 1 per-point failures with --strict, 2 bad spec or I/O.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tlz/analytics.hpp"
#include "tlz/noise.hpp"
#include "tlz/propagator.hpp"
#include "tlz/pulse.hpp"
#include "tlz/scan.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPointFailures = 1;
constexpr int kExitSpec = 2;

struct Globals {
  std::string config;
  std::string out;
  std::string format = "csv";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool deterministic = false;
  bool strict = false;
};

// Config keys settable as --<key> on every subcommand; applied over --config.
const std::vector<std::string> kDriveKeys = {"m",       "nu",        "kappa", "F",
                                             "T",       "f_r_max",   "f_det_max",
                                             "t_cap",   "alpha",     "channel",
                                             "fwhm",    "n_nodes",   "span_sigmas"};

struct SpecFlags {
  std::map<std::string, std::string> values;
  std::vector<std::string> sets;  // --set key=value
};

void add_spec_flags(CLI::App* sub, SpecFlags& flags, const std::vector<std::string>& keys) {
  for (const auto& k : keys) {
    sub->add_option("--" + k, flags.values[k], "config key '" + k + "'");
  }
  sub->add_option("--set", flags.sets, "extra key=value spec entries")->take_all();
}

tlz::ScanSpec build_spec(const Globals& g, CLI::App* sub, const SpecFlags& flags) {
  tlz::ScanSpec spec = g.config.empty() ? tlz::ScanSpec{} : tlz::load_scan_config(g.config);
  for (const auto& [k, v] : flags.values) {
    if (sub->count("--" + k) > 0) tlz::apply_config_key(spec, k, v);
  }
  for (const auto& kv : flags.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw tlz::SpecError("--set expects key=value, got '" + kv + "'");
    tlz::apply_config_key(spec, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return spec;
}

// Text goes to --out when given, stdout otherwise.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + g.out + " for writing");
  f << text;
  if (!f.flush()) throw std::runtime_error("write failed for " + g.out);
}

int finish_points(const Globals& g, std::size_t failures) {
  if (failures == 0) return kExitOk;
  std::cerr << "tlz: " << failures << " point(s) failed\n";
  return g.strict ? kExitPointFailures : kExitOk;
}

using tlz::format_double;

int run_sweep(const Globals& g, const tlz::ScanSpec& spec) {
  const tlz::DriveParams p = tlz::resolve_duration(spec.fixed);
  tlz::PropagationOptions opts;
  const tlz::SweepResult r = tlz::propagate_sweep(p, opts);
  std::ostringstream s;
  s << "P=" << format_double(r.p) << '\n'
    << "P_tlz_formula=" << format_double(tlz::tlz_probability(p.m, p.nu, p.kappa, p.F).value) << '\n'
    << "P_lz_formula=" << format_double(tlz::lz_probability(p.m, p.nu, p.F).value) << '\n'
    << "T_s=" << format_double(p.T) << '\n'
    << "norm_drift=" << format_double(r.norm_drift) << '\n'
    << "n_steps=" << r.n_steps << '\n';
  if (p.m == 0.0 || p.kappa != 0.0) {
    s << "F_pt=" << format_double(tlz::pt_speed(p.m, p.nu, p.kappa).f_pt) << '\n';
  }
  emit(g, s.str());
  return kExitOk;
}

int run_scan_cmd(const Globals& g, const tlz::ScanSpec& spec) {
  const tlz::ScanResult r = tlz::run_scan(spec, g.jobs);
  if (g.format == "svg") {
    emit(g, tlz::render_svg(r));
  } else {
    std::ostringstream s;
    tlz::write_scan_csv(r, s, {g.deterministic});
    emit(g, s.str());
  }
  return finish_points(g, r.failures());
}

int run_pt_locus(const Globals& g, const tlz::ScanSpec& spec, double klo, double khi,
                 std::size_t count, const std::string& method) {
  const tlz::PtMethod m = method == "numeric" ? tlz::PtMethod::numeric : tlz::PtMethod::analytic;
  const auto pts = tlz::pt_locus(spec.fixed, klo, khi, count, m, g.jobs);
  std::ostringstream s;
  s << "# tlz-scan v" << tlz::kToolVersion << '\n'
    << "# pt-locus method=" << method << '\n'
    << "# m=" << format_double(spec.fixed.m) << '\n'
    << "# nu=" << format_double(spec.fixed.nu) << '\n';
  std::size_t failures = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!pts[i].error.empty()) {
      s << "# failed." << i << '=' << pts[i].error << '\n';
      ++failures;
    }
  }
  s << "kappa,f_pt,p_at_pt,on_boundary\n";
  for (const auto& pt : pts) {
    s << format_double(pt.kappa) << ',' << format_double(pt.f_pt) << ','
      << format_double(pt.p_at_pt) << ',' << (pt.on_boundary ? 1 : 0) << '\n';
  }
  emit(g, s.str());
  return finish_points(g, failures);
}

int run_pulse(const Globals& g, const tlz::ScanSpec& spec, double rate, bool iq, bool check) {
  const tlz::DriveParams p = tlz::resolve_duration(spec.fixed);
  const tlz::PulseProgram prog = tlz::synthesize_drive(p, rate);
  std::ostream& info = g.out.empty() ? std::cerr : std::cout;
  info << "T_s=" << format_double(prog.T) << '\n'
       << "samples=" << prog.samples.size() << '\n'
       << "theta_i=" << format_double(prog.prep.theta_i) << '\n'
       << "phi_i=" << format_double(prog.prep.phi_i) << '\n'
       << "theta_f=" << format_double(prog.prep.theta_f) << '\n'
       << "phi_f=" << format_double(prog.prep.phi_f) << '\n';
  bool ok = true;
  for (const auto& c : prog.constraints) {
    info << "constraint." << c.name << '=' << (c.pass ? "ok" : "VIOLATED") << " max "
         << format_double(c.observed_max) << " limit " << format_double(c.limit) << '\n';
    ok = ok && c.pass;
  }
  if (check) {
    const tlz::PrepStates st = tlz::prep_states(prog);
    const auto field = tlz::reconstruct_field(prog);
    const double p_wave = tlz::propagate_field(tlz::sampled_field(prog, field), prog.T,
                                               st.initial, st.target).p;
    info << "P_ideal=" << format_double(tlz::propagate_sweep(p).p) << '\n'
         << "P_waveform=" << format_double(p_wave) << '\n';
  }
  if (!g.out.empty()) {
    tlz::write_waveform_csv(prog, g.out, iq ? tlz::WaveformColumns::iq : tlz::WaveformColumns::polar);
  } else {
    std::cout << (iq ? "t_s,I_Hz,Q_Hz,f_det_Hz\n" : "t_s,f_R_Hz,phi_rad,f_det_Hz\n");
    for (const auto& s : prog.samples) {
      const double a = iq ? s.f_r * std::cos(s.phi) : s.f_r;
      const double b = iq ? s.f_r * std::sin(s.phi) : s.phi;
      std::cout << format_double(s.t) << ',' << format_double(a) << ',' << format_double(b) << ','
                << format_double(s.f_det) << '\n';
    }
  }
  return ok || !g.strict ? kExitOk : kExitPointFailures;
}

int run_robustness(const Globals& g, const tlz::ScanSpec& spec, double threshold, double lo,
                   double hi, std::size_t count, bool widest) {
  const auto grid = tlz::linear_grid(lo, hi, count);
  tlz::RobustnessSpec rabi{tlz::ControlMethod::rabi, {}, spec.channel};
  tlz::RobustnessSpec tlzc{tlz::ControlMethod::tlz, spec.fixed, spec.channel};
  if (tlzc.params.F == 0.0) {
    tlzc.params.F = tlz::pt_speed_search(tlzc.params, {41, 1e-4, g.jobs}).f_pt;
  }
  auto interval = [&](const tlz::RobustnessSpec& s) {
    return widest ? tlz::widest_interval(s, threshold, grid, g.jobs)
                  : tlz::robustness_interval(s, threshold, grid, g.jobs);
  };
  std::ostringstream s;
  s << "# tlz-scan v" << tlz::kToolVersion << '\n'
    << "# robustness threshold=" << format_double(threshold)
    << " channel=" << tlz::to_string(spec.channel) << " F=" << format_double(tlzc.params.F)
    << '\n'
    << "method,alpha_lo,alpha_hi,width,empty,lo_clipped,hi_clipped\n";
  for (const auto* spec_ptr : {&rabi, &tlzc}) {
    const tlz::RobustnessInterval r = interval(*spec_ptr);
    s << (spec_ptr == &rabi ? "rabi" : "tlz") << ',' << format_double(r.alpha_lo) << ','
      << format_double(r.alpha_hi) << ',' << format_double(r.empty ? 0.0 : r.alpha_hi - r.alpha_lo)
      << ',' << r.empty << ',' << r.lo_clipped << ',' << r.hi_clipped << '\n';
  }
  emit(g, s.str());
  return kExitOk;
}

int run_dephase(const Globals& g, const tlz::ScanSpec& spec) {
  const tlz::DephasingProfile prof = tlz::dephasing_profile(spec.fixed, spec.dephasing, g.jobs);
  tlz::DephasingModel ideal = spec.dephasing;
  ideal.fwhm = 0.0;
  std::ostringstream s;
  s << "# tlz-scan v" << tlz::kToolVersion << '\n'
    << "# P_lw=" << format_double(prof.p) << '\n'
    << "# P_ideal=" << format_double(tlz::dephased_probability(spec.fixed, ideal)) << '\n'
    << "# fwhm=" << format_double(spec.dephasing.fwhm) << '\n'
    << "shift_Hz,weight,P\n";
  for (std::size_t i = 0; i < prof.shifts.size(); ++i) {
    s << format_double(prof.shifts[i]) << ',' << format_double(prof.weights[i]) << ','
      << format_double(prof.probabilities[i]) << '\n';
  }
  emit(g, s.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twisted Landau-Zener sweep simulator"};
  app.set_version_flag("--version", std::string("tlz ") + tlz::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "flat key=value config file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output path (default stdout)");
  app.add_option("--format", g.format, "scan output format")->check(CLI::IsMember({"csv", "svg"}));
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--deterministic", g.deterministic, "omit wall-time metadata");
  app.add_flag("--strict", g.strict, "exit 1 when any point fails");

  SpecFlags sweep_f, scan_f, locus_f, pulse_f, robust_f, deph_f;

  auto* sweep = app.add_subcommand("sweep", "single sweep: P and integrator diagnostics");
  add_spec_flags(sweep, sweep_f, kDriveKeys);

  auto* scan = app.add_subcommand("scan", "1D/2D parameter scan");
  std::vector<std::string> scan_keys = kDriveKeys;
  scan_keys.insert(scan_keys.begin(), {"mode", "axis1", "axis2"});
  add_spec_flags(scan, scan_f, scan_keys);

  auto* locus = app.add_subcommand("pt-locus", "perfect-tunneling speed versus kappa");
  add_spec_flags(locus, locus_f, {"m", "nu", "f_r_max", "f_det_max", "t_cap"});
  double klo = 0.5e-6, khi = 3e-6;
  std::size_t kcount = 11;
  std::string method = "analytic";
  locus->add_option("--kappa-lo", klo);
  locus->add_option("--kappa-hi", khi);
  locus->add_option("--count", kcount)->check(CLI::Range(2, 100000));
  locus->add_option("--method", method)->check(CLI::IsMember({"analytic", "numeric"}));

  auto* pulse = app.add_subcommand("pulse", "synthesize, verify and export the drive waveform");
  add_spec_flags(pulse, pulse_f, kDriveKeys);
  double rate = 1e9;
  bool iq = false, check = false;
  pulse->add_option("--rate", rate, "samples per second")->check(CLI::PositiveNumber);
  pulse->add_flag("--iq", iq, "I/Q columns instead of amplitude/phase");
  pulse->add_flag("--check", check, "simulate the sweep from the sampled waveform");

  auto* robust = app.add_subcommand("robustness", "amplitude-error intervals, Rabi vs TLZ");
  add_spec_flags(robust, robust_f, kDriveKeys);
  double threshold = 0.9, alo = 0.5, ahi = 4.0;
  std::size_t acount = 141;
  bool widest = false;
  robust->add_option("--threshold", threshold);
  robust->add_option("--alpha-lo", alo);
  robust->add_option("--alpha-hi", ahi);
  robust->add_option("--alpha-count", acount)->check(CLI::Range(2, 1000000));
  robust->add_flag("--widest", widest, "widest passing interval anywhere on the grid");

  auto* deph = app.add_subcommand("dephase", "Gaussian quasi-static dephasing average");
  add_spec_flags(deph, deph_f, kDriveKeys);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitSpec;
  }

  try {
    if (*sweep) return run_sweep(g, build_spec(g, sweep, sweep_f));
    if (*scan) return run_scan_cmd(g, build_spec(g, scan, scan_f));
    if (*locus) return run_pt_locus(g, build_spec(g, locus, locus_f), klo, khi, kcount, method);
    if (*pulse) return run_pulse(g, build_spec(g, pulse, pulse_f), rate, iq, check);
    if (*robust) {
      return run_robustness(g, build_spec(g, robust, robust_f), threshold, alo, ahi, acount, widest);
    }
    if (*deph) return run_dephase(g, build_spec(g, deph, deph_f));
  } catch (const std::exception& e) {
    std::cerr << "tlz: " << e.what() << '\n';
    return kExitSpec;
  }
  return kExitSpec;
}
