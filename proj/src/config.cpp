#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>

#include "tlz/scan.hpp"

namespace tlz {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) throw SpecError(key + ": not a number: '" + v + "'");
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw SpecError(key + ": not a non-negative integer: '" + v + "'");
  }
  return out;
}

Axis& axis_slot(ScanSpec& spec, std::size_t index) {
  if (spec.axes.size() <= index) spec.axes.resize(index + 1);
  return spec.axes[index];
}

}  // namespace

std::string to_string(ScanParam p) {
  switch (p) {
    case ScanParam::F: return "F";
    case ScanParam::kappa: return "kappa";
    case ScanParam::m: return "m";
    case ScanParam::alpha: return "alpha";
  }
  return "?";
}

std::string to_string(ScanMode m) {
  switch (m) {
    case ScanMode::numeric: return "numeric";
    case ScanMode::analytic: return "analytic";
    case ScanMode::dephased: return "dephased";
    case ScanMode::amplitude_error: return "amplitude-error";
  }
  return "?";
}

std::string to_string(AmplitudeChannel c) {
  switch (c) {
    case AmplitudeChannel::drive: return "drive";
    case AmplitudeChannel::prep: return "prep";
    case AmplitudeChannel::both: return "both";
  }
  return "?";
}

std::string to_string(AxisScale s) { return s == AxisScale::log ? "log" : "linear"; }

ScanParam parse_scan_param(const std::string& s) {
  if (s == "F") return ScanParam::F;
  if (s == "kappa") return ScanParam::kappa;
  if (s == "m") return ScanParam::m;
  if (s == "alpha") return ScanParam::alpha;
  throw SpecError("unknown axis parameter '" + s + "' (F, kappa, m, alpha)");
}

ScanMode parse_scan_mode(const std::string& s) {
  if (s == "numeric") return ScanMode::numeric;
  if (s == "analytic") return ScanMode::analytic;
  if (s == "dephased") return ScanMode::dephased;
  if (s == "amplitude-error") return ScanMode::amplitude_error;
  throw SpecError("unknown mode '" + s + "' (numeric, analytic, dephased, amplitude-error)");
}

AmplitudeChannel parse_channel(const std::string& s) {
  if (s == "drive") return AmplitudeChannel::drive;
  if (s == "prep") return AmplitudeChannel::prep;
  if (s == "both") return AmplitudeChannel::both;
  throw SpecError("unknown channel '" + s + "' (drive, prep, both)");
}

AxisScale parse_axis_scale(const std::string& s) {
  if (s == "linear") return AxisScale::linear;
  if (s == "log") return AxisScale::log;
  throw SpecError("unknown axis scale '" + s + "' (linear, log)");
}

Axis parse_axis(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = s.find(':', start);
    parts.push_back(trim(s.substr(start, colon - start)));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() < 4 || parts.size() > 5) {
    throw SpecError("axis '" + s + "': expected param:lo:hi:count[:linear|log]");
  }
  Axis a;
  a.param = parse_scan_param(parts[0]);
  a.lo = parse_double("axis.lo", parts[1]);
  a.hi = parse_double("axis.hi", parts[2]);
  a.count = parse_count("axis.count", parts[3]);
  if (parts.size() == 5) a.scale = parse_axis_scale(parts[4]);
  return a;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "mode",        "axis1",        "axis1.param", "axis1.lo",   "axis1.hi",  "axis1.count",
      "axis1.scale", "axis2",        "axis2.param", "axis2.lo",   "axis2.hi",  "axis2.count",
      "axis2.scale", "m",            "nu",          "kappa",      "F",         "T",
      "f_r_max",     "f_det_max",    "t_cap",       "alpha",      "channel",   "fwhm",
      "n_nodes",     "span_sigmas",
  };
  return keys;
}

void apply_config_key(ScanSpec& spec, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key.size() > 5 && key.rfind("axis", 0) == 0 && (key[4] == '1' || key[4] == '2')) {
    const std::size_t index = static_cast<std::size_t>(key[4] - '1');
    const std::string field = key.substr(5);
    Axis& a = axis_slot(spec, index);
    if (field.empty()) a = parse_axis(v);
    else if (field == ".param") a.param = parse_scan_param(v);
    else if (field == ".lo") a.lo = parse_double(key, v);
    else if (field == ".hi") a.hi = parse_double(key, v);
    else if (field == ".count") a.count = parse_count(key, v);
    else if (field == ".scale") a.scale = parse_axis_scale(v);
    else throw SpecError("unknown config key '" + key + "'");
    return;
  }
  if (key == "axis1" || key == "axis2") {
    axis_slot(spec, static_cast<std::size_t>(key[4] - '1')) = parse_axis(v);
  } else if (key == "mode") {
    spec.mode = parse_scan_mode(v);
  } else if (key == "m") {
    spec.fixed.m = parse_double(key, v);
  } else if (key == "nu") {
    spec.fixed.nu = parse_double(key, v);
  } else if (key == "kappa") {
    spec.fixed.kappa = parse_double(key, v);
  } else if (key == "F") {
    spec.fixed.F = parse_double(key, v);
  } else if (key == "T") {
    spec.fixed.T = parse_double(key, v);
  } else if (key == "f_r_max") {
    spec.fixed.limits.f_r_max = parse_double(key, v);
  } else if (key == "f_det_max") {
    spec.fixed.limits.f_det_max = parse_double(key, v);
  } else if (key == "t_cap") {
    spec.fixed.limits.t_cap = parse_double(key, v);
  } else if (key == "alpha") {
    spec.alpha = parse_double(key, v);
  } else if (key == "channel") {
    spec.channel = parse_channel(v);
  } else if (key == "fwhm") {
    spec.dephasing.fwhm = parse_double(key, v);
  } else if (key == "n_nodes") {
    spec.dephasing.n_nodes = static_cast<int>(parse_count(key, v));
  } else if (key == "span_sigmas") {
    spec.dephasing.span_sigmas = parse_double(key, v);
  } else {
    throw SpecError("unknown config key '" + key + "'");
  }
}

ScanSpec parse_scan_config(std::istream& in) {
  ScanSpec spec;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw SpecError("line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_config_key(spec, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const SpecError& e) {
      throw SpecError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return spec;
}

ScanSpec load_scan_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open config " + path.string());
  try {
    return parse_scan_config(in);
  } catch (const SpecError& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
}

std::vector<std::pair<std::string, std::string>> spec_echo(const ScanSpec& spec) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("mode", to_string(spec.mode));
  for (std::size_t i = 0; i < spec.axes.size(); ++i) {
    const Axis& a = spec.axes[i];
    const std::string prefix = "axis" + std::to_string(i + 1) + ".";
    out.emplace_back(prefix + "param", to_string(a.param));
    out.emplace_back(prefix + "lo", format_double(a.lo));
    out.emplace_back(prefix + "hi", format_double(a.hi));
    out.emplace_back(prefix + "count", std::to_string(a.count));
    out.emplace_back(prefix + "scale", to_string(a.scale));
  }
  const DriveParams& p = spec.fixed;
  out.emplace_back("m", format_double(p.m));
  out.emplace_back("nu", format_double(p.nu));
  out.emplace_back("kappa", format_double(p.kappa));
  out.emplace_back("F", format_double(p.F));
  out.emplace_back("T", format_double(p.T));
  out.emplace_back("f_r_max", format_double(p.limits.f_r_max));
  out.emplace_back("f_det_max", format_double(p.limits.f_det_max));
  out.emplace_back("t_cap", format_double(p.limits.t_cap));
  out.emplace_back("alpha", format_double(spec.alpha));
  out.emplace_back("channel", to_string(spec.channel));
  out.emplace_back("fwhm", format_double(spec.dephasing.fwhm));
  out.emplace_back("n_nodes", std::to_string(spec.dephasing.n_nodes));
  out.emplace_back("span_sigmas", format_double(spec.dephasing.span_sigmas));
  return out;
}

}  // namespace tlz
