// Parameter scans over the TLZ model, PT loci, and their CSV/SVG exports.
#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tlz/analytics.hpp"
#include "tlz/model.hpp"
#include "tlz/noise.hpp"

namespace tlz {

inline constexpr const char* kToolVersion = TLZ_VERSION;

/// Malformed scan spec or config file.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScanParam { F, kappa, m, alpha };
enum class AxisScale { linear, log };
enum class ScanMode { numeric, analytic, dephased, amplitude_error };

struct Axis {
  ScanParam param = ScanParam::F;
  double lo = -1.0;
  double hi = 1.0;
  std::size_t count = 101;
  AxisScale scale = AxisScale::linear;
};

struct ScanSpec {
  std::vector<Axis> axes;  // one or two
  DriveParams fixed{};     // fixed.T > 0 pins the duration for every point
  ScanMode mode = ScanMode::numeric;
  DephasingModel dephasing{};
  double alpha = 1.0;
  AmplitudeChannel channel = AmplitudeChannel::drive;

  /// Throws SpecError.
  void validate() const;
};

/// Grid values of one axis. Outside analytic mode an exact F = 0 is moved by
/// half a step towards the interior.
std::vector<double> axis_values(const Axis& axis, ScanMode mode);

struct ScanPoint {
  std::vector<double> coords;  // one per axis
  double p = 0.0;              // NaN when the point failed
  double norm_drift = 0.0;     // numeric mode only
  std::size_t n_steps = 0;     // numeric mode only
  bool limit = false;          // analytic F = 0 limit value
  std::string error;           // non-empty when the point failed
};

struct ScanResult {
  ScanSpec spec;
  std::vector<std::vector<double>> grid;  // axis values per axis
  std::vector<ScanPoint> points;          // row-major in axis order
  double wall_time_s = 0.0;

  std::size_t failures() const;
};

/// Evaluates every grid point on up to `jobs` threads.
ScanResult run_scan(const ScanSpec& spec, unsigned jobs = 1);

/// The single-point evaluation run_scan performs at the given coordinates.
ScanPoint evaluate_point(const ScanSpec& spec, const std::vector<double>& coords);

enum class PtMethod { analytic, numeric };

struct PtLocusPoint {
  double kappa = 0.0;
  double f_pt = 0.0;
  double p_at_pt = 0.0;
  bool on_boundary = false;
  std::string error;
};

/// PT speed per kappa on a linear grid [kappa_lo, kappa_hi] with `count` points.
std::vector<PtLocusPoint> pt_locus(const DriveParams& base, double kappa_lo, double kappa_hi,
                                   std::size_t count, PtMethod method, unsigned jobs = 1);

struct CsvOptions {
  bool deterministic = false;  // drop the wall-time line
};

void write_scan_csv(const ScanResult& result, std::ostream& out, const CsvOptions& opts = {});
void export_csv(const ScanResult& result, const std::filesystem::path& path,
                const CsvOptions& opts = {});

/// Parsed back CSV: column names and numeric rows (header comments kept as
/// key/value pairs).
struct CsvTable {
  std::map<std::string, std::string> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
CsvTable read_scan_csv(const std::filesystem::path& path);

struct SvgOptions {
  bool analytic_overlay = true;  // TLZ formula curve (1D) or PT locus (2D F/kappa)
  int width = 640;
  int height = 420;
};

std::string render_svg(const ScanResult& result, const SvgOptions& opts = {});
void export_svg(const ScanResult& result, const std::filesystem::path& path,
                const SvgOptions& opts = {});

// Flat key=value config ------------------------------------------------------

/// Parses `key = value` lines ('#' comments). Unknown keys throw SpecError.
ScanSpec parse_scan_config(std::istream& in);
ScanSpec load_scan_config(const std::filesystem::path& path);

/// Applies one key/value pair; used by the config parser and the CLI.
void apply_config_key(ScanSpec& spec, const std::string& key, const std::string& value);

/// Canonical key/value echo of a spec, in a fixed order.
std::vector<std::pair<std::string, std::string>> spec_echo(const ScanSpec& spec);

/// Documented config keys, in echo order.
const std::vector<std::string>& config_keys();

std::string to_string(ScanParam p);
std::string to_string(ScanMode m);
std::string to_string(AmplitudeChannel c);
std::string to_string(AxisScale s);
ScanParam parse_scan_param(const std::string& s);
ScanMode parse_scan_mode(const std::string& s);
AmplitudeChannel parse_channel(const std::string& s);
AxisScale parse_axis_scale(const std::string& s);

/// Parses "param:lo:hi:count[:linear|log]".
Axis parse_axis(const std::string& s);

/// %.17g formatting.
std::string format_double(double x);

}  // namespace tlz
