#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tlz/propagator.hpp"
#include "tlz/scan.hpp"

using namespace tlz;

namespace {

ScanSpec reference_scan(std::size_t count) {
  ScanSpec s;
  s.axes = {Axis{ScanParam::F, -1.0, 1.0, count, AxisScale::linear}};
  s.fixed.m = 0.5e6;
  s.fixed.kappa = 0.2e-6;
  return s;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("axis grids") {
  SUBCASE("numeric grids never contain F = 0") {
    const auto v = axis_values({ScanParam::F, -1.0, 1.0, 101}, ScanMode::numeric);
    CHECK(v.size() == 101);
    CHECK(std::count(v.begin(), v.end(), 0.0) == 0);
    CHECK(v[50] == doctest::Approx(0.01));
    CHECK(std::is_sorted(v.begin(), v.end()));
    const auto edge = axis_values({ScanParam::F, 0.0, 1.0, 11}, ScanMode::dephased);
    CHECK(edge.front() == doctest::Approx(0.05));
    const auto top = axis_values({ScanParam::F, -1.0, 0.0, 11}, ScanMode::numeric);
    CHECK(top.back() == doctest::Approx(-0.05));
  }
  SUBCASE("analytic grids keep F = 0") {
    const auto v = axis_values({ScanParam::F, -1.0, 1.0, 101}, ScanMode::analytic);
    CHECK(v[50] == 0.0);
  }
  SUBCASE("zero is fine for other parameters") {
    const auto v = axis_values({ScanParam::kappa, 0.0, 3e-6, 4}, ScanMode::numeric);
    CHECK(v.front() == 0.0);
  }
  SUBCASE("log grids") {
    const auto v = axis_values({ScanParam::F, -1.0, -0.01, 3, AxisScale::log}, ScanMode::numeric);
    CHECK(v[0] == -1.0);
    CHECK(v[1] == doctest::Approx(-0.1));
    CHECK(v[2] == -0.01);
    CHECK_THROWS_AS(axis_values({ScanParam::F, -1.0, 1.0, 3, AxisScale::log}, ScanMode::numeric),
                    SpecError);
  }
}

TEST_CASE("spec validation") {
  ScanSpec s = reference_scan(3);
  CHECK_NOTHROW(s.validate());
  ScanSpec none;
  CHECK_THROWS_AS(none.validate(), SpecError);
  s.axes[0].count = 1;
  CHECK_THROWS_AS(s.validate(), SpecError);
  s = reference_scan(3);
  s.axes[0].hi = INFINITY;
  CHECK_THROWS_AS(s.validate(), SpecError);
  s = reference_scan(3);
  s.axes.push_back(s.axes[0]);
  CHECK_THROWS_AS(s.validate(), SpecError);
  s = reference_scan(3);
  s.axes[0].param = ScanParam::alpha;
  CHECK_THROWS_AS(s.validate(), SpecError);
  s.mode = ScanMode::amplitude_error;
  CHECK_NOTHROW(s.validate());
  s = reference_scan(3);
  s.fixed.nu = -1.0;
  CHECK_THROWS_AS(s.validate(), SpecError);
  CHECK_THROWS_AS(run_scan(s), SpecError);
}

TEST_CASE("speed scan peaks near the PT speed") {
  const ScanResult r = run_scan(reference_scan(101), 4);
  REQUIRE(r.points.size() == 101);
  const auto best = std::max_element(r.points.begin(), r.points.end(),
                                     [](const ScanPoint& a, const ScanPoint& b) { return a.p < b.p; });
  CHECK(best->p >= 0.99);
  CHECK(std::abs(best->coords[0] + 0.31) <= 0.03);
  CHECK(r.failures() == 0);
  for (const auto& pt : r.points) {
    CHECK(pt.p >= 0.0);
    CHECK(pt.p <= 1.0);
  }
}

TEST_CASE("analytic kappa x F map follows the PT locus") {
  ScanSpec s;
  s.mode = ScanMode::analytic;
  s.fixed.m = 0.5e6;
  s.axes = {Axis{ScanParam::kappa, 0.0, 3e-6, 31}, Axis{ScanParam::F, -1.0, 0.0, 2001}};
  const ScanResult r = run_scan(s, 4);
  REQUIRE(r.points.size() == 31 * 2001);
  CHECK(r.points.back().limit);
  CHECK(r.points.back().p == 0.0);
  for (std::size_t i = 1; i < 31; ++i) {
    const double kappa = r.grid[0][i];
    const double fpt = -4.0 * kPi * s.fixed.m / (s.fixed.nu * kappa);
    if (fpt < -1.0) continue;
    std::size_t best = 0;
    for (std::size_t j = 0; j < 2001; ++j) {
      if (r.points[i * 2001 + j].p > r.points[i * 2001 + best].p) best = j;
    }
    CHECK(std::abs(r.grid[1][best] - fpt) <= 0.5e-3 + 1e-12);
  }
}

TEST_CASE("amplitude-error scan has a plateau near one") {
  ScanSpec s;
  s.mode = ScanMode::amplitude_error;
  s.fixed.m = 0.5e6;
  s.fixed.kappa = 0.2e-6;
  s.fixed.F = pt_speed_search(s.fixed).f_pt;
  s.axes = {Axis{ScanParam::alpha, 0.5, 4.0, 36}};
  const ScanResult r = run_scan(s, 4);
  for (const auto& pt : r.points) {
    if (pt.coords[0] >= 0.7 && pt.coords[0] <= 1.5) CHECK(pt.p > 0.9);
  }
  CHECK(r.points[5].p == doctest::Approx(1.0).epsilon(0.005));  // alpha = 1
}

TEST_CASE("determinism and grid-point independence") {
  ScanSpec s = reference_scan(9);
  s.axes.push_back(Axis{ScanParam::kappa, -1e-6, 1e-6, 5});
  const ScanResult a = run_scan(s, 1);
  const ScanResult b = run_scan(s, 7);
  REQUIRE(a.points.size() == 45);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].coords == b.points[i].coords);
    CHECK(a.points[i].p == b.points[i].p);
    CHECK(a.points[i].n_steps == b.points[i].n_steps);
  }
  // row-major: axis2 varies fastest
  CHECK(a.points[1].coords[0] == a.points[0].coords[0]);
  CHECK(a.points[5].coords[0] > a.points[0].coords[0]);

  const ScanPoint& pt = a.points[17];
  DriveParams p = s.fixed;
  p.F = pt.coords[0];
  p.kappa = pt.coords[1];
  const SweepResult direct = propagate_sweep(resolve_duration(p));
  CHECK(pt.p == direct.p);
  CHECK(pt.n_steps == direct.n_steps);
  CHECK(evaluate_point(s, pt.coords).p == pt.p);
}

TEST_CASE("pinned T overrides the per-point duration") {
  ScanSpec s = reference_scan(3);
  s.fixed.T = 2e-6;
  const ScanResult r = run_scan(s);
  DriveParams p = s.fixed;
  p.F = r.points[0].coords[0];
  CHECK(r.points[0].p == propagate_sweep(p).p);
}

TEST_CASE("per-point failures are recorded, not thrown") {
  ScanSpec s;
  s.mode = ScanMode::amplitude_error;
  s.fixed.m = 0.5e6;
  s.fixed.kappa = 0.2e-6;
  s.fixed.F = -0.3142;
  s.axes = {Axis{ScanParam::alpha, -1.0, 1.0, 3}};
  const ScanResult r = run_scan(s);
  CHECK(r.failures() == 2);
  CHECK(std::isnan(r.points[0].p));
  CHECK_FALSE(r.points[0].error.empty());
  CHECK(r.points[2].error.empty());

  std::ostringstream csv;
  write_scan_csv(r, csv, {true});
  CHECK(count_of(csv.str(), "# failed.") == 2);
  CHECK(csv.str().find("\n-1,nan\n") != std::string::npos);
}

TEST_CASE("CSV layout") {
  const ScanResult r = run_scan(reference_scan(3));
  std::ostringstream out;
  write_scan_csv(r, out, {true});
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == std::string("# tlz-scan v") + kToolVersion);
  std::vector<std::string> data;
  std::string header;
  while (std::getline(in, line)) {
    if (line[0] == '#') continue;
    if (header.empty()) header = line;
    else data.push_back(line);
  }
  CHECK(header == "F,P,norm_drift,n_steps");
  REQUIRE(data.size() == 3);
  CHECK(data[0].rfind("-1,", 0) == 0);
  CHECK(data[1].rfind("0.5,", 0) == 0);
  CHECK(data[2].rfind("1,", 0) == 0);
  CHECK(out.str().find("wall_time_s") == std::string::npos);

  std::ostringstream timed;
  write_scan_csv(r, timed);
  CHECK(timed.str().find("# wall_time_s=") != std::string::npos);

  ScanSpec a = reference_scan(3);
  a.mode = ScanMode::analytic;
  std::ostringstream an;
  write_scan_csv(run_scan(a), an, {true});
  CHECK(an.str().find("\nF,P\n") != std::string::npos);
  CHECK(an.str().find("# limit.1=") != std::string::npos);
}

TEST_CASE("empty result writes a header-only file") {
  ScanResult r;
  r.spec = reference_scan(3);
  std::ostringstream out;
  write_scan_csv(r, out, {true});
  std::istringstream in(out.str());
  std::string line, last;
  std::size_t non_comment = 0;
  while (std::getline(in, line)) {
    if (line[0] != '#') {
      ++non_comment;
      last = line;
    }
  }
  CHECK(non_comment == 1);
  CHECK(last == "F,P,norm_drift,n_steps");
}

TEST_CASE("CSV round trip and byte stability") {
  ScanSpec s = reference_scan(7);
  s.axes.push_back(Axis{ScanParam::kappa, 0.1e-6, 2e-6, 4, AxisScale::log});
  const ScanResult r = run_scan(s, 3);
  const auto p1 = temp_file("tlz_scan_a.csv");
  const auto p2 = temp_file("tlz_scan_b.csv");
  export_csv(r, p1, {true});
  export_csv(run_scan(s, 1), p2, {true});

  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), {});
  const std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);

  const CsvTable t = read_scan_csv(p1);
  CHECK(t.columns == std::vector<std::string>{"F", "kappa", "P", "norm_drift", "n_steps"});
  REQUIRE(t.rows.size() == r.points.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(t.rows[i][0] == r.points[i].coords[0]);
    CHECK(t.rows[i][1] == r.points[i].coords[1]);
    CHECK(t.rows[i][2] == r.points[i].p);
    CHECK(t.rows[i][3] == r.points[i].norm_drift);
  }
  CHECK(t.meta.at("tlz-scan") == std::string("v") + kToolVersion);
  CHECK(t.meta.at("axis2.scale") == "log");

  // the echoed spec parses back to the same echo
  std::stringstream cfg;
  for (const auto& [k, v] : spec_echo(s)) cfg << k << " = " << v << '\n';
  CHECK(spec_echo(parse_scan_config(cfg)) == spec_echo(s));

  CHECK_THROWS(export_csv(r, temp_file("no_such_dir") / "x.csv"));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("config parser") {
  std::istringstream in(
      "# kappa-speed map\n"
      "mode = analytic\n"
      "axis1.param = kappa\n"
      "axis1.lo = 0\n"
      "axis1.hi = 3e-6\n"
      "axis1.count = 31\n"
      "axis2 = F:-1:0:201:linear   # speed\n"
      "m = 0.5e6\n"
      "\n"
      "fwhm=1.2e5\n");
  const ScanSpec s = parse_scan_config(in);
  CHECK(s.mode == ScanMode::analytic);
  REQUIRE(s.axes.size() == 2);
  CHECK(s.axes[0].param == ScanParam::kappa);
  CHECK(s.axes[0].hi == 3e-6);
  CHECK(s.axes[0].count == 31);
  CHECK(s.axes[1].param == ScanParam::F);
  CHECK(s.axes[1].count == 201);
  CHECK(s.fixed.m == 0.5e6);
  CHECK(s.dephasing.fwhm == 1.2e5);
  CHECK_NOTHROW(s.validate());

  auto parse = [](const std::string& text) {
    std::istringstream i(text);
    return parse_scan_config(i);
  };
  CHECK_THROWS_AS(parse("speed = 3\n"), SpecError);
  CHECK_THROWS_AS(parse("axis1.step = 3\n"), SpecError);
  CHECK_THROWS_AS(parse("axis3.lo = 3\n"), SpecError);
  CHECK_THROWS_AS(parse("m = fast\n"), SpecError);
  CHECK_THROWS_AS(parse("m 3\n"), SpecError);
  CHECK_THROWS_AS(parse("mode = exact\n"), SpecError);
  CHECK_THROWS_AS(parse("axis1 = F:0:1\n"), SpecError);
  CHECK_THROWS_AS(parse("axis1.count = -3\n"), SpecError);
  CHECK_THROWS_AS(load_scan_config(temp_file("tlz_missing.cfg")), SpecError);

  ScanSpec two = s;
  for (const auto& [k, v] : spec_echo(two)) {
    CHECK(std::find(config_keys().begin(), config_keys().end(), k) != config_keys().end());
  }
  CHECK(config_keys().size() == 26);
}

TEST_CASE("SVG rendering") {
  SUBCASE("1D with overlay") {
    const std::string svg = render_svg(run_scan(reference_scan(21)));
    CHECK(count_of(svg, "<polyline") == 2);
    CHECK(count_of(svg, "<rect") == 0);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    SvgOptions plain;
    plain.analytic_overlay = false;
    CHECK(count_of(render_svg(run_scan(reference_scan(21)), plain), "<polyline") == 1);
  }
  SUBCASE("numeric and analytic curves coincide away from F = 0") {
    ScanSpec s = reference_scan(41);
    const ScanResult num = run_scan(s, 4);
    s.mode = ScanMode::analytic;
    const ScanResult ana = run_scan(s);
    for (std::size_t i = 0; i < num.points.size(); ++i) {
      if (std::abs(num.points[i].coords[0]) >= 0.1) {
        CHECK(std::abs(num.points[i].p - ana.points[i].p) <= 0.05);
      }
    }
  }
  SUBCASE("2D heat grid with PT locus") {
    ScanSpec s;
    s.mode = ScanMode::analytic;
    s.fixed.m = 0.5e6;
    s.axes = {Axis{ScanParam::F, -1.0, 0.0, 12}, Axis{ScanParam::kappa, 0.0, 3e-6, 7}};
    const std::string svg = render_svg(run_scan(s));
    CHECK(count_of(svg, "<rect") == 12 * 7);
    CHECK(count_of(svg, "class=\"pt-locus\"") >= 1);
  }
  SUBCASE("2D without F/kappa axes has no locus") {
    ScanSpec s;
    s.mode = ScanMode::analytic;
    s.fixed.F = -0.3;
    s.axes = {Axis{ScanParam::m, 0.1e6, 1e6, 4}, Axis{ScanParam::kappa, 0.1e-6, 3e-6, 5}};
    const std::string svg = render_svg(run_scan(s));
    CHECK(count_of(svg, "<rect") == 20);
    CHECK(count_of(svg, "pt-locus") == 0);
  }
  SUBCASE("empty result") {
    ScanResult r;
    r.spec = reference_scan(3);
    CHECK_THROWS_AS(render_svg(r), SpecError);
  }
  SUBCASE("file export") {
    const auto path = temp_file("tlz_scan.svg");
    export_svg(run_scan(reference_scan(5)), path);
    CHECK(std::filesystem::file_size(path) > 200);
    std::filesystem::remove(path);
  }
}

TEST_CASE("PT locus") {
  DriveParams base;
  base.m = 0.5e6;
  SUBCASE("analytic") {
    const auto pts = pt_locus(base, 1.4e-6, 2.8e-6, 2, PtMethod::analytic);
    CHECK(pts[0].f_pt == doctest::Approx(-0.0449).epsilon(1e-3));
    CHECK(pts[0].p_at_pt == doctest::Approx(1.0));
    CHECK(pts[1].f_pt == doctest::Approx(-0.0449 / 2).epsilon(1e-3));
  }
  SUBCASE("numeric sits at higher speed for large m") {
    DriveParams big;
    big.m = 2e6;
    const auto ana = pt_locus(big, 0.5e-6, 3e-6, 6, PtMethod::analytic);
    const auto num = pt_locus(big, 0.5e-6, 3e-6, 6, PtMethod::numeric, 6);
    for (std::size_t i = 0; i < ana.size(); ++i) {
      CHECK(num[i].error.empty());
      CHECK(num[i].f_pt <= ana[i].f_pt);
    }
  }
  SUBCASE("gapless drive has f_pt = 0 for both methods") {
    DriveParams g;
    for (auto method : {PtMethod::analytic, PtMethod::numeric}) {
      for (const auto& pt : pt_locus(g, 0.0, 2.5e-6, 3, method, 3)) {
        CHECK(pt.error.empty());
        CHECK(pt.f_pt == 0.0);
      }
    }
  }
  SUBCASE("kappa range through zero with a gap") {
    CHECK_THROWS_AS(pt_locus(base, -1e-6, 1e-6, 5, PtMethod::analytic), SpecError);
    CHECK_THROWS_AS(pt_locus(base, 1e-6, 2e-6, 1, PtMethod::analytic), SpecError);
  }
}

TEST_CASE("string conversions") {
  for (auto p : {ScanParam::F, ScanParam::kappa, ScanParam::m, ScanParam::alpha}) {
    CHECK(parse_scan_param(to_string(p)) == p);
  }
  for (auto m : {ScanMode::numeric, ScanMode::analytic, ScanMode::dephased, ScanMode::amplitude_error}) {
    CHECK(parse_scan_mode(to_string(m)) == m);
  }
  for (auto c : {AmplitudeChannel::drive, AmplitudeChannel::prep, AmplitudeChannel::both}) {
    CHECK(parse_channel(to_string(c)) == c);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(-1.0) == "-1");
  const Axis a = parse_axis("kappa:1e-7:2e-6:5:log");
  CHECK(a.param == ScanParam::kappa);
  CHECK(a.scale == AxisScale::log);
  CHECK(a.count == 5);
}
