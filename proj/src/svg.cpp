#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tlz/scan.hpp"

namespace tlz {

namespace {

constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 30;
constexpr int kMarginBottom = 50;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Piecewise-linear map from a grid value to its fractional index.
double fractional_index(const std::vector<double>& grid, double v) {
  const bool ascending = grid.back() >= grid.front();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid[i], b = grid[i + 1];
    const bool inside = ascending ? (v >= a && v <= b) : (v <= a && v >= b);
    if (inside) return b == a ? static_cast<double>(i) : i + (v - a) / (b - a);
  }
  return -1.0;
}

// Five-stop viridis approximation.
std::string colour(double p) {
  if (!std::isfinite(p)) return "#bbbbbb";
  static constexpr std::array<std::array<double, 3>, 5> stops = {{
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  const double x = std::clamp(p, 0.0, 1.0) * (stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(x), stops.size() - 2);
  const double f = x - static_cast<double>(i);
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c) {
    rgb[c] = static_cast<int>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c])));
  }
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

// Reference curve for a 1D scan: the closed forms at the scanned points.
std::vector<double> overlay_values(const ScanResult& r) {
  const ScanSpec& spec = r.spec;
  std::vector<double> out;
  for (double v : r.grid.front()) {
    DriveParams p = spec.fixed;
    double y = std::nan("");
    switch (spec.axes.front().param) {
      case ScanParam::F: p.F = v; break;
      case ScanParam::kappa: p.kappa = v; break;
      case ScanParam::m: p.m = v; break;
      case ScanParam::alpha: y = rabi_probability(v); break;
    }
    if (spec.axes.front().param != ScanParam::alpha) {
      y = tlz_probability(p.m, p.nu, p.kappa, p.F).value;
    }
    out.push_back(y);
  }
  return out;
}

void polyline(std::ostringstream& svg, const std::vector<std::pair<double, double>>& pts,
              const char* stroke, const char* extra) {
  if (pts.size() < 2) return;
  svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"" << extra
      << " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    svg << (i ? " " : "") << fmt(pts[i].first) << ',' << fmt(pts[i].second);
  }
  svg << "\"/>\n";
}

}  // namespace

std::string render_svg(const ScanResult& result, const SvgOptions& opts) {
  if (result.points.empty() || result.grid.empty()) throw SpecError("cannot plot an empty scan");
  const ScanSpec& spec = result.spec;
  const double w = opts.width - kMarginLeft - kMarginRight;
  const double h = opts.height - kMarginTop - kMarginBottom;
  const double x0 = kMarginLeft;
  const double y0 = kMarginTop;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\""
      << opts.height << "\" viewBox=\"0 0 " << opts.width << ' ' << opts.height << "\">\n"
      << "<title>tlz-scan " << to_string(spec.mode) << "</title>\n"
      << "<g font-family=\"sans-serif\" font-size=\"11\">\n";

  const auto& gx = result.grid[0];
  const std::string xname = to_string(spec.axes[0].param);

  if (result.grid.size() == 1) {
    const double lo = std::min(gx.front(), gx.back());
    const double hi = std::max(gx.front(), gx.back());
    auto px = [&](double v) { return x0 + (hi > lo ? (v - lo) / (hi - lo) : 0.5) * w; };
    auto py = [&](double p) { return y0 + (1.0 - p) * h; };

    svg << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0 + h) << "\" x2=\"" << fmt(x0 + w)
        << "\" y2=\"" << fmt(y0 + h) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x0)
        << "\" y2=\"" << fmt(y0 + h) << "\" stroke=\"black\"/>\n";

    std::vector<std::pair<double, double>> pts;
    for (const auto& pt : result.points) {
      if (std::isfinite(pt.p)) pts.emplace_back(px(pt.coords[0]), py(pt.p));
    }
    polyline(svg, pts, "#1f4e9c", " class=\"scan\"");

    if (opts.analytic_overlay) {
      const auto ref = overlay_values(result);
      std::vector<std::pair<double, double>> rp;
      for (std::size_t i = 0; i < gx.size(); ++i) {
        if (std::isfinite(ref[i])) rp.emplace_back(px(gx[i]), py(ref[i]));
      }
      polyline(svg, rp, "#d62728", " stroke-dasharray=\"5,3\" class=\"analytic\"");
    }

    svg << "<text x=\"" << fmt(x0) << "\" y=\"" << fmt(y0 + h + 16) << "\">" << label(lo)
        << "</text>\n"
        << "<text x=\"" << fmt(x0 + w) << "\" y=\"" << fmt(y0 + h + 16)
        << "\" text-anchor=\"end\">" << label(hi) << "</text>\n"
        << "<text x=\"" << fmt(x0 + 0.5 * w) << "\" y=\"" << fmt(y0 + h + 36)
        << "\" text-anchor=\"middle\">" << xname << "</text>\n"
        << "<text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(y0 + 4)
        << "\" text-anchor=\"end\">1</text>\n"
        << "<text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(y0 + h)
        << "\" text-anchor=\"end\">0</text>\n"
        << "<text x=\"" << fmt(x0 - 40) << "\" y=\"" << fmt(y0 + 0.5 * h) << "\">P</text>\n";
  } else {
    const auto& gy = result.grid[1];
    const std::string yname = to_string(spec.axes[1].param);
    const double cw = w / static_cast<double>(gx.size());
    const double ch = h / static_cast<double>(gy.size());
    // axis1 runs left to right, axis2 bottom to top
    for (std::size_t i = 0; i < gx.size(); ++i) {
      for (std::size_t j = 0; j < gy.size(); ++j) {
        const ScanPoint& pt = result.points[i * gy.size() + j];
        svg << "<rect x=\"" << fmt(x0 + i * cw) << "\" y=\"" << fmt(y0 + h - (j + 1) * ch)
            << "\" width=\"" << fmt(cw) << "\" height=\"" << fmt(ch) << "\" fill=\""
            << colour(pt.p) << "\"/>\n";
      }
    }

    const ScanParam px_param = spec.axes[0].param;
    const ScanParam py_param = spec.axes[1].param;
    const bool f_kappa = (px_param == ScanParam::F && py_param == ScanParam::kappa) ||
                         (px_param == ScanParam::kappa && py_param == ScanParam::F);
    if (opts.analytic_overlay && f_kappa) {
      const auto& gk = px_param == ScanParam::kappa ? gx : gy;
      const auto& gf = px_param == ScanParam::F ? gx : gy;
      const double klo = std::min(gk.front(), gk.back());
      const double khi = std::max(gk.front(), gk.back());
      std::vector<std::pair<double, double>> run;
      constexpr int kSamples = 400;
      for (int s = 0; s <= kSamples; ++s) {
        const double k = klo + (khi - klo) * s / kSamples;
        double f = std::nan("");
        if (spec.fixed.m == 0.0) f = 0.0;
        else if (k != 0.0) f = pt_speed(spec.fixed.m, spec.fixed.nu, k).f_pt;
        const double fi = std::isfinite(f) ? fractional_index(gf, f) : -1.0;
        const double ki = fractional_index(gk, k);
        if (fi < 0.0 || ki < 0.0) {
          polyline(svg, run, "black", " class=\"pt-locus\"");
          run.clear();
          continue;
        }
        const double ix = px_param == ScanParam::F ? fi : ki;
        const double iy = px_param == ScanParam::F ? ki : fi;
        run.emplace_back(x0 + (ix + 0.5) * cw, y0 + h - (iy + 0.5) * ch);
      }
      polyline(svg, run, "black", " class=\"pt-locus\"");
    }

    svg << "<text x=\"" << fmt(x0) << "\" y=\"" << fmt(y0 + h + 16) << "\">" << label(gx.front())
        << "</text>\n"
        << "<text x=\"" << fmt(x0 + w) << "\" y=\"" << fmt(y0 + h + 16)
        << "\" text-anchor=\"end\">" << label(gx.back()) << "</text>\n"
        << "<text x=\"" << fmt(x0 + 0.5 * w) << "\" y=\"" << fmt(y0 + h + 36)
        << "\" text-anchor=\"middle\">" << xname << "</text>\n"
        << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(y0 + h)
        << "\" text-anchor=\"end\">" << label(gy.front()) << "</text>\n"
        << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(y0 + 10)
        << "\" text-anchor=\"end\">" << label(gy.back()) << "</text>\n"
        << "<text x=\"" << fmt(x0 - 40) << "\" y=\"" << fmt(y0 + 0.5 * h) << "\">" << yname
        << "</text>\n";
  }

  svg << "</g>\n</svg>\n";
  return svg.str();
}

void export_svg(const ScanResult& result, const std::filesystem::path& path,
                const SvgOptions& opts) {
  const std::string body = render_svg(result, opts);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << body;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace tlz
