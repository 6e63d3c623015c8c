#include "tlz/noise.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <gsl/gsl_integration.h>

#include "tlz/parallel.hpp"
#include "tlz/pulse.hpp"

namespace tlz {

namespace {

constexpr double kBisectTol = 1e-3;

struct GlTableDeleter {
  void operator()(gsl_integration_glfixed_table* t) const { gsl_integration_glfixed_table_free(t); }
};

// Refines the threshold crossing between a passing and a failing alpha.
double bisect_crossing(const RobustnessSpec& spec, double threshold, double pass, double fail) {
  while (std::abs(fail - pass) > kBisectTol) {
    const double mid = 0.5 * (pass + fail);
    if (control_probability(spec, mid) >= threshold) pass = mid;
    else fail = mid;
  }
  return 0.5 * (pass + fail);
}

}  // namespace

void DephasingModel::validate() const {
  if (!(fwhm >= 0.0) || !std::isfinite(fwhm)) throw DomainError("fwhm must be >= 0");
  if (n_nodes < 11 || n_nodes % 2 == 0) throw DomainError("n_nodes must be odd and >= 11");
  if (!(span_sigmas >= 3.0)) throw DomainError("span_sigmas must be >= 3");
}

double DephasingModel::sigma() const { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

DephasingProfile dephasing_profile(const DriveParams& params, const DephasingModel& model,
                                   unsigned jobs) {
  model.validate();
  const DriveParams p = resolve_duration(params);

  DephasingProfile out;
  if (model.fwhm == 0.0) {
    out.shifts = {0.0};
    out.weights = {1.0};
    out.probabilities = {propagate_sweep(p).p};
    out.p = out.probabilities.front();
    return out;
  }

  const double sigma = model.sigma();
  const double half = model.span_sigmas * sigma;
  const auto n = static_cast<std::size_t>(model.n_nodes);
  std::unique_ptr<gsl_integration_glfixed_table, GlTableDeleter> table(
      gsl_integration_glfixed_table_alloc(n));
  out.shifts.resize(n);
  out.weights.resize(n);
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = 0.0, w = 0.0;
    gsl_integration_glfixed_point(-half, half, i, &x, &w, table.get());
    out.shifts[i] = x;
    out.weights[i] = w * std::exp(-0.5 * (x / sigma) * (x / sigma));
    wsum += out.weights[i];
  }
  for (auto& w : out.weights) w /= wsum;

  out.probabilities.resize(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    PropagationOptions opts;
    opts.bz_offset = out.shifts[i];
    out.probabilities[i] = propagate_sweep(p, opts).p;
  });
  for (std::size_t i = 0; i < n; ++i) out.p += out.weights[i] * out.probabilities[i];
  return out;
}

double dephased_probability(const DriveParams& params, const DephasingModel& model,
                            unsigned jobs) {
  return dephasing_profile(params, model, jobs).p;
}

double amplitude_error_probability(const DriveParams& params, double alpha,
                                   AmplitudeChannel channel) {
  if (!(alpha > 0.0)) throw DomainError("amplitude error requires alpha > 0");
  const DriveParams p = resolve_duration(params);

  PropagationOptions opts;
  if (channel != AmplitudeChannel::prep) opts.drive_amp_scale = alpha;
  if (channel == AmplitudeChannel::drive) return propagate_sweep(p, opts).p;

  const PulseProgram prog =
      prep_rotation_error(synthesize_drive(p, 128.0 / p.T), alpha);
  const PrepStates states = prep_states(prog);
  return propagate_states(p, states.initial, states.target, opts).p;
}

double rabi_probability(double alpha) {
  if (!(alpha >= 0.0)) throw DomainError("rabi_probability requires alpha >= 0");
  return 0.5 * (1.0 - std::cos(alpha * kPi));
}

double control_probability(const RobustnessSpec& spec, double alpha) {
  if (spec.method == ControlMethod::rabi) return rabi_probability(alpha);
  return amplitude_error_probability(spec.params, alpha, spec.channel);
}

RobustnessInterval robustness_interval(const RobustnessSpec& spec, double threshold,
                                       std::span<const double> alpha_grid, unsigned jobs) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw DomainError("threshold must lie in (0, 1)");
  std::vector<double> grid(alpha_grid.begin(), alpha_grid.end());
  grid.push_back(1.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.front() <= 0.0) throw DomainError("alpha grid must be positive");

  std::vector<double> probs(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) { probs[i] = control_probability(spec, grid[i]); });

  RobustnessInterval out;
  out.method = spec.method;
  out.threshold = threshold;
  const auto centre = static_cast<std::size_t>(
      std::find(grid.begin(), grid.end(), 1.0) - grid.begin());
  if (probs[centre] < threshold) {
    out.empty = true;
    return out;
  }

  std::size_t lo = centre;
  while (lo > 0 && probs[lo - 1] >= threshold) --lo;
  if (lo == 0) {
    out.alpha_lo = grid.front();
    out.lo_clipped = true;
  } else {
    out.alpha_lo = bisect_crossing(spec, threshold, grid[lo], grid[lo - 1]);
  }

  std::size_t hi = centre;
  while (hi + 1 < grid.size() && probs[hi + 1] >= threshold) ++hi;
  if (hi + 1 == grid.size()) {
    out.alpha_hi = grid.back();
    out.hi_clipped = true;
  } else {
    out.alpha_hi = bisect_crossing(spec, threshold, grid[hi], grid[hi + 1]);
  }
  return out;
}

RobustnessInterval widest_interval(const RobustnessSpec& spec, double threshold,
                                   std::span<const double> alpha_grid, unsigned jobs) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw DomainError("threshold must lie in (0, 1)");
  std::vector<double> grid(alpha_grid.begin(), alpha_grid.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty() || grid.front() <= 0.0) throw DomainError("alpha grid must be positive");

  std::vector<double> probs(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) { probs[i] = control_probability(spec, grid[i]); });

  RobustnessInterval out;
  out.method = spec.method;
  out.threshold = threshold;
  out.empty = true;
  double best_width = -1.0;
  for (std::size_t i = 0; i < grid.size();) {
    if (probs[i] < threshold) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < grid.size() && probs[j + 1] >= threshold) ++j;
    RobustnessInterval run = out;
    run.empty = false;
    run.lo_clipped = i == 0;
    run.hi_clipped = j + 1 == grid.size();
    run.alpha_lo = run.lo_clipped ? grid[i] : bisect_crossing(spec, threshold, grid[i], grid[i - 1]);
    run.alpha_hi = run.hi_clipped ? grid[j] : bisect_crossing(spec, threshold, grid[j], grid[j + 1]);
    if (run.alpha_hi - run.alpha_lo > best_width) {
      best_width = run.alpha_hi - run.alpha_lo;
      out = run;
    }
    i = j + 1;
  }
  return out;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  if (count < 2) throw DomainError("grid needs at least 2 points");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = i + 1 == count ? hi : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
  return g;
}

}  // namespace tlz
