#include "fracheat/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "fracheat/stats.hpp"

namespace fracheat::hitting {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NodeRange {
  std::size_t k0, k1, j0, j1;  // inclusive time/space index ranges
};

NodeRange resolve_window(const spde::SolverGrid& grid, const Window& w,
                         Mode mode) {
  if (!(w.t0 <= w.t1) || !(w.x0 <= w.x1))
    throw std::domain_error("hit window: degenerate bounds");
  if (w.t0 < 0.0 || w.t1 > grid.T * (1.0 + 1e-12))
    throw std::domain_error("hit window: time range outside grid");
  const double x_max = grid.node_x(grid.nx - 1);
  if (w.x0 < -grid.L || w.x1 > x_max + grid.dx() / 2.0)
    throw std::domain_error("hit window: space range outside torus");
  if (mode == Mode::fixed_time && w.t0 != w.t1)
    throw std::domain_error("hit window: fixed-time mode needs t0 == t1");
  if (mode == Mode::fixed_space && w.x0 != w.x1)
    throw std::domain_error("hit window: fixed-space mode needs x0 == x1");
  return {grid.index_of_t(w.t0), grid.index_of_t(w.t1), grid.index_of_x(w.x0),
          grid.index_of_x(w.x1)};
}

double min_window_distance(const spde::FieldSample& sample,
                           const NodeRange& range,
                           const potential::CompactSetSpec& target) {
  const int d = sample.d;
  std::vector<double> z(d);
  double best = kInf;
  for (std::size_t k = range.k0; k <= range.k1; ++k)
    for (std::size_t j = range.j0; j <= range.j1; ++j) {
      for (int c = 0; c < d; ++c) z[c] = sample.at(k, j, c);
      best = std::min(best, potential::set_distance(target, z));
    }
  return best;
}

double bounding_extent(const potential::CompactSetSpec& set) {
  double lo = kInf, hi = -kInf;
  for (const auto& b : set.boxes)
    for (int q = 0; q < set.d; ++q) {
      lo = std::min(lo, b.lo[q]);
      hi = std::max(hi, b.hi[q]);
    }
  for (const auto& p : set.points)
    for (double v : p) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return hi > lo ? hi - lo : 0.0;
}

}  // namespace

double grid_modulus(const spde::SolverGrid& grid) {
  const double a = grid.alpha.value();
  return std::pow(grid.dt(), (a - 1.0) / (2.0 * a)) +
         std::pow(grid.dx(), (a - 1.0) / 2.0);
}

std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n) {
  if (n == 0 || hits > n)
    throw std::domain_error("wilson_interval: need 0 <= hits <= n, n > 0");
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // clamp against rounding so the interval always brackets the point estimate
  return {std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0)};
}

bool hit_test(const spde::FieldSample& sample, const Window& window, Mode mode,
              const potential::CompactSetSpec& target, double delta) {
  if (delta < 0.0) throw std::domain_error("hit_test: delta must be >= 0");
  if (target.d != sample.d)
    throw std::domain_error("hit_test: target dimension mismatch");
  const NodeRange range = resolve_window(sample.grid, window, mode);
  return min_window_distance(sample, range, target) <= delta;
}

HittingResult hitting_probability_mc(const HittingExperiment& exp) {
  if (exp.n_samples < 100)
    throw std::domain_error("hitting_probability_mc: need n_samples >= 100");
  if (exp.target.d != exp.d)
    throw std::domain_error("hitting_probability_mc: target dimension mismatch");
  if (!(exp.window.t0 > 0.0))
    throw std::domain_error("hitting_probability_mc: window must start at t > 0");
  const double margin = std::pow(exp.grid.T, 1.0 / exp.grid.alpha.value());
  if (exp.window.x0 < -exp.grid.L + margin ||
      exp.window.x1 > exp.grid.L - margin)
    throw std::domain_error(
        "hitting_probability_mc: window too close to the torus seam (needs "
        "margin T^{1/a})");
  const NodeRange range = resolve_window(exp.grid, exp.window, exp.mode);

  double delta = exp.dilation;
  if (delta == 0.0) delta = exp.modulus_factor * grid_modulus(exp.grid);
  if (!(delta > 0.0))
    throw std::domain_error("hitting_probability_mc: dilation must be > 0");

  const auto coeffs = spde::CoefficientSet::preset(exp.preset, exp.d);
  std::vector<std::uint64_t> seeds(exp.n_samples);
  for (std::size_t i = 0; i < exp.n_samples; ++i)
    seeds[i] = exp.seed0 + static_cast<std::uint64_t>(i);

  // one scan per trajectory covers the base dilation and both sensitivities
  auto distances = spde::batch_solve(
      coeffs, exp.grid, seeds,
      [&](const spde::FieldSample& s) {
        return min_window_distance(s, range, exp.target);
      },
      exp.workers ? exp.workers : std::thread::hardware_concurrency());

  std::size_t hits = 0, hits_half = 0, hits_double = 0;
  for (double dist : distances) {
    hits += dist <= delta;
    hits_half += dist <= delta / 2.0;
    hits_double += dist <= 2.0 * delta;
  }

  HittingResult res;
  res.n = exp.n_samples;
  res.hit_count = hits;
  res.estimate = static_cast<double>(hits) / static_cast<double>(res.n);
  std::tie(res.ci_lo, res.ci_hi) = wilson_interval(hits, res.n);
  res.dilation = delta;
  res.estimate_half_dilation =
      static_cast<double>(hits_half) / static_cast<double>(res.n);
  res.estimate_double_dilation =
      static_cast<double>(hits_double) / static_cast<double>(res.n);

  const auto thr = potential::dimension_thresholds(exp.grid.alpha, exp.d);
  switch (exp.mode) {
    case Mode::space_time: res.threshold = thr.space_time; break;
    case Mode::fixed_time: res.threshold = thr.fixed_time; break;
    case Mode::fixed_space: res.threshold = thr.fixed_space; break;
  }
  double mesh = exp.capacity_mesh;
  if (mesh <= 0.0) {
    const double extent = bounding_extent(exp.target);
    mesh = extent > 0.0 ? extent / 64.0 : 1.0 / 64.0;
  }
  res.capacity_value =
      potential::capacity(exp.target, res.threshold, mesh).capacity;
  res.hausdorff_value =
      potential::hausdorff_premeasure(exp.target, res.threshold,
                                      exp.hausdorff_eps);
  return res;
}

SmallBallFit small_ball_scaling(const spde::SolverGrid& grid,
                                const std::string& preset, int d,
                                const std::vector<double>& z,
                                const std::vector<int>& levels,
                                std::size_t n_samples, std::uint64_t seed0,
                                double t_center) {
  if (levels.size() < 3)
    throw std::domain_error("small_ball_scaling: need >= 3 dyadic levels");
  if (n_samples < 100)
    throw std::domain_error("small_ball_scaling: need n_samples >= 100");
  if (z.size() != static_cast<std::size_t>(d))
    throw std::domain_error("small_ball_scaling: center dimension mismatch");
  if (preset != "additive" && preset != "bounded-smooth")
    throw std::domain_error(
        "small_ball_scaling: preset must be additive or bounded-smooth");
  const double a = grid.alpha.value();
  if (t_center <= 0.0) t_center = grid.T / 2.0;
  const std::size_t k0 = std::max<std::size_t>(1, grid.index_of_t(t_center));
  const std::size_t j0 = grid.index_of_x(0.0);

  // node ranges of the anisotropic cell anchored at (t_k0, x_j0), per level
  std::vector<NodeRange> cells;
  for (int n : levels) {
    if (n < 1 || std::ldexp(1.0, -n) < 1e-9)
      throw std::domain_error(
          "small_ball_scaling: level outside usable resolution");
    const double dt_cell = std::pow(2.0, -2.0 * n * a / (a - 1.0));
    const double dx_cell = std::pow(2.0, -2.0 * n / (a - 1.0));
    std::size_t k1 = k0, j1 = j0;
    while (k1 + 1 <= grid.nt &&
           grid.node_t(k1 + 1) <= grid.node_t(k0) + dt_cell)
      ++k1;
    while (j1 + 1 < grid.nx &&
           grid.node_x(j1 + 1) <= grid.node_x(j0) + dx_cell)
      ++j1;
    cells.push_back({k0, k1, j0, j1});
  }

  const auto coeffs = spde::CoefficientSet::preset(preset, d);
  std::vector<std::uint64_t> seeds(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i)
    seeds[i] = seed0 + static_cast<std::uint64_t>(i);
  potential::CompactSetSpec center{d, {}, {z}, 0.0};
  auto per_cell = spde::batch_solve(
      coeffs, grid, seeds, [&](const spde::FieldSample& s) {
        std::vector<double> dist(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
          dist[c] = min_window_distance(s, cells[c], center);
        return dist;
      });

  SmallBallFit fit;
  fit.levels = levels;
  std::vector<double> log_r, log_f;
  for (std::size_t c = 0; c < levels.size(); ++c) {
    const double radius = std::ldexp(1.0, -levels[c]);
    std::size_t hits = 0;
    for (const auto& dist : per_cell) hits += dist[c] <= radius;
    const double freq =
        static_cast<double>(hits) / static_cast<double>(n_samples);
    fit.radii.push_back(radius);
    fit.frequencies.push_back(freq);
    const bool usable = freq > 0.0 && freq <= 0.9;
    fit.used.push_back(usable);
    if (usable) {
      log_r.push_back(std::log(radius));
      log_f.push_back(std::log(freq));
    }
  }
  if (log_r.size() < 2)
    throw NumericError("small_ball_scaling: fewer than 2 usable ladder rungs",
                       static_cast<double>(log_r.size()));
  fit.exponent = stats::fit_line(log_r, log_f).slope;
  fit.slack = static_cast<double>(d) - fit.exponent;
  return fit;
}

BoundReport bound_comparison(const HittingResult& result) {
  BoundReport rep;
  if (result.capacity_value > 0.0) {
    rep.c1_applicable = true;
    rep.c1_hat = result.estimate / result.capacity_value;
  } else {
    rep.note += "capacity zero: lower-bound constant not applicable; ";
  }
  if (std::isfinite(result.hausdorff_value) && result.hausdorff_value > 0.0) {
    rep.c2_applicable = true;
    rep.c2_hat = result.estimate / result.hausdorff_value;
  } else if (std::isinf(result.hausdorff_value)) {
    rep.hausdorff_vacuous = true;
    rep.note += "hausdorff infinite: upper bound vacuous; ";
  } else {
    rep.note += "hausdorff zero: upper-bound constant not applicable; ";
  }
  if (result.capacity_value == 1.0)
    rep.lower_bound_sane = result.estimate > 0.0 && result.estimate <= 1.0;
  return rep;
}

}  // namespace fracheat::hitting
