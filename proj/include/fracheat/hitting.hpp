#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fracheat/potential.hpp"
#include "fracheat/spde.hpp"
#include "fracheat/types.hpp"

namespace fracheat::hitting {

enum class Mode { space_time, fixed_time, fixed_space };

/// Space-time window I x J = [t0, t1] x [x0, x1] with 0 < t0 <= t1 <= T.
/// Fixed-time mode uses t0 == t1; fixed-space mode uses x0 == x1.
struct Window {
  double t0 = 0.0, t1 = 0.0;
  double x0 = 0.0, x1 = 0.0;
};

/// Parabolic-scale spacing of the observation grid,
/// dt^{(a-1)/(2a)} + dx^{(a-1)/2}; the natural unit for the hit-detection
/// dilation.
double grid_modulus(const spde::SolverGrid& grid);

struct HittingExperiment {
  spde::SolverGrid grid;
  std::string preset = "additive";
  int d = 1;
  Mode mode = Mode::space_time;
  Window window;
  potential::CompactSetSpec target;
  double dilation = 0.0;      // 0 selects modulus_factor * grid_modulus
  double modulus_factor = 1.0;
  std::size_t n_samples = 0;
  std::uint64_t seed0 = 0;
  std::size_t substeps = 1;
  double capacity_mesh = 0.0;  // 0 selects target extent / 64
  double hausdorff_eps = 1.0 / 64.0;
  unsigned workers = 0;        // 0 selects hardware concurrency
};

struct HittingResult {
  double estimate = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // Wilson 95%
  std::size_t n = 0;
  std::size_t hit_count = 0;
  double dilation = 0.0;
  // hit rates under halved / doubled dilation (detection sensitivity)
  double estimate_half_dilation = 0.0;
  double estimate_double_dilation = 0.0;
  double threshold = 0.0;  // capacity/Hausdorff order for the mode
  double capacity_value = 0.0;
  double hausdorff_value = 0.0;
};

/// Wilson 95% score interval for hits successes out of n trials.
std::pair<double, double> wilson_interval(std::size_t hits, std::size_t n);

/// True iff some grid node (t, x) in the window has dist(u(t, x), target)
/// <= delta.  delta compensates for excursions between observation nodes.
bool hit_test(const spde::FieldSample& sample, const Window& window, Mode mode,
              const potential::CompactSetSpec& target, double delta);

/// Monte Carlo hitting probability with seeds seed0 .. seed0 + n - 1;
/// attaches the capacity and Hausdorff pre-measure of the target at the
/// threshold dimension for the window mode.
HittingResult hitting_probability_mc(const HittingExperiment& exp);

struct SmallBallFit {
  double exponent = 0.0;   // fitted decay order of P{|u - z| <= r} in r
  double slack = 0.0;      // d - exponent
  std::vector<int> levels;
  std::vector<double> radii;       // 2^{-n}
  std::vector<double> frequencies;
  std::vector<bool> used;  // levels kept for the fit (0 < freq <= 0.9)
};

/// Hit frequencies of balls B(z, 2^{-n}) by the field restricted to the
/// level-n anisotropic cell anchored at the node nearest to (t_center, 0),
/// for each n in levels (>= 3 dyadic levels); fits log-frequency against
/// log-radius.  Saturated rungs (frequency > 0.9) are excluded from the fit.
SmallBallFit small_ball_scaling(const spde::SolverGrid& grid,
                                const std::string& preset, int d,
                                const std::vector<double>& z,
                                const std::vector<int>& levels,
                                std::size_t n_samples, std::uint64_t seed0,
                                double t_center = 0.0);  // 0 selects T/2

struct BoundReport {
  double c1_hat = 0.0;  // estimate / capacity, when capacity > 0
  bool c1_applicable = false;
  double c2_hat = 0.0;  // estimate / hausdorff, when hausdorff finite
  bool c2_applicable = false;
  bool hausdorff_vacuous = false;  // hausdorff = +inf (order < 0)
  bool lower_bound_sane = true;    // capacity = 1 implies estimate in (0, 1]
  std::string note;
};

/// Implied constants of the capacity lower bound and Hausdorff upper bound,
/// with degenerate denominators flagged as not applicable.
BoundReport bound_comparison(const HittingResult& result);

}  // namespace fracheat::hitting
