#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "fracheat/spde.hpp"
#include "fracheat/types.hpp"

namespace fracheat::stats {

struct MomentEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Monte Carlo p-th moments of ||u(t,x) - u(s,y)|| for each point pair,
/// points snapped to the nearest grid node.  Requires >= 100 samples.
std::vector<MomentEstimate> increment_moments(
    const std::vector<spde::FieldSample>& samples,
    const std::vector<std::pair<ParabolicPoint, ParabolicPoint>>& pairs,
    double p);

enum class Direction { time, space };

struct HolderFit {
  Direction direction;
  double p = 2.0;
  double slope = 0.0;
  double std_error = 0.0;
  double r2 = 0.0;
  std::vector<double> lags;     // physical lag sizes
  std::vector<double> moments;  // estimated p-th moments per lag
};

/// Least-squares slope of log E||increment||^p against log lag.  Lags form a
/// geometric ladder from min_lag_cells grid cells (>= 4; raise it when the
/// spectral truncation still bites at the 4-cell scale, e.g. slowly decaying
/// spectra with a < 2 in space), at least 5 scales spanning two decades;
/// moments are averaged over samples and over translation of the base point.
/// For p = 2 the expected slope is (a-1)/a in time and (a-1) in space.
HolderFit holder_fit(const std::vector<spde::FieldSample>& samples,
                     Direction direction, double p,
                     std::size_t min_lag_cells = 4);

/// Ordinary least squares of y against x; returns {slope, stderr, r2}.
struct LineFit {
  double slope = 0.0, intercept = 0.0, std_error = 0.0, r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct DensityEstimate {
  int dim = 1;
  std::vector<std::vector<double>> points;  // evaluation points, size dim each
  std::vector<double> values;
  std::vector<double> bandwidth;  // per dimension (Silverman)
  std::size_t n = 0;
};

/// Product-Gaussian KDE with per-dimension Silverman bandwidth.  `samples` is
/// row-major n x dim.  Requires n >= 1000 and dim <= 6.
DensityEstimate kde_density(const std::vector<double>& samples, int dim,
                            const std::vector<std::vector<double>>& eval_points,
                            const std::vector<double>& bandwidth_override = {});

/// Joint density of (v(s,y), v(t,x)) for the additive field with d iid
/// components: product of bivariate normals with the exact covariance from
/// the Plancherel identities.
struct GaussianPairDensity {
  double var_s = 0.0, var_t = 0.0, cov = 0.0;
  int d = 1;
  double operator()(const double* z1, const double* z2) const;
};
GaussianPairDensity additive_pair_density(Alpha alpha, const ParabolicPoint& ps,
                                          const ParabolicPoint& pt, int d);

using PairDensityFn =
    std::function<double(const double* z1, const double* z2)>;

struct BoundCheckResult {
  double c = 0.0;       // smallest constant >= 1 making the bound hold
  bool pass = false;    // a finite c was found on the grid
  double worst_ratio = 0.0;  // max density/envelope at c = 1
};

/// Gaussian-type envelope c Delta^{-d} exp(-||z1-z2||^2 / (c Delta^2)):
/// fits the smallest admissible c over the (z1, z2) grid by bisection.
BoundCheckResult gaussian_bound_check(
    const PairDensityFn& density, double delta, int d,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>&
        z_grid);

/// Polynomial envelope c Delta^{-d} [Delta^2/||z1-z2||^2 ^ 1]^{p/(4d)}.
BoundCheckResult polynomial_bound_check(
    const PairDensityFn& density, double delta, int d, double p,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>&
        z_grid);

double gaussian_envelope(double c, double delta, int d, double separation);
double polynomial_envelope(double c, double delta, int d, double p,
                           double separation);

}  // namespace fracheat::stats
