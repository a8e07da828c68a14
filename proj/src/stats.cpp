#include "fracheat/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fracheat/kernel.hpp"

namespace fracheat::stats {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::vector<MomentEstimate> increment_moments(
    const std::vector<spde::FieldSample>& samples,
    const std::vector<std::pair<ParabolicPoint, ParabolicPoint>>& pairs,
    double p) {
  if (samples.size() < 100)
    throw std::domain_error("increment_moments: need >= 100 samples");
  if (pairs.empty()) throw std::domain_error("increment_moments: empty pairs");
  std::vector<MomentEstimate> out;
  out.reserve(pairs.size());
  const auto& grid = samples.front().grid;
  const int d = samples.front().d;
  for (const auto& [pa, pb] : pairs) {
    std::size_t ka = grid.index_of_t(pa.t), ja = grid.index_of_x(pa.x);
    std::size_t kb = grid.index_of_t(pb.t), jb = grid.index_of_x(pb.x);
    double sum = 0.0, sq = 0.0;
    for (const auto& s : samples) {
      double nrm2 = 0.0;
      for (int c = 0; c < d; ++c) {
        double diff = s.at(ka, ja, c) - s.at(kb, jb, c);
        nrm2 += diff * diff;
      }
      double v = std::pow(nrm2, p / 2.0);
      sum += v;
      sq += v * v;
    }
    const double n = static_cast<double>(samples.size());
    double mean = sum / n;
    double var = std::max(sq / n - mean * mean, 0.0);
    out.push_back({mean, std::sqrt(var / n), samples.size()});
  }
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  f.std_error = n > 2 ? std::sqrt(ss_res / ((n - 2) * sxx)) : 0.0;
  return f;
}

HolderFit holder_fit(const std::vector<spde::FieldSample>& samples,
                     Direction direction, double p,
                     std::size_t min_lag_cells) {
  if (samples.empty()) throw std::domain_error("holder_fit: no samples");
  if (min_lag_cells < 4)
    throw std::domain_error("holder_fit: lags below 4 grid cells");
  const auto& grid = samples.front().grid;
  const int d = samples.front().d;

  // Geometric lag ladder (factor sqrt(2)) spanning at least two decades.
  const std::size_t max_cells =
      direction == Direction::time ? grid.nt / 4 : grid.nx / 8;
  std::vector<std::size_t> lag_cells;
  for (int k = 0;; ++k) {
    auto c = static_cast<std::size_t>(std::llround(
        static_cast<double>(min_lag_cells) * std::pow(2.0, 0.5 * k)));
    if (c > max_cells) break;
    if (lag_cells.empty() || c > lag_cells.back()) lag_cells.push_back(c);
  }
  if (lag_cells.size() < 5 ||
      static_cast<double>(lag_cells.back()) / lag_cells.front() < 100.0)
    throw std::domain_error(
        "holder_fit: grid does not resolve two decades of lags");

  const std::size_t kt0 = grid.nt / 2;  // base time; keeps t bounded from 0
  HolderFit fit;
  fit.direction = direction;
  fit.p = p;
  for (std::size_t cells : lag_cells) {
    double acc = 0.0;
    std::size_t cnt = 0;
    for (const auto& s : samples) {
      if (direction == Direction::time) {
        // average over all spatial translates at the fixed base time
        for (std::size_t j = 0; j < grid.nx; ++j) {
          double nrm2 = 0.0;
          for (int c = 0; c < d; ++c) {
            double diff = s.at(kt0 + cells, j, c) - s.at(kt0, j, c);
            nrm2 += diff * diff;
          }
          acc += std::pow(nrm2, p / 2.0);
          ++cnt;
        }
      } else {
        for (std::size_t j = 0; j < grid.nx; ++j) {
          std::size_t j2 = (j + cells) % grid.nx;  // periodic torus
          double nrm2 = 0.0;
          for (int c = 0; c < d; ++c) {
            double diff = s.at(kt0, j2, c) - s.at(kt0, j, c);
            nrm2 += diff * diff;
          }
          acc += std::pow(nrm2, p / 2.0);
          ++cnt;
        }
      }
    }
    double lag = direction == Direction::time ? cells * grid.dt()
                                              : cells * grid.dx();
    fit.lags.push_back(lag);
    fit.moments.push_back(acc / static_cast<double>(cnt));
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < fit.lags.size(); ++i) {
    lx.push_back(std::log(fit.lags[i]));
    ly.push_back(std::log(fit.moments[i]));
  }
  auto line = fit_line(lx, ly);
  fit.slope = line.slope;
  fit.std_error = line.std_error;
  fit.r2 = line.r2;
  return fit;
}

DensityEstimate kde_density(const std::vector<double>& samples, int dim,
                            const std::vector<std::vector<double>>& eval_points,
                            const std::vector<double>& bandwidth_override) {
  if (dim < 1 || dim > 6) throw std::domain_error("kde_density: dim must be in [1,6]");
  const std::size_t n = samples.size() / dim;
  if (n < 1000) throw std::domain_error("kde_density: need n >= 1000");

  DensityEstimate est;
  est.dim = dim;
  est.n = n;
  est.points = eval_points;

  if (!bandwidth_override.empty()) {
    est.bandwidth = bandwidth_override;
  } else {
    // Silverman's rule per dimension
    for (int c = 0; c < dim; ++c) {
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) m += samples[i * dim + c];
      m /= n;
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double dlt = samples[i * dim + c] - m;
        v += dlt * dlt;
      }
      double sd = std::sqrt(v / (n - 1));
      est.bandwidth.push_back(
          sd * std::pow(4.0 / ((dim + 2.0) * n), 1.0 / (dim + 4.0)));
    }
  }

  double norm = 1.0;
  for (int c = 0; c < dim; ++c) norm *= est.bandwidth[c] * std::sqrt(2.0 * kPi);
  norm = 1.0 / (norm * static_cast<double>(n));

  est.values.reserve(eval_points.size());
  for (const auto& z : eval_points) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = 0.0;
      for (int c = 0; c < dim; ++c) {
        double u = (z[c] - samples[i * dim + c]) / est.bandwidth[c];
        e += u * u;
      }
      acc += std::exp(-0.5 * e);
    }
    est.values.push_back(acc * norm);
  }
  return est;
}

double GaussianPairDensity::operator()(const double* z1,
                                       const double* z2) const {
  const double det = var_s * var_t - cov * cov;
  if (det <= 0.0) return 0.0;
  double v = 1.0;
  const double norm = 1.0 / (2.0 * kPi * std::sqrt(det));
  for (int c = 0; c < d; ++c) {
    double a = z1[c], b = z2[c];
    double q = (var_t * a * a - 2.0 * cov * a * b + var_s * b * b) / det;
    v *= norm * std::exp(-0.5 * q);
  }
  return v;
}

GaussianPairDensity additive_pair_density(Alpha alpha, const ParabolicPoint& ps,
                                          const ParabolicPoint& pt, int d) {
  const double g = (alpha.value() - 1.0) / alpha.value();
  GaussianPairDensity rho;
  rho.d = d;
  rho.var_s = kernel::squared_mass_constant(alpha) * std::pow(ps.t, g);
  rho.var_t = kernel::squared_mass_constant(alpha) * std::pow(pt.t, g);
  double inc = kernel::increment_variance_exact(alpha, pt, ps);
  rho.cov = 0.5 * (rho.var_s + rho.var_t - inc);
  return rho;
}

double gaussian_envelope(double c, double delta, int d, double separation) {
  return c * std::pow(delta, -d) *
         std::exp(-separation * separation / (c * delta * delta));
}

double polynomial_envelope(double c, double delta, int d, double p,
                           double separation) {
  double ratio = separation > 0.0
                     ? std::min(delta * delta / (separation * separation), 1.0)
                     : 1.0;
  return c * std::pow(delta, -d) * std::pow(ratio, p / (4.0 * d));
}

namespace {

BoundCheckResult fit_constant(
    const PairDensityFn& density,
    const std::function<double(double c, double sep)>& envelope,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>&
        z_grid) {
  auto holds = [&](double c) {
    for (const auto& [z1, z2] : z_grid) {
      double sep2 = 0.0;
      for (std::size_t i = 0; i < z1.size(); ++i)
        sep2 += (z1[i] - z2[i]) * (z1[i] - z2[i]);
      if (density(z1.data(), z2.data()) > envelope(c, std::sqrt(sep2)))
        return false;
    }
    return true;
  };
  BoundCheckResult res;
  double worst = 0.0;
  for (const auto& [z1, z2] : z_grid) {
    double sep2 = 0.0;
    for (std::size_t i = 0; i < z1.size(); ++i)
      sep2 += (z1[i] - z2[i]) * (z1[i] - z2[i]);
    double env = envelope(1.0, std::sqrt(sep2));
    if (env > 0.0)
      worst = std::max(worst, density(z1.data(), z2.data()) / env);
  }
  res.worst_ratio = worst;
  double hi = 1.0;
  while (!holds(hi)) {
    hi *= 2.0;
    if (hi > 1e9) return res;  // pass stays false
  }
  double lo = hi > 1.0 ? hi / 2.0 : 1.0;
  for (int it = 0; it < 60 && hi - lo > 1e-9 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (holds(mid) ? hi : lo) = mid;
  }
  res.c = hi;
  res.pass = true;
  return res;
}

}  // namespace

BoundCheckResult gaussian_bound_check(
    const PairDensityFn& density, double delta, int d,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>&
        z_grid) {
  if (!(delta > 0.0))
    throw std::domain_error("gaussian_bound_check: coincident points (Delta=0)");
  return fit_constant(
      density,
      [=](double c, double sep) { return gaussian_envelope(c, delta, d, sep); },
      z_grid);
}

BoundCheckResult polynomial_bound_check(
    const PairDensityFn& density, double delta, int d, double p,
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>&
        z_grid) {
  if (!(delta > 0.0))
    throw std::domain_error("polynomial_bound_check: coincident points");
  return fit_constant(density,
                      [=](double c, double sep) {
                        return polynomial_envelope(c, delta, d, p, sep);
                      },
                      z_grid);
}

}  // namespace fracheat::stats
