#include "fracheat/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <nlohmann/json.hpp>

#include "fracheat/rng.hpp"

namespace fracheat::potential {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

}  // namespace

double k_kernel(double beta, double r) {
  if (r < 0.0) throw std::domain_error("k_kernel: r must be >= 0");
  if (beta < 0.0) return 1.0;
  if (beta == 0.0) {
    if (r == 0.0) return kInf;
    return std::log(std::max(1.0 / r, std::exp(1.0)));
  }
  if (r == 0.0) return kInf;
  return std::pow(r, -beta);
}

CompactSetSpec parse_set_spec(const std::string& json_text) {
  auto j = nlohmann::json::parse(json_text);
  CompactSetSpec s;
  s.d = j.at("d").get<int>();
  if (s.d < 1) throw std::domain_error("set spec: d must be >= 1");
  if (j.contains("boxes")) {
    for (const auto& b : j.at("boxes")) {
      Box box{b.at("lo").get<std::vector<double>>(),
              b.at("hi").get<std::vector<double>>()};
      if (box.lo.size() != static_cast<std::size_t>(s.d) ||
          box.hi.size() != box.lo.size())
        throw std::domain_error("set spec: box dimension mismatch");
      for (int q = 0; q < s.d; ++q)
        if (!(box.hi[q] >= box.lo[q]))
          throw std::domain_error("set spec: box hi < lo");
      s.boxes.push_back(std::move(box));
    }
  }
  if (j.contains("points")) {
    s.points = j.at("points").get<std::vector<std::vector<double>>>();
    for (const auto& p : s.points)
      if (p.size() != static_cast<std::size_t>(s.d))
        throw std::domain_error("set spec: point dimension mismatch");
    s.mesh = j.value("mesh", 0.0);
  }
  if (s.boxes.empty() && s.points.empty())
    throw std::domain_error("set spec: empty set");
  return s;
}

double set_distance(const CompactSetSpec& set, const std::vector<double>& z) {
  if (z.size() != static_cast<std::size_t>(set.d))
    throw std::domain_error("set_distance: point dimension mismatch");
  double best = kInf;
  for (const auto& box : set.boxes) {
    double s = 0.0;
    for (int q = 0; q < set.d; ++q) {
      double c = std::clamp(z[q], box.lo[q], box.hi[q]);
      s += (z[q] - c) * (z[q] - c);
    }
    best = std::min(best, std::sqrt(s));
  }
  for (const auto& p : set.points) {
    double s = 0.0;
    for (int q = 0; q < set.d; ++q) s += (z[q] - p[q]) * (z[q] - p[q]);
    best = std::min(best, std::sqrt(s));
  }
  if (set.boxes.empty() && set.points.empty())
    throw std::domain_error("set_distance: empty set");
  return best;
}

double cell_self_energy(double beta, int d, double h) {
  if (!(h > 0.0)) throw std::domain_error("cell_self_energy: h must be > 0");
  if (beta < 0.0) return 1.0;
  if (beta >= static_cast<double>(d)) return kInf;
  if (d == 1 && beta > 0.0)
    return 2.0 / ((1.0 - beta) * (2.0 - beta)) * std::pow(h, -beta);
  if (d == 1 && beta == 0.0 && h <= std::exp(-1.0))
    return std::log(1.0 / h) + 1.5;
  // quasi-random average of K(||X - Y||) over two independent uniforms on the
  // cell; deterministic by construction
  const std::size_t n = 200000;
  double acc = 0.0;
  std::vector<double> x(d), y(d);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int q = 0; q < d; ++q) {
      double u = rng::to_unit(rng::mix(0x5e1fe4e2, i, q, 0, 0));
      double v = rng::to_unit(rng::mix(0x5e1fe4e2, i, q, 1, 0));
      double diff = (u - v) * h;
      s += diff * diff;
    }
    acc += k_kernel(beta, std::sqrt(s));
  }
  return acc / static_cast<double>(n);
}

double energy(const DiscreteMeasure& mu, double beta, int d,
              double cell_size) {
  const std::size_t n = mu.atoms.size();
  if (n == 0 || mu.weights.size() != n)
    throw std::domain_error("energy: malformed measure");
  double wsum = 0.0;
  for (double w : mu.weights) {
    if (w < 0.0) throw std::domain_error("energy: negative weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::domain_error("energy: weights must sum to 1");
  const double diag =
      cell_size > 0.0 ? cell_self_energy(beta, d, cell_size)
                      : k_kernel(beta, 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu.weights[i] == 0.0) continue;
    if (std::isinf(diag)) return kInf;
    acc += mu.weights[i] * mu.weights[i] * diag;
    for (std::size_t j = i + 1; j < n; ++j)
      acc += 2.0 * mu.weights[i] * mu.weights[j] *
             k_kernel(beta, std::sqrt(sq_dist(mu.atoms[i], mu.atoms[j])));
  }
  return acc;
}

namespace {

struct Atoms {
  std::vector<std::vector<double>> pts;
  double cell = 0.0;  // representative cell edge, 0 for raw point clouds
};

Atoms discretize(const CompactSetSpec& set, double mesh) {
  Atoms a;
  if (set.is_point_cloud()) {
    a.pts = set.points;
    a.cell = 0.0;
    return a;
  }
  if (!(mesh > 0.0)) throw std::domain_error("capacity: mesh must be > 0");
  for (const auto& box : set.boxes) {
    std::vector<std::size_t> counts(set.d);
    std::size_t total = 1;
    for (int q = 0; q < set.d; ++q) {
      double len = box.hi[q] - box.lo[q];
      counts[q] = std::max<std::size_t>(
          2, static_cast<std::size_t>(std::ceil(len / mesh)));
      total *= counts[q];
      a.cell = std::max(a.cell, len / static_cast<double>(counts[q]));
    }
    if (total > 200000)
      throw std::domain_error("capacity: mesh produces too many atoms");
    std::vector<std::size_t> idx(set.d, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::vector<double> p(set.d);
      std::size_t rem = flat;
      for (int q = 0; q < set.d; ++q) {
        std::size_t i = rem % counts[q];
        rem /= counts[q];
        double step = (box.hi[q] - box.lo[q]) / static_cast<double>(counts[q]);
        p[q] = box.lo[q] + (static_cast<double>(i) + 0.5) * step;
      }
      a.pts.push_back(std::move(p));
    }
  }
  if (a.cell == 0.0) a.cell = mesh;
  return a;
}

}  // namespace

CapacityResult capacity(const CompactSetSpec& set, double beta, double mesh,
                        double tol) {
  CapacityResult res;
  if (beta < 0.0) {
    // K_beta == 1, so every probability measure has energy exactly 1
    res.capacity = 1.0;
    res.minimum_energy = 1.0;
    return res;
  }
  if (set.is_point_cloud()) {
    // finitely many atoms carry infinite energy when the kernel blows up at 0
    res.capacity = 0.0;
    res.minimum_energy = kInf;
    res.atom_count = set.points.size();
    return res;
  }
  if (beta >= static_cast<double>(set.d)) {
    res.capacity = 0.0;
    res.minimum_energy = kInf;
    return res;
  }

  Atoms atoms = discretize(set, mesh);
  const std::size_t n = atoms.pts.size();
  const double diag = cell_self_energy(beta, set.d, atoms.cell);
  auto column = [&](std::size_t j, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = i == j ? diag
                      : k_kernel(beta, std::sqrt(sq_dist(atoms.pts[i],
                                                         atoms.pts[j])));
  };

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> kw(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    column(j, col);
    for (std::size_t i = 0; i < n; ++i) kw[i] += col[i] * w[j];
  }
  double f = 0.0;
  for (std::size_t i = 0; i < n; ++i) f += w[i] * kw[i];

  const std::size_t max_iter = 100000;
  double gap = kInf;
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    std::size_t s = 0, v = n;
    double kw_min = kInf, kw_max = -kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (kw[i] < kw_min) {
        kw_min = kw[i];
        s = i;
      }
      if (w[i] > 0.0 && kw[i] > kw_max) {
        kw_max = kw[i];
        v = i;
      }
    }
    gap = 2.0 * (f - kw_min);
    if (gap <= tol * std::max(f, 1e-300)) break;

    const double toward = f - kw_min;      // improvement rate of the FW step
    const double away = kw_max - f;        // improvement rate of the away step
    if (away > toward && v < n && w[v] < 1.0) {
      column(v, col);
      double denom = f - 2.0 * kw[v] + col[v];
      double gmax = w[v] / (1.0 - w[v]);
      double g = denom > 0.0 ? std::min((kw[v] - f) / denom, gmax) : gmax;
      g = std::max(g, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        w[i] *= 1.0 + g;
        kw[i] = (1.0 + g) * kw[i] - g * col[i];
      }
      f = (1.0 + g) * (1.0 + g) * f - 2.0 * g * (1.0 + g) * kw_max +
          g * g * col[v];
      w[v] -= g;
      if (w[v] < 1e-15) w[v] = 0.0;
    } else {
      column(s, col);
      double denom = f - 2.0 * kw_min + col[s];
      double g = denom > 0.0
                     ? std::clamp((f - kw_min) / denom, 0.0, 1.0)
                     : 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] *= 1.0 - g;
        kw[i] = (1.0 - g) * kw[i] + g * col[i];
      }
      f = (1.0 - g) * (1.0 - g) * f + 2.0 * g * (1.0 - g) * kw_min +
          g * g * col[s];
      w[s] += g;
    }
    if ((it + 1) % 4096 == 0) {
      // refresh the running products against floating-point drift
      std::fill(kw.begin(), kw.end(), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        if (w[j] == 0.0) continue;
        column(j, col);
        for (std::size_t i = 0; i < n; ++i) kw[i] += col[i] * w[j];
      }
      f = 0.0;
      for (std::size_t i = 0; i < n; ++i) f += w[i] * kw[i];
    }
  }
  if (gap > tol * std::max(f, 1e-300))
    throw NumericError("capacity: Frank-Wolfe did not converge", gap / f);

  res.capacity = 1.0 / f;
  res.minimum_energy = f;
  res.gap = gap;
  res.iterations = it;
  res.atom_count = n;
  res.minimizer.atoms = std::move(atoms.pts);
  res.minimizer.weights = std::move(w);
  return res;
}

namespace {

std::vector<std::vector<double>> sample_set(const CompactSetSpec& set,
                                            double spacing) {
  if (set.is_point_cloud()) return set.points;
  std::vector<std::vector<double>> pts;
  for (const auto& box : set.boxes) {
    std::vector<std::size_t> counts(set.d);
    std::size_t total = 1;
    for (int q = 0; q < set.d; ++q) {
      double len = box.hi[q] - box.lo[q];
      counts[q] = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(len / spacing)) + 1);
      total *= counts[q];
    }
    if (total > 2000000)
      throw std::domain_error("cover: scale produces too many sample points");
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::vector<double> p(set.d);
      std::size_t rem = flat;
      for (int q = 0; q < set.d; ++q) {
        std::size_t i = rem % counts[q];
        rem /= counts[q];
        double step = counts[q] > 1 ? (box.hi[q] - box.lo[q]) /
                                          static_cast<double>(counts[q] - 1)
                                    : 0.0;
        p[q] = box.lo[q] + static_cast<double>(i) * step;
      }
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

}  // namespace

Covering greedy_cover(const CompactSetSpec& set, double eps) {
  if (!(eps > 0.0)) throw std::domain_error("greedy_cover: eps must be > 0");
  auto pts = sample_set(set, eps / 2.0);
  const std::size_t m = pts.size();
  std::vector<bool> covered(m, false);
  std::size_t remaining = m;

  // dyadic candidate ladder: every sample point at radii eps 2^{-j}
  const int ladder = 3;
  Covering cov;
  cov.scale = eps;
  while (remaining > 0) {
    std::size_t best_center = 0;
    int best_j = 0;
    std::size_t best_count = 0;
    for (int j = 0; j < ladder; ++j) {
      double r = eps * std::pow(2.0, -j);
      double r2 = r * r;
      for (std::size_t c = 0; c < m; ++c) {
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < m; ++i)
          if (!covered[i] && sq_dist(pts[c], pts[i]) <= r2) ++cnt;
        if (cnt > best_count) {
          best_count = cnt;
          best_center = c;
          best_j = j;
        }
      }
    }
    double r = eps * std::pow(2.0, -best_j);
    double r2 = r * r;
    for (std::size_t i = 0; i < m; ++i)
      if (!covered[i] && sq_dist(pts[best_center], pts[i]) <= r2) {
        covered[i] = true;
        --remaining;
      }
    cov.balls.push_back({pts[best_center], r});
  }
  return cov;
}

double hausdorff_premeasure(const CompactSetSpec& set, double beta,
                            double eps) {
  if (beta < 0.0) return kInf;
  auto cov = greedy_cover(set, eps);
  double acc = 0.0;
  for (const auto& b : cov.balls) acc += std::pow(2.0 * b.radius, beta);
  return acc;
}

std::vector<Rect> anisotropic_grid(Alpha alpha, int n,
                                   std::pair<double, double> time_window,
                                   std::pair<double, double> space_window) {
  if (n < 1) throw std::domain_error("anisotropic_grid: n must be >= 1");
  const double a = alpha.value();
  const double dt = std::pow(2.0, -2.0 * n * a / (a - 1.0));
  const double dx = std::pow(2.0, -2.0 * n / (a - 1.0));
  auto [t0, t1] = time_window;
  auto [x0, x1] = space_window;
  if (!(t1 > t0) || !(x1 > x0))
    throw std::domain_error("anisotropic_grid: empty window");
  const double budget =
      ((t1 - t0) / dt + 2.0) * ((x1 - x0) / dx + 2.0);
  if (budget > 5e7)
    throw std::domain_error("anisotropic_grid: window too large at this n");

  auto k0 = static_cast<long long>(std::floor(t0 / dt));
  auto k1 = static_cast<long long>(std::ceil(t1 / dt));
  auto l0 = static_cast<long long>(std::floor(x0 / dx));
  auto l1 = static_cast<long long>(std::ceil(x1 / dx));
  std::vector<Rect> out;
  for (long long k = k0; k < k1; ++k)
    for (long long l = l0; l < l1; ++l)
      out.push_back({static_cast<double>(k) * dt,
                     static_cast<double>(k + 1) * dt,
                     static_cast<double>(l) * dx,
                     static_cast<double>(l + 1) * dx});
  // count budget: constant * 2^{2n(a+1)/(a-1)}
  const double scale = std::pow(2.0, 2.0 * n * (a + 1.0) / (a - 1.0));
  const double cap =
      ((t1 - t0) + 2.0 * dt) * ((x1 - x0) + 2.0 * dx) * scale + 1.0;
  if (static_cast<double>(out.size()) > cap)
    throw std::logic_error("anisotropic_grid: rectangle count over budget");
  return out;
}

DimensionThresholds dimension_thresholds(Alpha alpha, int d) {
  if (d < 1) throw std::domain_error("dimension_thresholds: d must be >= 1");
  const double a = alpha.value();
  return {static_cast<double>(d) - 2.0 * (a + 1.0) / (a - 1.0),
          static_cast<double>(d) - 2.0 / (a - 1.0),
          static_cast<double>(d) - 2.0 * a / (a - 1.0)};
}

double lemma_integral_check(Alpha alpha, int d, double p, double a,
                            std::pair<double, double> time_window,
                            std::pair<double, double> space_window) {
  const double al = alpha.value();
  if (d < 1) throw std::domain_error("lemma_integral_check: d must be >= 1");
  const double p_floor =
      4.0 * d * (0.5 * d - 2.0 / (al - 1.0) - 1.0);
  if (!(p > p_floor))
    throw std::domain_error(
        "lemma_integral_check: p below the admissibility threshold");
  if (!(a > 0.0) || a > 1.0)
    throw std::domain_error("lemma_integral_check: a must lie in (0, 1]");
  const double len_i = time_window.second - time_window.first;
  const double len_j = space_window.second - space_window.first;
  if (!(len_i > 0.0) || !(len_j > 0.0))
    throw std::domain_error("lemma_integral_check: empty window");

  // Change of variables t-s = (s a^2)^{2 al/(al-1)} etc. turns the quadruple
  // integral bound into a separable wedge integral: an exact Beta-function
  // angular factor times a radial integral with the [rho^2 ^ 1] bracket.
  const double As = 2.0 / (al - 1.0) + 1.0;          // s-exponent
  const double Bt = (3.0 - al) / (al - 1.0);         // t-exponent
  const double q = As + Bt + 1.0 - static_cast<double>(d);
  const double angular = std::beta(As + 1.0, Bt + 1.0);
  const double rho_max =
      (std::pow(len_i, (al - 1.0) / (2.0 * al)) +
       std::pow(len_j, (al - 1.0) / 2.0)) /
      a;

  const double inner_pow = q + p / (2.0 * d);
  boost::math::quadrature::tanh_sinh<double> ts;
  double radial = ts.integrate(
      [&](double r) { return std::pow(r, inner_pow); }, 0.0,
      std::min(1.0, rho_max));
  if (rho_max > 1.0) {
    // log substitution keeps the long power-law stretch well conditioned
    boost::math::quadrature::gauss_kronrod<double, 31> gk;
    radial += gk.integrate(
        [&](double y) { return std::exp(y * (q + 1.0)); }, 0.0,
        std::log(rho_max), 12, 1e-10);
  }

  const double prefactor = 16.0 * len_i * len_j * al /
                           ((al - 1.0) * (al - 1.0)) *
                           std::pow(a, 2.0 * (al + 1.0) / (al - 1.0) -
                                           static_cast<double>(d));
  const double value = prefactor * angular * radial;
  const double denom =
      k_kernel(static_cast<double>(d) - 2.0 * (al + 1.0) / (al - 1.0), a);
  return value / denom;
}

}  // namespace fracheat::potential
