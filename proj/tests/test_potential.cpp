#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fracheat/potential.hpp"

using namespace fracheat;
namespace pot = fracheat::potential;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("riesz kernel branches") {
  CHECK(pot::k_kernel(1.0, 0.5) == doctest::Approx(2.0));
  CHECK(pot::k_kernel(0.0, 10.0) == doctest::Approx(1.0));
  CHECK(pot::k_kernel(-3.0, 0.123) == doctest::Approx(1.0));
  CHECK(pot::k_kernel(-3.0, 0.0) == doctest::Approx(1.0));
  CHECK(std::isinf(pot::k_kernel(1.0, 0.0)));
  CHECK(std::isinf(pot::k_kernel(0.0, 0.0)));
  CHECK_THROWS_AS(pot::k_kernel(1.0, -0.1), std::domain_error);
  // log_+ floor
  for (double r : {1e-6, 0.1, 0.36, 1.0, 2.5, 100.0})
    CHECK(pot::k_kernel(0.0, r) >= 1.0);
  CHECK(pot::k_kernel(0.0, 0.1) == doctest::Approx(std::log(10.0)));
}

TEST_CASE("cell self-energy against a Riemann double-sum oracle") {
  // uniform mass on [0, h]: E = (2/h^2) int_0^h (h - r) K(r) dr, evaluated
  // by a fine midpoint sum (integrable singularity at r = 0)
  auto oracle = [](double beta, double h) {
    const int m = 2000000;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      double r = (i + 0.5) * h / m;
      acc += (h - r) * pot::k_kernel(beta, r);
    }
    return 2.0 * acc * (h / m) / (h * h);
  };
  CHECK(pot::cell_self_energy(0.5, 1, 0.1) ==
        doctest::Approx(oracle(0.5, 0.1)).epsilon(5e-3));
  CHECK(pot::cell_self_energy(0.5, 1, 1.0) ==
        doctest::Approx(8.0 / 3.0).epsilon(1e-9));
  CHECK(pot::cell_self_energy(0.0, 1, 0.05) ==
        doctest::Approx(oracle(0.0, 0.05)).epsilon(5e-3));
  CHECK(pot::cell_self_energy(-2.0, 1, 0.1) == doctest::Approx(1.0));
  CHECK(std::isinf(pot::cell_self_energy(1.0, 1, 0.1)));
  CHECK(std::isinf(pot::cell_self_energy(2.5, 2, 0.1)));
  CHECK_THROWS_AS(pot::cell_self_energy(0.5, 1, 0.0), std::domain_error);
}

TEST_CASE("two-dimensional cell self-energy is consistent with quadrature") {
  // beta = 0.5, unit square: oracle by midpoint quadrature on a 40^4 grid
  const int m = 40;
  double acc = 0.0;
  for (int i1 = 0; i1 < m; ++i1)
    for (int j1 = 0; j1 < m; ++j1)
      for (int i2 = 0; i2 < m; ++i2)
        for (int j2 = 0; j2 < m; ++j2) {
          double dx = (i1 - i2) / static_cast<double>(m);
          double dy = (j1 - j2) / static_cast<double>(m);
          double r = std::sqrt(dx * dx + dy * dy);
          if (r > 0.0) acc += pot::k_kernel(0.5, r);
        }
  double oracle = acc / std::pow(static_cast<double>(m), 4);
  CHECK(pot::cell_self_energy(0.5, 2, 1.0) ==
        doctest::Approx(oracle).epsilon(0.02));
}

TEST_CASE("energy of the uniform mesh measure on [0,1]") {
  const std::size_t n = 1000;
  pot::DiscreteMeasure mu;
  double h = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    mu.atoms.push_back({(static_cast<double>(i) + 0.5) * h});
    mu.weights.push_back(h);
  }
  // analytic: int_0^1 int_0^1 |x-y|^{-1/2} dx dy = 8/3
  CHECK(pot::energy(mu, 0.5, 1, h) == doctest::Approx(8.0 / 3.0).epsilon(5e-3));
  CHECK(pot::energy(mu, -1.0, 1, h) == doctest::Approx(1.0).epsilon(1e-9));
  // raw atoms with a blowing-up kernel: infinite
  pot::DiscreteMeasure single{{{0.0}}, {1.0}};
  CHECK(std::isinf(pot::energy(single, 1.0, 1)));
  CHECK(pot::energy(single, -2.0, 1) == doctest::Approx(1.0));
  pot::DiscreteMeasure bad{{{0.0}}, {0.5}};
  CHECK_THROWS_AS(pot::energy(bad, 0.5, 1), std::domain_error);
}

namespace {

// independent minimizer: projected gradient descent with a dense matrix
double projected_gradient_energy(double beta, double mesh) {
  const auto n = static_cast<std::size_t>(std::lround(1.0 / mesh));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = (static_cast<double>(i) + 0.5) * mesh;
  double diag = pot::cell_self_energy(beta, 1, mesh);
  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      K[i * n + j] =
          i == j ? diag : pot::k_kernel(beta, std::abs(x[i] - x[j]));
  auto project_simplex = [](std::vector<double>& w) {
    std::vector<double> u = w;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    std::size_t rho = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      css += u[i];
      double t = (css - 1.0) / static_cast<double>(i + 1);
      if (u[i] - t > 0.0) {
        rho = i + 1;
        theta = t;
      }
    }
    (void)rho;
    for (auto& v : w) v = std::max(v - theta, 0.0);
  };
  std::vector<double> w(n, 1.0 / static_cast<double>(n)), g(n);
  double row_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += K[i * n + j];
    row_max = std::max(row_max, s);
  }
  double eta = 0.5 / row_max;
  for (int it = 0; it < 20000; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += K[i * n + j] * w[j];
      g[i] = 2.0 * s;
    }
    for (std::size_t i = 0; i < n; ++i) w[i] -= eta * g[i];
    project_simplex(w);
  }
  double f = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) f += w[i] * K[i * n + j] * w[j];
  return f;
}

pot::CompactSetSpec unit_interval() {
  pot::CompactSetSpec s;
  s.d = 1;
  s.boxes.push_back({{0.0}, {1.0}});
  return s;
}

}  // namespace

TEST_CASE("capacity special cases") {
  auto s = unit_interval();
  auto neg = pot::capacity(s, -1.0, 0.01);
  CHECK(neg.capacity == 1.0);
  pot::CompactSetSpec cloud;
  cloud.d = 2;
  cloud.points = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  CHECK(pot::capacity(cloud, 0.5, 0.01).capacity == 0.0);
  CHECK(pot::capacity(cloud, 0.0, 0.01).capacity == 0.0);
  CHECK(pot::capacity(cloud, -2.0, 0.01).capacity == 1.0);
  // beta at or above the set dimension: zero capacity
  CHECK(pot::capacity(s, 1.0, 0.01).capacity == 0.0);
  CHECK(pot::capacity(s, 1.5, 0.01).capacity == 0.0);
}

TEST_CASE("capacity of the unit interval vs projected-gradient oracle") {
  auto s = unit_interval();
  auto fw = pot::capacity(s, 0.5, 1.0 / 200.0);
  CHECK(fw.gap <= 1e-6 * fw.minimum_energy);
  CHECK(fw.atom_count == 200);
  double pg = projected_gradient_energy(0.5, 1.0 / 200.0);
  CHECK(fw.minimum_energy == doctest::Approx(pg).epsilon(0.02));
  // minimized energy no larger than the uniform measure's
  pot::DiscreteMeasure uni;
  for (std::size_t i = 0; i < 200; ++i) {
    uni.atoms.push_back({(i + 0.5) / 200.0});
    uni.weights.push_back(1.0 / 200.0);
  }
  CHECK(fw.minimum_energy <= pot::energy(uni, 0.5, 1, 1.0 / 200.0) + 1e-9);
  // stability under mesh halving
  auto coarse = pot::capacity(s, 0.5, 1.0 / 100.0);
  CHECK(fw.capacity == doctest::Approx(coarse.capacity).epsilon(0.02));
  // minimizer is a probability vector on the atoms
  double wsum = std::accumulate(fw.minimizer.weights.begin(),
                                fw.minimizer.weights.end(), 0.0);
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("capacity monotone in the set and anti-monotone in beta") {
  auto full = unit_interval();
  pot::CompactSetSpec half;
  half.d = 1;
  half.boxes.push_back({{0.0}, {0.5}});
  double mesh = 1.0 / 128.0;
  auto cap_half = pot::capacity(half, 0.5, mesh);
  auto cap_full = pot::capacity(full, 0.5, mesh);
  CHECK(cap_half.capacity <= cap_full.capacity + 1e-6);
  auto lo = pot::capacity(full, 0.3, mesh);
  auto hi = pot::capacity(full, 0.6, mesh);
  CHECK(lo.capacity >= hi.capacity - 1e-6);
}

TEST_CASE("set spec json parsing") {
  auto s = pot::parse_set_spec(
      R"({"d": 2, "boxes": [{"lo": [0, 0], "hi": [1, 2]}]})");
  CHECK(s.d == 2);
  CHECK(s.boxes.size() == 1);
  CHECK(s.boxes[0].hi[1] == doctest::Approx(2.0));
  auto c = pot::parse_set_spec(
      R"({"d": 1, "points": [[0.25], [0.75]], "mesh": 0.01})");
  CHECK(c.is_point_cloud());
  CHECK(c.points.size() == 2);
  CHECK_THROWS_AS(pot::parse_set_spec(R"({"d": 1})"), std::domain_error);
  CHECK_THROWS_AS(
      pot::parse_set_spec(R"({"d": 2, "boxes": [{"lo": [0], "hi": [1]}]})"),
      std::domain_error);
}

TEST_CASE("hausdorff premeasure branches") {
  auto s = unit_interval();
  for (double eps : {0.1, 0.05, 0.02}) {
    double h1 = pot::hausdorff_premeasure(s, 1.0, eps);
    CHECK(h1 >= 0.5);
    CHECK(h1 <= 2.0);
  }
  pot::CompactSetSpec point;
  point.d = 1;
  point.points = {{0.3}};
  double prev = kInf;
  for (double eps : {0.1, 0.01, 0.001}) {
    double v = pot::hausdorff_premeasure(point, 0.5, eps);
    CHECK(v == doctest::Approx(std::pow(2.0 * eps, 0.5)));
    CHECK(v < prev);
    prev = v;
  }
  CHECK(std::isinf(pot::hausdorff_premeasure(s, -0.5, 0.1)));
  CHECK_THROWS_AS(pot::greedy_cover(s, 0.0), std::domain_error);
}

TEST_CASE("greedy cover actually covers the sample points") {
  pot::CompactSetSpec s;
  s.d = 2;
  s.boxes.push_back({{0.0, 0.0}, {0.5, 0.25}});
  auto cov = pot::greedy_cover(s, 0.1);
  CHECK(cov.scale == doctest::Approx(0.1));
  CHECK(!cov.balls.empty());
  for (const auto& b : cov.balls) CHECK(b.radius <= 0.1 + 1e-12);
  // every corner of the box is within some ball
  for (double cx : {0.0, 0.5})
    for (double cy : {0.0, 0.25}) {
      bool hit = false;
      for (const auto& b : cov.balls) {
        double dx = b.center[0] - cx, dy = b.center[1] - cy;
        if (std::sqrt(dx * dx + dy * dy) <= b.radius + 1e-12) hit = true;
      }
      CHECK(hit);
    }
}

TEST_CASE("anisotropic grid geometry") {
  auto cells = pot::anisotropic_grid(Alpha(2.0), 1, {0.0, 0.0625}, {0.0, 0.25});
  REQUIRE(!cells.empty());
  CHECK(cells[0].t1 - cells[0].t0 == doctest::Approx(0.0625));
  CHECK(cells[0].x1 - cells[0].x0 == doctest::Approx(0.25));
  auto grid = pot::anisotropic_grid(Alpha(2.0), 2, {0.0, 1.0}, {0.0, 1.0});
  CHECK(grid.size() == 256 * 16);
  // each rectangle has parabolic diameter <= 2 * 2^{-n}
  for (int n : {1, 2, 3}) {
    auto g = pot::anisotropic_grid(Alpha(2.0), n, {0.0, 0.1}, {0.0, 0.1});
    double lim = 2.0 * std::pow(2.0, -n) + 1e-12;
    for (const auto& r : g) {
      ParabolicPoint a{r.t0, r.x0}, b{r.t1, r.x1};
      CHECK(delta_metric(Alpha(2.0), a, b) <= lim);
    }
  }
  CHECK_THROWS_AS(pot::anisotropic_grid(Alpha(2.0), 0, {0.0, 1.0}, {0.0, 1.0}),
                  std::domain_error);
}

TEST_CASE("dimension thresholds") {
  for (int d : {1, 4, 7}) {
    auto t2 = pot::dimension_thresholds(Alpha(2.0), d);
    CHECK(t2.space_time == doctest::Approx(d - 6.0));
    CHECK(t2.fixed_time == doctest::Approx(d - 2.0));
    CHECK(t2.fixed_space == doctest::Approx(d - 4.0));
    auto t15 = pot::dimension_thresholds(Alpha(1.5), d);
    CHECK(t15.space_time == doctest::Approx(d - 10.0));
    CHECK(t15.fixed_time == doctest::Approx(d - 4.0));
    CHECK(t15.fixed_space == doctest::Approx(d - 6.0));
  }
  // alpha -> 2, d = 1: all orders negative, so the capacities collapse to 1
  auto t = pot::dimension_thresholds(Alpha(2.0), 1);
  CHECK(t.space_time < 0.0);
  CHECK(t.fixed_time < 0.0);
  CHECK(t.fixed_space < 0.0);
}

TEST_CASE("lemma integral ratio bounded in all three regimes") {
  // alpha = 2 puts the three branches at d = 5, 6, 7
  std::pair<double, double> I{0.0, 1.0}, J{0.0, 1.0};
  const std::vector<double> ladder{1e-1, 1e-2, 1e-3, 1e-4};
  for (int d : {5, 6, 7}) {
    double p = 4.0 * d * (0.5 * d - 3.0) + 8.0;  // safely admissible
    std::vector<double> ratios;
    for (double a : ladder)
      ratios.push_back(pot::lemma_integral_check(Alpha(2.0), d, p, a, I, J));
    for (double r : ratios) {
      CHECK(std::isfinite(r));
      CHECK(r > 0.0);
    }
    double lo = *std::min_element(ratios.begin(), ratios.end());
    double hi = *std::max_element(ratios.begin(), ratios.end());
    CHECK(hi / lo < 10.0);
    if (d == 7) {
      // supercritical branch: the ratio converges as a -> 0
      CHECK(ratios[3] == doctest::Approx(ratios[2]).epsilon(0.05));
    }
  }
}

TEST_CASE("lemma integral quadrature matches the analytic radial integral") {
  // duplicate the reduction with closed-form radial integrals
  auto analytic = [](double al, int d, double p, double a, double li,
                     double lj) {
    double As = 2.0 / (al - 1.0) + 1.0;
    double Bt = (3.0 - al) / (al - 1.0);
    double q = As + Bt + 1.0 - d;
    double angular = std::beta(As + 1.0, Bt + 1.0);
    double rho_max =
        (std::pow(li, (al - 1.0) / (2.0 * al)) + std::pow(lj, (al - 1.0) / 2.0)) /
        a;
    double ip = q + p / (2.0 * d);
    double radial = std::pow(std::min(1.0, rho_max), ip + 1.0) / (ip + 1.0);
    if (rho_max > 1.0)
      radial += q == -1.0 ? std::log(rho_max)
                          : (std::pow(rho_max, q + 1.0) - 1.0) / (q + 1.0);
    double pre = 16.0 * li * lj * al / ((al - 1.0) * (al - 1.0)) *
                 std::pow(a, 2.0 * (al + 1.0) / (al - 1.0) - d);
    return pre * angular * radial /
           pot::k_kernel(d - 2.0 * (al + 1.0) / (al - 1.0), a);
  };
  std::pair<double, double> I{0.0, 0.5}, J{0.0, 2.0};
  for (double al : {1.5, 2.0})
    for (int d : {5, 7})
      for (double a : {0.5, 1e-2, 1e-3}) {
        double p = 4.0 * d * (0.5 * d - 2.0 / (al - 1.0) - 1.0) + 8.0;
        p = std::max(p, 1.0);
        CHECK(pot::lemma_integral_check(Alpha(al), d, p, a, I, J) ==
              doctest::Approx(analytic(al, d, p, a, 0.5, 2.0)).epsilon(1e-6));
      }
}

TEST_CASE("lemma integral preconditions") {
  std::pair<double, double> I{0.0, 1.0}, J{0.0, 1.0};
  // d = 7, alpha = 2 requires p > 14
  CHECK_THROWS_AS(pot::lemma_integral_check(Alpha(2.0), 7, 10.0, 0.1, I, J),
                  std::domain_error);
  CHECK_THROWS_AS(pot::lemma_integral_check(Alpha(2.0), 5, 8.0, 0.0, I, J),
                  std::domain_error);
  CHECK_THROWS_AS(pot::lemma_integral_check(Alpha(2.0), 5, 8.0, 1.5, I, J),
                  std::domain_error);
}
