#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fracheat/hitting.hpp"
#include "fracheat/potential.hpp"
#include "fracheat/rng.hpp"
#include "fracheat/spde.hpp"

using namespace fracheat;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

potential::CompactSetSpec point_target(std::vector<double> z) {
  potential::CompactSetSpec s;
  s.d = static_cast<int>(z.size());
  s.points.push_back(std::move(z));
  return s;
}

potential::CompactSetSpec box_target(std::vector<double> lo,
                                     std::vector<double> hi) {
  potential::CompactSetSpec s;
  s.d = static_cast<int>(lo.size());
  s.boxes.push_back({std::move(lo), std::move(hi)});
  return s;
}

}  // namespace

TEST_CASE("wilson interval matches the textbook example and edge cases") {
  auto [lo, hi] = hitting::wilson_interval(30, 100);
  CHECK(lo == doctest::Approx(0.2189).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.3958).epsilon(1e-3));

  auto [lo0, hi0] = hitting::wilson_interval(0, 50);
  CHECK(lo0 == doctest::Approx(0.0));
  CHECK(hi0 > 0.0);
  auto [lo1, hi1] = hitting::wilson_interval(50, 50);
  CHECK(lo1 < 1.0);
  CHECK(hi1 == doctest::Approx(1.0));

  CHECK_THROWS_AS(hitting::wilson_interval(5, 0), std::domain_error);
  CHECK_THROWS_AS(hitting::wilson_interval(6, 5), std::domain_error);
}

TEST_CASE("wilson interval covers a known Bernoulli parameter ~95% of runs") {
  const double p = 0.3;
  const std::size_t n = 150, reps = 2000;
  std::size_t covered = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i)
      hits += rng::to_unit(rng::mix(0xc0ffee, r, i, 0, 0)) < p;
    auto [lo, hi] = hitting::wilson_interval(hits, n);
    covered += (lo <= p && p <= hi);
  }
  const double coverage = static_cast<double>(covered) / reps;
  CHECK(coverage > 0.93);
  CHECK(coverage < 0.975);
}

TEST_CASE("wilson interval width shrinks ~sqrt(2) when samples double") {
  auto [lo1, hi1] = hitting::wilson_interval(120, 400);
  auto [lo2, hi2] = hitting::wilson_interval(240, 800);
  const double ratio = (hi1 - lo1) / (hi2 - lo2);
  CHECK(ratio > 1.3);
  CHECK(ratio < 1.5);
}

TEST_CASE("hit test handles trivial targets and rejects bad windows") {
  spde::SolverGrid grid(Alpha{2.0}, 0.5, 4.0, 32, 256);
  auto sample = spde::solve_additive_exact(1, grid, 77);
  hitting::Window w{0.25, 0.5, -1.0, 1.0};
  const double gm = hitting::grid_modulus(grid);

  auto whole = box_target({-1e6}, {1e6});
  CHECK(hitting::hit_test(sample, w, hitting::Mode::space_time, whole, 0.0));

  double max_abs = 0.0;
  for (std::size_t k = 0; k <= grid.nt; ++k)
    for (std::size_t j = 0; j < grid.nx; ++j)
      max_abs = std::max(max_abs, std::abs(sample.at(k, j, 0)));
  auto far = point_target({max_abs + 10.0 * gm + 1.0});
  CHECK_FALSE(hitting::hit_test(sample, w, hitting::Mode::space_time, far, gm));

  hitting::Window bad_t{0.25, 0.6, -1.0, 1.0};
  CHECK_THROWS_AS(
      hitting::hit_test(sample, bad_t, hitting::Mode::space_time, whole, 0.0),
      std::domain_error);
  hitting::Window bad_x{0.25, 0.5, -1.0, 5.0};
  CHECK_THROWS_AS(
      hitting::hit_test(sample, bad_x, hitting::Mode::space_time, whole, 0.0),
      std::domain_error);
  hitting::Window not_degenerate{0.25, 0.5, -1.0, 1.0};
  CHECK_THROWS_AS(hitting::hit_test(sample, not_degenerate,
                                    hitting::Mode::fixed_time, whole, 0.0),
                  std::domain_error);
  CHECK_THROWS_AS(
      hitting::hit_test(sample, w, hitting::Mode::space_time, whole, -1.0),
      std::domain_error);
  auto mismatched = point_target({0.0, 0.0});
  CHECK_THROWS_AS(
      hitting::hit_test(sample, w, hitting::Mode::space_time, mismatched, 0.0),
      std::domain_error);
}

TEST_CASE("hit rate is monotone non-decreasing in the dilation") {
  spde::SolverGrid grid(Alpha{2.0}, 0.5, 4.0, 32, 256);
  hitting::Window w{0.25, 0.5, -1.0, 1.0};
  auto target = point_target({0.4});
  const double gm = hitting::grid_modulus(grid);
  std::size_t hits0 = 0, hits1 = 0, hits2 = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto sample = spde::solve_additive_exact(1, grid, 500 + s);
    hits0 += hitting::hit_test(sample, w, hitting::Mode::space_time, target,
                               0.0);
    hits1 += hitting::hit_test(sample, w, hitting::Mode::space_time, target,
                               gm / 4.0);
    hits2 += hitting::hit_test(sample, w, hitting::Mode::space_time, target,
                               gm / 2.0);
  }
  CHECK(hits0 <= hits1);
  CHECK(hits1 <= hits2);
  CHECK(hits2 > hits0);  // the ladder actually moves at this grid scale
}

TEST_CASE(
    "point target in the bulk is hit with positive probability and the "
    "negative-order bounds attach") {
  hitting::HittingExperiment exp{spde::SolverGrid(Alpha{2.0}, 0.5, 4.0, 32, 256)};
  exp.preset = "additive";
  exp.d = 1;
  exp.mode = hitting::Mode::space_time;
  exp.window = {0.25, 0.5, -1.0, 1.0};
  exp.target = point_target({0.8});
  exp.dilation = hitting::grid_modulus(exp.grid) / 8.0;
  exp.n_samples = 400;
  exp.seed0 = 11;

  auto res = hitting::hitting_probability_mc(exp);
  CHECK(res.n == 400);
  CHECK(res.estimate > 0.0);
  CHECK(res.estimate < 1.0);
  CHECK(res.ci_lo > 0.0);
  CHECK(res.ci_lo <= res.estimate);
  CHECK(res.estimate <= res.ci_hi);
  CHECK(res.ci_hi <= 1.0);
  CHECK(res.estimate ==
        doctest::Approx(static_cast<double>(res.hit_count) / 400.0));
  // space-time threshold d - 2(a+1)/(a-1) = 1 - 6
  CHECK(res.threshold == doctest::Approx(-5.0));
  CHECK(res.capacity_value == doctest::Approx(1.0));
  CHECK(std::isinf(res.hausdorff_value));
  CHECK(res.estimate_half_dilation <= res.estimate);
  CHECK(res.estimate <= res.estimate_double_dilation);

  auto rerun = hitting::hitting_probability_mc(exp);
  CHECK(rerun.hit_count == res.hit_count);
  CHECK(rerun.estimate == res.estimate);
  CHECK(rerun.capacity_value == res.capacity_value);
}

TEST_CASE("nested targets give ordered hit rates") {
  hitting::HittingExperiment exp{spde::SolverGrid(Alpha{2.0}, 0.5, 4.0, 32, 256)};
  exp.preset = "additive";
  exp.d = 1;
  exp.window = {0.25, 0.5, -1.0, 1.0};
  exp.n_samples = 300;
  exp.seed0 = 42;

  exp.target = point_target({0.3});
  auto small = hitting::hitting_probability_mc(exp);
  exp.target = box_target({-0.3}, {0.9});
  auto big = hitting::hitting_probability_mc(exp);
  CHECK(small.estimate <= big.estimate);

  // window inclusion: shrinking the window cannot raise the hit rate
  exp.window = {0.3, 0.45, -0.5, 0.5};
  auto shrunk = hitting::hitting_probability_mc(exp);
  CHECK(shrunk.estimate <= big.estimate);
}

TEST_CASE("fixed-time and fixed-space modes use their own threshold orders") {
  hitting::HittingExperiment exp{spde::SolverGrid(Alpha{2.0}, 0.5, 4.0, 32, 256)};
  exp.preset = "additive";
  exp.d = 1;
  exp.target = point_target({0.0});
  exp.n_samples = 150;
  exp.seed0 = 5;

  exp.mode = hitting::Mode::fixed_time;
  exp.window = {0.25, 0.25, -1.0, 1.0};
  auto ft = hitting::hitting_probability_mc(exp);
  CHECK(ft.threshold == doctest::Approx(-1.0));  // d - 2/(a-1)
  CHECK(ft.capacity_value == doctest::Approx(1.0));

  exp.mode = hitting::Mode::fixed_space;
  exp.window = {0.25, 0.5, 0.0, 0.0};
  auto fs = hitting::hitting_probability_mc(exp);
  CHECK(fs.threshold == doctest::Approx(-3.0));  // d - 2a/(a-1)
  CHECK(fs.capacity_value == doctest::Approx(1.0));
}

TEST_CASE("experiment preconditions are enforced") {
  hitting::HittingExperiment exp{spde::SolverGrid(Alpha{2.0}, 0.5, 4.0, 32, 256)};
  exp.preset = "additive";
  exp.d = 1;
  exp.window = {0.25, 0.5, -1.0, 1.0};
  exp.target = point_target({0.0});
  exp.seed0 = 1;

  exp.n_samples = 99;
  CHECK_THROWS_AS(hitting::hitting_probability_mc(exp), std::domain_error);
  exp.n_samples = 100;

  auto bad_start = exp;
  bad_start.window.t0 = 0.0;
  CHECK_THROWS_AS(hitting::hitting_probability_mc(bad_start),
                  std::domain_error);

  auto near_seam = exp;
  near_seam.window.x1 = 3.9;  // margin T^{1/a} ~ 0.707 from the seam at L = 4
  CHECK_THROWS_AS(hitting::hitting_probability_mc(near_seam),
                  std::domain_error);

  auto wrong_dim = exp;
  wrong_dim.target = point_target({0.0, 0.0});
  CHECK_THROWS_AS(hitting::hitting_probability_mc(wrong_dim),
                  std::domain_error);
}

TEST_CASE("small-ball ladder recovers the marginal decay order d = 1") {
  spde::SolverGrid grid(Alpha{2.0}, 0.02, 2.0, 4, 512);
  auto fit = hitting::small_ball_scaling(grid, "additive", 1, {0.0},
                                         {1, 4, 5, 6}, 8000, 303);
  REQUIRE(fit.levels.size() == 4);
  // radius 1/2 swallows most of the range at sd(u) ~ 0.2: saturated rung
  CHECK(fit.frequencies[0] > 0.9);
  CHECK_FALSE(fit.used[0]);
  CHECK(fit.used[1]);
  CHECK(fit.used[2]);
  CHECK(fit.used[3]);
  CHECK(fit.exponent >= 0.8);
  CHECK(fit.exponent <= 1.2);
  CHECK(fit.slack == doctest::Approx(1.0 - fit.exponent));
  // frequencies themselves decay along the ladder
  CHECK(fit.frequencies[1] > fit.frequencies[2]);
  CHECK(fit.frequencies[2] > fit.frequencies[3]);

  auto rerun = hitting::small_ball_scaling(grid, "additive", 1, {0.0},
                                           {1, 4, 5, 6}, 8000, 303);
  CHECK(rerun.exponent == fit.exponent);
  CHECK(rerun.frequencies == fit.frequencies);
}

TEST_CASE("small-ball preconditions are enforced") {
  spde::SolverGrid grid(Alpha{2.0}, 0.02, 2.0, 4, 512);
  CHECK_THROWS_AS(
      hitting::small_ball_scaling(grid, "additive", 1, {0.0}, {3, 4}, 1000, 1),
      std::domain_error);
  CHECK_THROWS_AS(hitting::small_ball_scaling(grid, "additive", 1, {0.0, 0.0},
                                              {3, 4, 5}, 1000, 1),
                  std::domain_error);
  CHECK_THROWS_AS(hitting::small_ball_scaling(grid, "drift-only", 1, {0.0},
                                              {3, 4, 5}, 1000, 1),
                  std::domain_error);
  CHECK_THROWS_AS(hitting::small_ball_scaling(grid, "additive", 1, {0.0},
                                              {3, 4, 5}, 99, 1),
                  std::domain_error);
  CHECK_THROWS_AS(hitting::small_ball_scaling(grid, "additive", 1, {0.0},
                                              {0, 4, 5}, 1000, 1),
                  std::domain_error);
}

TEST_CASE("bound report flags degenerate denominators and sanity") {
  hitting::HittingResult res;
  res.estimate = 0.4;
  res.capacity_value = 1.0;
  res.hausdorff_value = kInf;
  auto rep = hitting::bound_comparison(res);
  CHECK(rep.c1_applicable);
  CHECK(rep.c1_hat == doctest::Approx(0.4));
  CHECK_FALSE(rep.c2_applicable);
  CHECK(rep.hausdorff_vacuous);
  CHECK(rep.lower_bound_sane);

  res.hausdorff_value = 2.0;
  res.capacity_value = 0.0;
  rep = hitting::bound_comparison(res);
  CHECK_FALSE(rep.c1_applicable);
  CHECK(rep.c2_applicable);
  CHECK(rep.c2_hat == doctest::Approx(0.2));
  CHECK_FALSE(rep.hausdorff_vacuous);

  res.capacity_value = 1.0;
  res.estimate = 0.0;
  rep = hitting::bound_comparison(res);
  CHECK_FALSE(rep.lower_bound_sane);
}
