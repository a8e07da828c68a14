#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fracheat/types.hpp"

namespace fracheat::potential {

/// Riesz kernel K_beta(r): r^{-beta} for beta > 0 (infinite at 0),
/// log(max(1/r, e)) for beta = 0, and the constant 1 for beta < 0.
double k_kernel(double beta, double r);

struct Box {
  std::vector<double> lo, hi;
};

/// Compact target set: finite union of axis-aligned boxes, or an explicit
/// point cloud with a declared mesh size.
struct CompactSetSpec {
  int d = 1;
  std::vector<Box> boxes;
  std::vector<std::vector<double>> points;
  double mesh = 0.0;  // for point clouds: the resolution they represent

  bool is_point_cloud() const { return boxes.empty(); }
};

/// Parses {"d": 2, "boxes": [{"lo": [...], "hi": [...]}]} or
/// {"d": 1, "points": [[...]], "mesh": h}.
CompactSetSpec parse_set_spec(const std::string& json_text);

/// Euclidean distance from z to the set (0 inside a box).
double set_distance(const CompactSetSpec& set, const std::vector<double>& z);

struct DiscreteMeasure {
  std::vector<std::vector<double>> atoms;
  std::vector<double> weights;  // nonnegative, sum to 1
};

/// beta-dimensional energy: double sum of K_beta over atom pairs.  The
/// diagonal uses K_beta(0) (infinite for beta >= 0) unless cell_size > 0, in
/// which case each atom stands for uniform mass on a cell of that edge length
/// and the diagonal uses the analytic (d=1) or sampled cell self-energy.
double energy(const DiscreteMeasure& mu, double beta, int d,
              double cell_size = 0.0);

/// Self-energy of the uniform probability measure on a cell of edge h in
/// dimension d: analytic for d=1, quasi-Monte-Carlo sampled otherwise.
/// Infinite when beta >= d.
double cell_self_energy(double beta, int d, double h);

struct CapacityResult {
  double capacity = 0.0;
  double minimum_energy = 0.0;  // minimized I_beta over the mesh
  double gap = 0.0;             // Frank-Wolfe duality-gap certificate
  std::size_t iterations = 0;
  std::size_t atom_count = 0;
  DiscreteMeasure minimizer;
};

/// Cap_beta(A) = 1 / inf I_beta(mu): discretizes A at the given mesh and
/// minimizes the quadratic energy over the probability simplex by
/// Frank-Wolfe with away steps until the relative duality gap drops below
/// tol.  Returns exactly 1 for beta < 0 and 0 for point clouds with
/// beta >= 0 (finitely many atoms carry infinite energy).
CapacityResult capacity(const CompactSetSpec& set, double beta, double mesh,
                        double tol = 1e-6);

struct Covering {
  struct Ball {
    std::vector<double> center;
    double radius = 0.0;
  };
  std::vector<Ball> balls;
  double scale = 0.0;
};

/// Greedy deterministic cover of the set by balls with radii eps 2^{-j},
/// j = 0, 1, 2, picked by best covered-per-cost ratio (lowest candidate
/// index on ties).
Covering greedy_cover(const CompactSetSpec& set, double eps);

/// Sum of (2 r_i)^beta over a greedy covering at scale <= eps: an upper
/// bound for the Hausdorff pre-measure.  +infinity for beta < 0.
double hausdorff_premeasure(const CompactSetSpec& set, double beta,
                            double eps);

/// Rectangle of the anisotropic grid t_k = k 2^{-2 n a/(a-1)},
/// x_l = l 2^{-2 n/(a-1)}.
struct Rect {
  double t0 = 0.0, t1 = 0.0, x0 = 0.0, x1 = 0.0;
};

/// All grid rectangles meeting I x J; their count is checked against the
/// c 2^{2n(a+1)/(a-1)} budget and each side maps to 2^{-n} under the
/// parabolic metric exponents.
std::vector<Rect> anisotropic_grid(Alpha alpha, int n,
                                   std::pair<double, double> time_window,
                                   std::pair<double, double> space_window);

/// Capacity orders governing hitting in space-time, at fixed time, and at
/// fixed space: d - 2(a+1)/(a-1), d - 2/(a-1), d - 2a/(a-1).
struct DimensionThresholds {
  double space_time = 0.0;
  double fixed_time = 0.0;
  double fixed_space = 0.0;
};
DimensionThresholds dimension_thresholds(Alpha alpha, int d);

/// Quadrature bound for the quadruple integral
///   int_I int_I int_J int_J Delta^{-d} [Delta^2/a^2 ^ 1]^{p/(4d)}
/// reduced to a one-dimensional radial integral (exact Beta-function
/// angular part), divided by K_{d - 2(a+1)/(a-1)}(a).  The ratio stays
/// bounded over a in (0, 1] in all three exponent regimes.
double lemma_integral_check(Alpha alpha, int d, double p, double a,
                            std::pair<double, double> time_window,
                            std::pair<double, double> space_window);

}  // namespace fracheat::potential
