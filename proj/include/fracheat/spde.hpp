#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <thread>
#include <vector>

#include "fracheat/types.hpp"

namespace fracheat::spde {

/// Coefficient preset (sigma, b) with its declared Lipschitz bound and
/// ellipticity constant.  Presets only; arbitrary user closures are out of
/// scope for reproducibility.
struct CoefficientSet {
  std::string name;
  int d = 1;
  double lipschitz_bound = 0.0;
  double ellipticity_rho = 0.0;
  // sigma: u (d) -> row-major d x d matrix; drift: u (d) -> d vector
  std::function<void(const double* u, double* sigma)> sigma;
  std::function<void(const double* u, double* b)> drift;

  bool is_additive() const { return name == "additive"; }

  /// Known presets: "additive" (Id, 0), "bounded-smooth" (tanh-based,
  /// elliptic), "drift-only" (0, 1), "zero" (0, 0).
  static CoefficientSet preset(const std::string& name, int d);
};

/// Discretization: periodic torus [-L, L), nx spatial nodes (power of two),
/// nt time steps over [0, T].
struct SolverGrid {
  SolverGrid(Alpha alpha, double T, double L, std::size_t nt, std::size_t nx);

  Alpha alpha;
  double T;
  double L;
  std::size_t nt;
  std::size_t nx;

  double dt() const { return T / static_cast<double>(nt); }
  double dx() const { return 2.0 * L / static_cast<double>(nx); }
  double node_t(std::size_t k) const { return dt() * static_cast<double>(k); }
  double node_x(std::size_t j) const { return -L + dx() * static_cast<double>(j); }
  std::size_t index_of_t(double t) const;  // nearest node
  std::size_t index_of_x(double x) const;  // nearest node
};

struct NoiseRealization {
  std::uint64_t seed = 0;
  std::size_t nt = 0, nx = 0;
  int d = 1;
  std::vector<double> increments;  // [nt][nx][d], N(0, dt*dx)
  double at(std::size_t k, std::size_t j, int c) const {
    return increments[(k * nx + j) * static_cast<std::size_t>(d) + c];
  }
};

/// Materializes the per-cell white-noise increments (mostly for tests; the
/// solvers regenerate cells on the fly from the same counters).
NoiseRealization generate_noise(const SolverGrid& grid, int d,
                                std::uint64_t seed);

struct FieldSample {
  SolverGrid grid;
  std::string preset;
  std::uint64_t seed = 0;
  int d = 1;
  std::vector<double> values;  // [nt+1][nx][d]

  double at(std::size_t k, std::size_t j, int c) const {
    return values[(k * grid.nx + j) * static_cast<std::size_t>(d) + c];
  }
};

class SimulationDivergedError : public std::runtime_error {
 public:
  SimulationDivergedError(std::size_t step)
      : std::runtime_error("simulation diverged at step " +
                           std::to_string(step)),
        step(step) {}
  std::size_t step;
};

/// Exponential-Euler spectral scheme for the mild equation: nonlinearity and
/// noise in physical space, then per-mode updates (l_k = pi k / L) with the
/// semigroup factor e^{-dt |l_k|^a} on the deterministic part and the exact
/// linear step variance on the noise part, so the additive case is free of
/// time-stepping bias.  `substeps` integrates with dt/substeps internally
/// while recording only at the grid's nt time nodes.
FieldSample solve(const CoefficientSet& coeffs, const SolverGrid& grid,
                  std::uint64_t seed, std::size_t substeps = 1);

/// Additive Gaussian reference field: per-mode Ornstein-Uhlenbeck update with
/// the exact step variance (1 - e^{-2 dt |l_k|^a}) / (2 |l_k|^a), so there is
/// no time-stepping bias.
FieldSample solve_additive_exact(int d, const SolverGrid& grid,
                                 std::uint64_t seed);

/// Runs independent trajectories for each seed and reduces each one to a
/// summary; trajectories are not retained.  Results are identical whether run
/// serially or in parallel.
template <typename Summarize>
auto batch_solve(const CoefficientSet& coeffs, const SolverGrid& grid,
                 const std::vector<std::uint64_t>& seeds, Summarize&& summarize,
                 unsigned workers = std::thread::hardware_concurrency())
    -> std::vector<decltype(summarize(std::declval<const FieldSample&>()))> {
  using R = decltype(summarize(std::declval<const FieldSample&>()));
  if (seeds.empty()) throw std::domain_error("batch_solve: empty seed list");
  std::vector<R> out(seeds.size());
  if (workers < 1) workers = 1;
  workers = std::min<unsigned>(workers, seeds.size());
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < seeds.size();
             i = next.fetch_add(1))
          out[i] = summarize(solve(coeffs, grid, seeds[i]));
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Trajectory export, columns: seed,t,x,component,value.
void write_csv(std::ostream& os, const FieldSample& sample);

/// Compact binary snapshot: magic "FHSN", u32 version, grid parameters,
/// little-endian 64-bit floats; see docs/FORMATS.md.
void write_snapshot(std::ostream& os, const FieldSample& sample);
FieldSample read_snapshot(std::istream& is);

}  // namespace fracheat::spde
