#pragma once

#include <vector>

#include "fracheat/types.hpp"

namespace fracheat::kernel {

/// Fractional heat Green kernel G_alpha(t, x), the symmetric alpha-stable
/// density with Fourier transform exp(-t |lambda|^alpha).  Closed form at
/// alpha = 2, adaptive cosine-transform quadrature otherwise.
double green_kernel(Alpha alpha, double t, double x);

/// G_alpha(1, 0), computed once per alpha to ~1e-12 and memoized.
double green_at_origin(Alpha alpha);

/// Coefficient K such that G_alpha(1, x) <= K / (1 + |x|^{1+alpha}),
/// fitted over a fixed sample of x and cached per alpha.
double tail_coefficient(Alpha alpha);

struct KernelProfile {
  Alpha alpha;
  double half_width;            // L
  std::vector<double> values;   // G_alpha(1, x_j) on uniform grid over [-L, L]
  double grid_step() const {
    return 2.0 * half_width / static_cast<double>(values.size() - 1);
  }
  double trapezoid_mass() const;
};

/// Tabulates G_alpha(1, .) on n uniform nodes over [-L, L].
KernelProfile kernel_profile(Alpha alpha, double L, std::size_t n);

/// c_alpha = 2^{-1/alpha} G_alpha(1,0) alpha/(alpha-1); the constant in
/// int_a^b int_R G_alpha^2(t-r, x-v) dv dr
///   = c_alpha ((t-a)^{(alpha-1)/alpha} - (t-b)^{(alpha-1)/alpha}).
double squared_mass_constant(Alpha alpha);

/// The double integral above, with the space integral collapsed through the
/// semigroup identity to G_alpha(2(t-r), 0) and the r-integral done by
/// quadrature.  Requires 0 <= a <= b <= t.
double squared_mass_integral(Alpha alpha, double a, double b, double t);

/// Exact second moment of the additive-noise increment v1(t,x) - v1(s,y):
/// I1 = c_alpha (t-s)^{(alpha-1)/alpha} plus the Plancherel integral
/// I2 = (1/2pi) int (1-e^{-2s|l|^a})/(2|l|^a) |1 - e^{-(t-s)|l|^a} e^{il(x-y)}|^2 dl.
/// Requires s <= t.
double increment_variance_exact(Alpha alpha, const ParabolicPoint& pt,
                                const ParabolicPoint& ps);

/// L^2 norm of the difference kernel
///   g(r,v) = 1_{r<t} G_a(t-r, x-v) - 1_{r<s} G_a(s-r, y-v)
/// over [0,T] x R, via the same Plancherel reduction.  Requires s <= t.
double g_diff_sq_integral(Alpha alpha, const ParabolicPoint& pt,
                          const ParabolicPoint& ps);

/// zeta(x) = (x+1)^{(a-1)/a} - x^{(a-1)/a} + (x ^ 1)^{(a-1)/a}, x >= 0.
double zeta(Alpha alpha, double x);

/// Global minimum of zeta over [0, inf): golden-section over [0, 100]
/// combined with the limit value 1 at infinity.  Strictly positive.
double zeta_min(Alpha alpha);

/// Psi_{a,nu}(rho) = int_0^a dx / (rho + x^nu), all arguments positive.
double psi(double a, double nu, double rho);

}  // namespace fracheat::kernel
