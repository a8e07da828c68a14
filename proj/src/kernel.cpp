#include "fracheat/kernel.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <map>
#include <mutex>

namespace fracheat::kernel {

namespace {

constexpr double kPi = 3.14159265358979323846;
// exp(-u) < 1e-16 for u > kExpCut.
constexpr double kExpCut = 36.85;

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

// Memoized per-alpha constants; the maps are tiny (a handful of alphas).
template <typename F>
double memoized(Alpha alpha, std::map<double, double>& cache, std::mutex& mu,
                F&& compute) {
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(alpha.value());
  if (it != cache.end()) return it->second;
  double v = compute();
  cache.emplace(alpha.value(), v);
  return v;
}

}  // namespace

double green_kernel(Alpha alpha, double t, double x) {
  if (!(t > 0.0)) throw std::domain_error("green_kernel requires t > 0");
  const double a = alpha.value();
  if (alpha.is_gaussian())
    return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
  // G_a(t,x) = (1/pi) int_0^Lam cos(lambda x) exp(-t lambda^a) dlambda,
  // truncated where the exponential is below machine noise.
  const double lam_max = std::pow(kExpCut / t, 1.0 / a);
  auto f = [&](double lam) {
    return std::cos(lam * x) * std::exp(-t * std::pow(lam, a));
  };
  double err = 0.0;
  double v = GK::integrate(f, 0.0, lam_max, 15, 1e-12, &err);
  if (err > 1e-6 * (1.0 + std::fabs(v)))
    throw NumericError("green_kernel quadrature did not converge", err);
  return v / kPi;
}

double green_at_origin(Alpha alpha) {
  static std::map<double, double> cache;
  static std::mutex mu;
  return memoized(alpha, cache, mu, [&] {
    if (alpha.is_gaussian()) return 1.0 / std::sqrt(4.0 * kPi);
    const double a = alpha.value();
    boost::math::quadrature::exp_sinh<double> integrator;
    double v = integrator.integrate(
        [&](double lam) { return std::exp(-std::pow(lam, a)); }, 1e-13);
    return v / kPi;
  });
}

double tail_coefficient(Alpha alpha) {
  static std::map<double, double> cache;
  static std::mutex mu;
  return memoized(alpha, cache, mu, [&] {
    const double a = alpha.value();
    double k = 0.0;
    for (double x = 0.0; x <= 60.0; x += 0.25) {
      double g = green_kernel(alpha, 1.0, x);
      k = std::max(k, g * (1.0 + std::pow(std::fabs(x), 1.0 + a)));
    }
    return k;
  });
}

double KernelProfile::trapezoid_mass() const {
  const double h = grid_step();
  double m = 0.5 * (values.front() + values.back());
  for (std::size_t j = 1; j + 1 < values.size(); ++j) m += values[j];
  return m * h;
}

KernelProfile kernel_profile(Alpha alpha, double L, std::size_t n) {
  if (!(L > 0.0)) throw std::domain_error("kernel_profile requires L > 0");
  if (n < 16) throw std::domain_error("kernel_profile requires n >= 16");
  KernelProfile p{alpha, L, {}};
  p.values.resize(n);
  const double h = 2.0 * L / static_cast<double>(n - 1);
  // Exploit symmetry; clamp quadrature noise in the far tail to zero.
  for (std::size_t j = 0; j <= (n - 1) / 2; ++j) {
    double x = -L + h * static_cast<double>(j);
    double v = std::max(green_kernel(alpha, 1.0, x), 0.0);
    p.values[j] = v;
    p.values[n - 1 - j] = v;
  }
  return p;
}

double squared_mass_constant(Alpha alpha) {
  const double a = alpha.value();
  return std::pow(2.0, -1.0 / a) * green_at_origin(alpha) * a / (a - 1.0);
}

double squared_mass_integral(Alpha alpha, double a, double b, double t) {
  if (!(0.0 <= a && a <= b && b <= t))
    throw std::domain_error("squared_mass_integral requires 0 <= a <= b <= t");
  if (a == b) return 0.0;
  // int_{t-b}^{t-a} G_alpha(2u, 0) du; integrable singularity at u = 0 when
  // b = t.  The clamp keeps abscissae that underflow onto the endpoint off
  // the kernel's t > 0 precondition; that sliver carries no mass.
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(
      [&](double u) {
        return green_kernel(alpha, 2.0 * std::max(u, 1e-250), 0.0);
      },
      t - b, t - a, 1e-9);
}

double increment_variance_exact(Alpha alpha, const ParabolicPoint& pt,
                                const ParabolicPoint& ps) {
  const double s = ps.t, t = pt.t;
  if (s > t) throw std::domain_error("increment_variance_exact requires s <= t");
  if (s < 0.0) throw std::domain_error("increment_variance_exact requires s >= 0");
  const double a = alpha.value();
  const double dt = t - s;
  const double h = std::fabs(pt.x - ps.x);
  const double i1 = squared_mass_constant(alpha) * std::pow(dt, (a - 1.0) / a);
  if (s == 0.0) return i1;
  if (dt == 0.0 && h == 0.0) return 0.0;

  // I2 integrand (even in lambda):
  //   (1 - e^{-2 s l^a})/(2 l^a) * (1 - 2 E cos(l h) + E^2),  E = e^{-dt l^a}.
  auto integrand = [&](double lam) {
    const double la = std::pow(lam, a);
    const double front = -std::expm1(-2.0 * s * la) / (2.0 * la);
    const double e = std::exp(-dt * la);
    return front * (1.0 - 2.0 * e * std::cos(lam * h) + e * e);
  };

  const double lam_s = std::pow(kExpCut / (2.0 * s), 1.0 / a);
  double lam_cut = lam_s;
  if (dt > 0.0) {
    lam_cut = std::max(lam_cut, std::pow(kExpCut / dt, 1.0 / a));
  } else if (h > 0.0) {
    // Push the cutoff far enough that the two-term asymptotics of the
    // oscillatory tail are below ~1e-9: remainder ~ a(a+1) h^{-3} L^{-a-2}.
    double need = std::pow(a * (a + 1.0) / (h * h * h * 1e-9), 1.0 / (a + 2.0));
    lam_cut = std::max(lam_cut, need);
  }

  double err = 0.0;
  double body = GK::integrate(integrand, 1e-14, lam_cut, 18, 1e-10, &err);
  if (err > 1e-6 * (1.0 + std::fabs(body)))
    throw NumericError("increment_variance quadrature did not converge", err);

  // Beyond lam_cut both exponentials are machine zero, so the remainder is
  // analytic: int (1 - 2E cos + E^2)/(2 l^a).
  double tail;
  if (dt > 0.0) {
    tail = std::pow(lam_cut, 1.0 - a) / (2.0 * (a - 1.0));
  } else {
    // E = 1: integrand tail is (1 - cos(l h)) / l^a; two-term asymptotics for
    // the oscillatory part.
    tail = std::pow(lam_cut, 1.0 - a) / (a - 1.0);
    if (h > 0.0) {
      double c1 = -std::sin(lam_cut * h) / (h * std::pow(lam_cut, a));
      double c2 = a * std::cos(lam_cut * h) / (h * h * std::pow(lam_cut, a + 1.0));
      tail -= c1 + c2;
    }
  }
  return i1 + (body + tail) / kPi;
}

double g_diff_sq_integral(Alpha alpha, const ParabolicPoint& pt,
                          const ParabolicPoint& ps) {
  if (ps.t > pt.t)
    throw std::domain_error("g_diff_sq_integral requires s <= t");
  // Plancherel: the L^2 norm of the difference kernel equals the exact
  // second moment of the additive-field increment.
  return increment_variance_exact(alpha, pt, ps);
}

double zeta(Alpha alpha, double x) {
  if (x < 0.0) throw std::domain_error("zeta requires x >= 0");
  const double g = (alpha.value() - 1.0) / alpha.value();
  return std::pow(x + 1.0, g) - std::pow(x, g) + std::pow(std::min(x, 1.0), g);
}

double zeta_min(Alpha alpha) {
  // Golden-section over [0, 100]; the infimum over the unbounded tail is the
  // limit 1.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 100.0;
  double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
  double fc = zeta(alpha, c), fd = zeta(alpha, d);
  while (hi - lo > 1e-10) {
    if (fc < fd) {
      hi = d; d = c; fd = fc;
      c = hi - phi * (hi - lo); fc = zeta(alpha, c);
    } else {
      lo = c; c = d; fc = fd;
      d = lo + phi * (hi - lo); fd = zeta(alpha, d);
    }
  }
  double interior = std::min({fc, fd, zeta(alpha, 0.0), zeta(alpha, 100.0)});
  return std::min(interior, 1.0);
}

double psi(double a, double nu, double rho) {
  if (!(a > 0.0 && nu > 0.0 && rho > 0.0))
    throw std::domain_error("psi requires positive arguments");
  double err = 0.0;
  double v = GK::integrate([&](double x) { return 1.0 / (rho + std::pow(x, nu)); },
                           0.0, a, 15, 1e-12, &err);
  return v;
}

}  // namespace fracheat::kernel
