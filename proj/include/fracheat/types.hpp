#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace fracheat {

/// Stability index of the fractional Laplacian, restricted to 1 < alpha <= 2.
class Alpha {
 public:
  explicit Alpha(double value) : value_(value) {
    if (!(value > 1.0) || !(value <= 2.0) || !std::isfinite(value))
      throw std::domain_error("Alpha must lie in (1, 2], got " +
                              std::to_string(value));
  }
  double value() const { return value_; }
  bool is_gaussian() const { return value_ == 2.0; }

 private:
  double value_;
};

struct ParabolicPoint {
  double t = 0.0;  // time, >= 0
  double x = 0.0;  // space
};

/// Anisotropic parabolic distance |t-s|^{(a-1)/(2a)} + |x-y|^{(a-1)/2}.
inline double delta_metric(Alpha alpha, const ParabolicPoint& p,
                           const ParabolicPoint& q) {
  const double a = alpha.value();
  return std::pow(std::fabs(p.t - q.t), (a - 1.0) / (2.0 * a)) +
         std::pow(std::fabs(p.x - q.x), (a - 1.0) / 2.0);
}

/// Quadrature failed to reach the requested tolerance.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved " + std::to_string(achieved) +
                           ")"),
        achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

}  // namespace fracheat
