#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

namespace fracheat {

/// Real 1-D FFT pair (r2c / c2r) on a fixed size, RAII around FFTW plans.
/// Plan creation is serialized (FFTW planner is not thread-safe); execution
/// on the instance's buffers is confined to the owning thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n), real_(n), spec_(n / 2 + 1) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_.data(),
                                reinterpret_cast<fftw_complex*>(spec_.data()),
                                FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                reinterpret_cast<fftw_complex*>(spec_.data()),
                                real_.data(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t spectral_size() const { return n_ / 2 + 1; }
  std::vector<double>& real() { return real_; }
  std::vector<std::complex<double>>& spectral() { return spec_; }

  /// real() -> spectral(), unnormalized.
  void forward() { fftw_execute(fwd_); }
  /// spectral() -> real(), divides by n (clobbers spectral()).
  void backward() {
    fftw_execute(bwd_);
    const double inv = 1.0 / static_cast<double>(n_);
    for (auto& v : real_) v *= inv;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
  }
  std::size_t n_;
  std::vector<double> real_;
  std::vector<std::complex<double>> spec_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

}  // namespace fracheat
