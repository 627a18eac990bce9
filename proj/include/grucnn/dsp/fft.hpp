#pragma once

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "grucnn/common.hpp"

namespace grucnn::dsp {

namespace detail {

// FFTW's planner is not thread-safe; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Real-input FFT of a fixed size n (forward r2c, inverse c2r), backed by
/// FFTW with FFTW_ESTIMATE plans so results are reproducible run to run.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n), bins_(n / 2 + 1) {
    if (n < 2) throw ContractError("RealFft: size must be at least 2");
    real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_));
    spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins_));
    std::lock_guard lock(detail::fftw_planner_mutex());
    const int size = static_cast<int>(n_);
    forward_ = fftw_plan_dft_r2c_1d(size, real_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(size, spec_, real_, FFTW_ESTIMATE);
  }

  ~RealFft() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return bins_; }

  /// X[k] = sum_n x[n] exp(-2 pi i k n / N), k = 0..N/2.
  std::vector<std::complex<double>> forward(std::span<const double> x) {
    if (x.size() != n_) throw ContractError(str_cat("RealFft::forward: expected ", n_, " samples, got ", x.size()));
    std::copy(x.begin(), x.end(), real_);
    fftw_execute(forward_);
    std::vector<std::complex<double>> out(bins_);
    for (std::size_t k = 0; k < bins_; ++k) out[k] = {spec_[k][0], spec_[k][1]};
    return out;
  }

  /// Inverse of `forward`, including the 1/N factor. Imaginary parts of the
  /// DC and Nyquist bins are ignored.
  std::vector<double> inverse(std::span<const std::complex<double>> spectrum) {
    if (spectrum.size() != bins_)
      throw ContractError(str_cat("RealFft::inverse: expected ", bins_, " bins, got ", spectrum.size()));
    for (std::size_t k = 0; k < bins_; ++k) {
      spec_[k][0] = spectrum[k].real();
      spec_[k][1] = spectrum[k].imag();
    }
    fftw_execute(inverse_);
    std::vector<double> out(real_, real_ + n_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (double& v : out) v *= scale;
    return out;
  }

 private:
  std::size_t n_;
  std::size_t bins_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace grucnn::dsp
