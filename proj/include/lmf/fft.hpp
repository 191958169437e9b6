#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace lmf {

/// Smallest n' >= n whose prime factors are all in {2,3,5,7}.
std::size_t fft_friendly_size(std::size_t n);

/// Forward real-to-complex transform of a fixed length (FFTW backed).
/// Plans are created under a process-wide lock; execute() is reentrant.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  /// Writes n/2+1 coefficients of sum_t in[t] exp(-2 pi i k t / n).
  void forward(std::span<const double> in, std::span<std::complex<double>> out);

 private:
  std::size_t n_;
  double* in_;
  void* out_;
  void* plan_;
};

/// S(tau) = sum_t x[t] x[t+tau] for tau = 0..max_lag, via zero-padded FFT.
std::vector<double> lagged_product_sums(std::span<const double> x, std::size_t max_lag);

}  // namespace lmf
