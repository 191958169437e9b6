#include "lmf/fft.hpp"

#include <algorithm>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace lmf {
namespace {

std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

std::size_t fft_friendly_size(std::size_t n) {
  if (n <= 1) return 1;
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("RealFft size must be > 0");
  std::lock_guard lock(planner_mutex());
  in_ = fftw_alloc_real(n);
  auto* out = fftw_alloc_complex(n / 2 + 1);
  out_ = out;
  plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out, FFTW_ESTIMATE);
  if (!in_ || !out || !plan_) throw std::runtime_error("FFTW allocation failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  fftw_free(in_);
  fftw_free(out_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  if (in.size() != n_ || out.size() != n_ / 2 + 1) throw std::invalid_argument("RealFft: size mismatch");
  std::copy(in.begin(), in.end(), in_);
  auto* o = static_cast<fftw_complex*>(out_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_), in_, o);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {o[k][0], o[k][1]};
}

std::vector<double> lagged_product_sums(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (max_lag >= n) throw std::invalid_argument("max_lag must be < series length");
  const std::size_t m = fft_friendly_size(n + max_lag + 1);
  const std::size_t half = m / 2 + 1;

  double* buf;
  fftw_complex* spec;
  fftw_plan fwd, inv;
  {
    std::lock_guard lock(planner_mutex());
    buf = fftw_alloc_real(m);
    spec = fftw_alloc_complex(half);
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(m), buf, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(m), spec, buf, FFTW_ESTIMATE);
  }
  std::copy(x.begin(), x.end(), buf);
  std::fill(buf + n, buf + m, 0.0);
  fftw_execute(fwd);
  for (std::size_t k = 0; k < half; ++k) {
    spec[k][0] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    spec[k][1] = 0.0;
  }
  fftw_execute(inv);
  std::vector<double> out(max_lag + 1);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t t = 0; t <= max_lag; ++t) out[t] = buf[t] * scale;
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(buf);
    fftw_free(spec);
  }
  return out;
}

}  // namespace lmf
