#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "lmf/correlation.hpp"
#include "lmf/fft.hpp"

namespace lmf {

PsdCurve psd_estimate(const SignSeries& series, const PsdOptions& options) {
  const auto n = static_cast<std::int64_t>(series.size());
  const std::int64_t len = options.segment_length;
  if (len < 16) throw LmfError(ErrorCode::InvalidConfig, "segment_length must be >= 16");
  if (!(options.overlap >= 0.0 && options.overlap < 1.0))
    throw LmfError(ErrorCode::InvalidConfig, "overlap must lie in [0,1)");
  if (n < len)
    throw LmfError(ErrorCode::SeriesTooShort,
                   "series of length " + std::to_string(n) + " shorter than segment " + std::to_string(len));

  const auto step = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(static_cast<double>(len) * (1.0 - options.overlap))));
  const auto ulen = static_cast<std::size_t>(len);
  std::vector<double> window(ulen);
  double wsq = 0.0;
  for (std::size_t t = 0; t < ulen; ++t) {
    window[t] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(len));
    wsq += window[t] * window[t];
  }

  RealFft fft(ulen);
  std::vector<double> seg(ulen);
  std::vector<std::complex<double>> spec(ulen / 2 + 1);
  std::vector<double> acc(ulen / 2 + 1, 0.0);
  const auto signs = series.signs();
  std::int64_t n_segments = 0;
  for (std::int64_t start = 0; start + len <= n; start += step) {
    double mean = 0.0;
    if (options.subtract_segment_mean) {
      for (std::size_t t = 0; t < ulen; ++t) mean += signs[static_cast<std::size_t>(start) + t];
      mean /= static_cast<double>(len);
    }
    for (std::size_t t = 0; t < ulen; ++t) seg[t] = (signs[static_cast<std::size_t>(start) + t] - mean) * window[t];
    fft.forward(seg, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) acc[k] += std::norm(spec[k]);
    ++n_segments;
  }

  PsdCurve out;
  out.segment_length = len;
  out.n_segments = n_segments;
  out.n_eps = n;
  const double scale = 1.0 / (wsq * static_cast<double>(n_segments));
  for (std::size_t k = 1; k <= ulen / 2; ++k) {
    out.freqs.push_back(static_cast<double>(k) / static_cast<double>(len));
    out.power.push_back(acc[k] * scale);
    out.counts.push_back(1);
  }
  return out;
}

FitRange select_psd_range(const PsdCurve& binned, const PsdOptions& options) {
  const std::size_t m = binned.freqs.size();
  if (m < options.min_bins) throw LmfError(ErrorCode::NoLrcDetected, "only " + std::to_string(m) + " bins");
  if (binned.n_segments < 1) throw LmfError(ErrorCode::InvalidConfig, "spectrum lacks segment count");

  std::vector<double> high;
  for (std::size_t i = 0; i < m; ++i)
    if (binned.freqs[i] >= options.plateau_min_freq) high.push_back(binned.power[i]);
  if (high.empty()) high.push_back(binned.power.back());
  std::nth_element(high.begin(), high.begin() + static_cast<std::ptrdiff_t>(high.size() / 2), high.end());
  const double plateau = high[high.size() / 2];
  const double rel = options.noise_q / std::sqrt(static_cast<double>(binned.n_segments));
  const double threshold = plateau * (1.0 + rel);

  // mirrored ACF rule: walk up from the lowest frequency while above the plateau
  std::size_t hi = m;
  for (std::size_t i = 0; i < m; ++i) {
    if (binned.power[i] > threshold && binned.freqs[i] < options.plateau_min_freq) {
      hi = i;
    } else {
      break;
    }
  }
  if (hi == m) throw LmfError(ErrorCode::NoLrcDetected, "no low-frequency excess over the white plateau");

  std::size_t lo = hi;
  while (lo > 0 && binned.power[lo] <= binned.power[lo - 1] * (1.0 + rel)) --lo;

  const double span = std::log10(binned.freqs[hi] / binned.freqs[lo]);
  if (span + 1e-12 < options.min_decades)
    throw LmfError(ErrorCode::NoLrcDetected, "spectral power-law region spans only " + std::to_string(span) + " decades");
  return FitRange{binned.freqs[lo], binned.freqs[hi]};
}

double psd_amplitude_to_c0(double amplitude, double gamma) {
  const double beta = 1.0 - gamma;
  return amplitude * std::pow(2.0 * std::numbers::pi, beta) /
         (2.0 * std::tgamma(1.0 - gamma) * std::sin(std::numbers::pi * gamma / 2.0));
}

double c0_to_psd_amplitude(double c0, double gamma) {
  const double beta = 1.0 - gamma;
  return c0 * 2.0 * std::tgamma(1.0 - gamma) * std::sin(std::numbers::pi * gamma / 2.0) /
         std::pow(2.0 * std::numbers::pi, beta);
}

namespace {

PowerLawFit fit_binned_psd(const PsdCurve& binned, const PsdOptions& options) {
  FitRange range = select_psd_range(binned, options);
  std::vector<double> xs, ys;
  points_in_range(binned.freqs, binned.power, range, xs, ys);
  PowerLawFit fit;
  try {
    fit = fit_power_law_relative(xs, ys, options.nlls);
  } catch (const LmfError& e) {
    if (e.code() == ErrorCode::InsufficientData) throw LmfError(ErrorCode::NoLrcDetected, e.what());
    throw;
  }
  const double beta = fit.exponent;
  if (!(beta > 0.0 && beta < 1.0))
    throw LmfError(ErrorCode::NoLrcDetected, "spectral exponent " + std::to_string(beta) + " outside (0,1)");
  fit.method = FitMethod::Psd;
  fit.fit_range = range;
  fit.gamma_nlls = 1.0 - beta;
  fit.prefactor = psd_amplitude_to_c0(fit.amplitude, fit.gamma_nlls);
  return fit;
}

}  // namespace

PowerLawFit fit_psd_gamma(const PsdCurve& psd, const PsdOptions& options) {
  return fit_binned_psd(log_bin(psd, options.bins_per_decade), options);
}

PsdAnalysis analyze_psd(const SignSeries& series, const PsdOptions& options) {
  PsdAnalysis out;
  out.binned = log_bin(psd_estimate(series, options), options.bins_per_decade);
  out.fit = fit_binned_psd(out.binned, options);
  return out;
}

double prefactor_at_gamma(const PsdAnalysis& analysis, double gamma) {
  std::vector<double> xs, ys;
  points_in_range(analysis.binned.freqs, analysis.binned.power, analysis.fit.fit_range, xs, ys);
  return psd_amplitude_to_c0(relative_amplitude_fixed_exponent(xs, ys, 1.0 - gamma), gamma);
}

}  // namespace lmf
