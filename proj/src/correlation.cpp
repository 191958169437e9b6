#include "lmf/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lmf/fft.hpp"

namespace lmf {

std::string_view to_string(FitMethod m) { return m == FitMethod::Acf ? "acf" : "psd"; }

AcfCurve sample_acf(const SignSeries& series, std::int64_t max_lag, AcfEstimator estimator) {
  const auto n = static_cast<std::int64_t>(series.size());
  if (max_lag < 1 || max_lag >= n)
    throw LmfError(ErrorCode::LagOutOfRange,
                   "max_lag " + std::to_string(max_lag) + " outside [1, " + std::to_string(n - 1) + "]");
  std::vector<double> x(series.signs().begin(), series.signs().end());
  const bool raw = estimator == AcfEstimator::Raw;
  if (!raw) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    for (auto& v : x) v -= mean;
  }
  auto sums = lagged_product_sums(x, static_cast<std::size_t>(max_lag));

  AcfCurve out;
  out.n_eps = n;
  out.lags.resize(static_cast<std::size_t>(max_lag));
  out.values.resize(out.lags.size());
  out.counts.assign(out.lags.size(), 1);
  for (std::int64_t tau = 1; tau <= max_lag; ++tau) {
    // products of +-1 signs sum to an integer; rounding removes FFT noise
    const double s = raw ? std::nearbyint(sums[static_cast<std::size_t>(tau)]) : sums[static_cast<std::size_t>(tau)];
    out.lags[static_cast<std::size_t>(tau - 1)] = static_cast<double>(tau);
    out.values[static_cast<std::size_t>(tau - 1)] = s / static_cast<double>(n - tau);
  }
  return out;
}

namespace {

struct Binned {
  std::vector<double> x, y;
  std::vector<std::int64_t> counts;
};

Binned log_bin_xy(std::span<const double> x, std::span<const double> y, std::span<const std::int64_t> counts,
                  int bins_per_decade) {
  if (bins_per_decade < 1) throw LmfError(ErrorCode::InvalidConfig, "bins_per_decade must be >= 1");
  Binned out;
  const double b = static_cast<double>(bins_per_decade);
  std::size_t i = 0;
  while (i < x.size()) {
    const auto bin = static_cast<std::int64_t>(std::floor(b * std::log10(x[i]) + 1e-9));
    double wsum = 0.0, ysum = 0.0, lsum = 0.0;
    std::int64_t csum = 0;
    std::size_t j = i;
    for (; j < x.size(); ++j) {
      if (static_cast<std::int64_t>(std::floor(b * std::log10(x[j]) + 1e-9)) != bin) break;
      const double w = static_cast<double>(counts.empty() ? 1 : counts[j]);
      wsum += w;
      ysum += w * y[j];
      lsum += w * std::log(x[j]);
      csum += counts.empty() ? 1 : counts[j];
    }
    out.x.push_back(j == i + 1 ? x[i] : std::exp(lsum / wsum));
    out.y.push_back(j == i + 1 ? y[i] : ysum / wsum);
    out.counts.push_back(csum);
    i = j;
  }
  return out;
}

}  // namespace

AcfCurve log_bin(const AcfCurve& acf, int bins_per_decade) {
  auto b = log_bin_xy(acf.lags, acf.values, acf.counts, bins_per_decade);
  AcfCurve out;
  out.lags = std::move(b.x);
  out.values = std::move(b.y);
  out.counts = std::move(b.counts);
  out.n_eps = acf.n_eps;
  return out;
}

PsdCurve log_bin(const PsdCurve& psd, int bins_per_decade) {
  auto b = log_bin_xy(psd.freqs, psd.power, psd.counts, bins_per_decade);
  PsdCurve out = psd;
  out.freqs = std::move(b.x);
  out.power = std::move(b.y);
  out.counts = std::move(b.counts);
  return out;
}

namespace {

FitRange noise_floor_range(const AcfCurve& binned, const RangeOptions& options) {
  const std::size_t m = binned.lags.size();
  const double n = static_cast<double>(binned.n_eps);
  const double floor = options.noise_q / std::sqrt(n);
  const double cap = options.cap_fraction * n;

  // upper end: last bin of the leading stretch that stays above the noise floor
  std::size_t hi = m;
  for (std::size_t i = 0; i < m; ++i) {
    if (binned.values[i] > floor && binned.lags[i] <= cap) {
      hi = i;
    } else {
      break;
    }
  }
  if (hi == m) throw LmfError(ErrorCode::NoPowerLawRegion, "ACF never exceeds the noise floor");

  // lower end: extend left while positive and non-increasing within one floor
  std::size_t lo = hi;
  while (lo > 0 && binned.values[lo - 1] > 0.0 && binned.values[lo] <= binned.values[lo - 1] + floor) --lo;

  const double span = std::log10(binned.lags[hi] / binned.lags[lo]);
  if (span + 1e-12 < options.min_decades)
    throw LmfError(ErrorCode::NoPowerLawRegion, "decay region spans only " + std::to_string(span) + " decades");
  return FitRange{binned.lags[lo], binned.lags[hi]};
}

FitRange plateau_range(const AcfCurve& binned, const RangeOptions& options) {
  const std::size_t m = binned.lags.size();
  const double n = static_cast<double>(binned.n_eps);
  const double cap = options.cap_fraction * n;
  auto floor_at = [&](std::size_t i) {
    const double c = binned.counts.empty() ? 1.0 : static_cast<double>(std::max<std::int64_t>(1, binned.counts[i]));
    return options.noise_q / std::sqrt(n * c);
  };

  double wsum = 0.0, vsum = 0.0;
  std::size_t last_plateau = 0;
  for (std::size_t i = 0; i < m && binned.lags[i] <= options.plateau_max_lag * (1.0 + 1e-12); ++i) {
    const double w = binned.counts.empty() ? 1.0 : static_cast<double>(binned.counts[i]);
    wsum += w;
    vsum += w * binned.values[i];
    last_plateau = i;
  }
  if (wsum == 0.0) throw LmfError(ErrorCode::NoPowerLawRegion, "no bins at short lags");
  const double plateau = vsum / wsum;
  if (!(plateau > options.noise_q / std::sqrt(n * wsum)))
    throw LmfError(ErrorCode::NoPowerLawRegion, "short-lag correlation indistinguishable from noise");

  const double tau_lo = std::max(options.plateau_scale / plateau, binned.lags[last_plateau]);

  std::size_t lo = 0;
  while (lo < m && binned.lags[lo] < tau_lo * (1.0 - 1e-12)) ++lo;
  if (lo == m) throw LmfError(ErrorCode::NoPowerLawRegion, "decay starts beyond the largest lag");
  const double step = lo + 1 < m ? std::log10(binned.lags[lo + 1] / binned.lags[lo]) : 0.0;
  const double tau_hi = std::min(binned.lags[lo] * std::pow(10.0, options.span_decades + 0.5 * step), cap);
  std::size_t hi = lo;
  for (std::size_t i = lo; i < m && binned.lags[i] <= tau_hi * (1.0 + 1e-12); ++i) {
    if (!(binned.values[i] > floor_at(i))) break;
    hi = i;
  }
  if (!(binned.values[lo] > floor_at(lo)))
    throw LmfError(ErrorCode::NoPowerLawRegion, "ACF below the noise floor at the window start");

  const double span = std::log10(binned.lags[hi] / binned.lags[lo]);
  if (span + 0.5 * step + 0.01 < options.min_decades)
    throw LmfError(ErrorCode::NoPowerLawRegion, "decay region spans only " + std::to_string(span) + " decades");
  return FitRange{binned.lags[lo], binned.lags[hi]};
}

}  // namespace

FitRange select_fit_range(const AcfCurve& binned, const RangeOptions& options) {
  const std::size_t m = binned.lags.size();
  if (m < options.min_bins)
    throw LmfError(ErrorCode::NoPowerLawRegion, "only " + std::to_string(m) + " bins");
  if (binned.n_eps <= 0) throw LmfError(ErrorCode::InvalidConfig, "curve lacks n_eps");
  if (!(options.noise_q > 0.0) || !(options.cap_fraction > 0.0) || !(options.plateau_scale > 0.0) ||
      !(options.span_decades >= options.min_decades))
    throw LmfError(ErrorCode::InvalidConfig, "bad range options");
  return options.rule == RangeRule::Plateau ? plateau_range(binned, options) : noise_floor_range(binned, options);
}

void points_in_range(std::span<const double> x, std::span<const double> y, const FitRange& range,
                     std::vector<double>& xs, std::vector<double>& ys) {
  xs.clear();
  ys.clear();
  const double lo = range.lo * (1.0 - 1e-12);
  const double hi = range.hi * (1.0 + 1e-12);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= lo && x[i] <= hi) {
      xs.push_back(x[i]);
      ys.push_back(y[i]);
    }
  }
}

PowerLawFit fit_power_law_relative(std::span<const double> x, std::span<const double> y, const NllsOptions& options) {
  const std::size_t m = x.size();
  if (m < options.min_points || m < 2)
    throw LmfError(ErrorCode::InsufficientData, "need at least " + std::to_string(options.min_points) + " points");
  for (std::size_t i = 0; i < m; ++i) {
    if (!(y[i] > 0.0)) throw LmfError(ErrorCode::NonPositiveValue, "non-positive value at x=" + std::to_string(x[i]));
    if (!(x[i] > 0.0)) throw LmfError(ErrorCode::NonPositiveValue, "non-positive abscissa");
  }
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }

  // log-log OLS start
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw LmfError(ErrorCode::InsufficientData, "all abscissae equal");
  double e = -sxy / sxx;
  double log_a = my + e * mx;

  // r_i = y_i x_i^e / A - 1 ; dr/dlogA = -(r+1), dr/de = (r+1) ln x
  auto cost = [&](double la, double ex) {
    double c = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = std::exp(ly[i] + ex * lx[i] - la) - 1.0;
      c += r * r;
    }
    return c;
  };

  double lambda = 1e-3;
  double current = cost(log_a, e);
  int it = 0;
  bool converged = false;
  for (; it < options.max_iterations; ++it) {
    double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, g0 = 0.0, g1 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double q = std::exp(ly[i] + e * lx[i] - log_a);
      const double r = q - 1.0;
      const double j0 = -q;
      const double j1 = q * lx[i];
      jtj00 += j0 * j0;
      jtj01 += j0 * j1;
      jtj11 += j1 * j1;
      g0 += j0 * r;
      g1 += j1 * r;
    }
    bool accepted = false;
    double d0 = 0.0, d1 = 0.0;
    for (int tries = 0; tries < 60; ++tries) {
      const double a00 = jtj00 * (1.0 + lambda);
      const double a11 = jtj11 * (1.0 + lambda);
      const double det = a00 * a11 - jtj01 * jtj01;
      if (!(std::abs(det) > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      d0 = -(a11 * g0 - jtj01 * g1) / det;
      d1 = -(a00 * g1 - jtj01 * g0) / det;
      const double trial = cost(log_a + d0, e + d1);
      if (std::isfinite(trial) && trial <= current) {
        log_a += d0;
        e += d1;
        current = trial;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      // no downhill step at any damping: stationary to machine precision
      converged = true;
      ++it;
      break;
    }
    const double tol = options.relative_step_tol;
    if (std::abs(d0) <= tol * std::max(1.0, std::abs(log_a)) && std::abs(d1) <= tol * std::max(1.0, std::abs(e))) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) throw LmfError(ErrorCode::FitDiverged, "relative NLLS did not converge");
  if (!std::isfinite(log_a) || !std::isfinite(e)) throw LmfError(ErrorCode::FitDiverged, "non-finite parameters");

  PowerLawFit fit;
  fit.amplitude = std::exp(log_a);
  fit.exponent = e;
  fit.residual_norm = std::sqrt(current);
  fit.n_points = m;
  fit.iterations = it;
  fit.fit_range = FitRange{*std::min_element(x.begin(), x.end()), *std::max_element(x.begin(), x.end())};
  return fit;
}

double relative_amplitude_fixed_exponent(std::span<const double> x, std::span<const double> y, double exponent) {
  // minimize sum (z_i / A - 1)^2 with z_i = y_i x_i^e  ->  A = sum z^2 / sum z
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = y[i] * std::pow(x[i], exponent);
    s1 += z;
    s2 += z * z;
  }
  if (!(s1 > 0.0)) throw LmfError(ErrorCode::NonPositiveValue, "amplitude refit on non-positive data");
  return s2 / s1;
}

PowerLawFit fit_relative_nlls(const AcfCurve& binned, const FitRange& range, const NllsOptions& options) {
  std::vector<double> xs, ys;
  points_in_range(binned.lags, binned.values, range, xs, ys);
  auto fit = fit_power_law_relative(xs, ys, options);
  fit.method = FitMethod::Acf;
  fit.prefactor = fit.amplitude;
  fit.gamma_nlls = fit.exponent;
  fit.fit_range = range;
  return fit;
}

AcfAnalysis analyze_acf(const SignSeries& series, const AcfOptions& options) {
  const auto n = static_cast<std::int64_t>(series.size());
  const auto cap = static_cast<std::int64_t>(std::floor(options.range.cap_fraction * static_cast<double>(n)));
  const std::int64_t max_lag = std::clamp<std::int64_t>(cap, 1, n - 1);
  if (n < 2) throw LmfError(ErrorCode::NoPowerLawRegion, "series too short for an ACF");
  AcfAnalysis out;
  out.binned = log_bin(sample_acf(series, max_lag, options.estimator), options.bins_per_decade);
  const auto range = select_fit_range(out.binned, options.range);
  out.fit = fit_relative_nlls(out.binned, range, options.nlls);
  return out;
}

double prefactor_at_gamma(const AcfAnalysis& analysis, double gamma) {
  std::vector<double> xs, ys;
  points_in_range(analysis.binned.lags, analysis.binned.values, analysis.fit.fit_range, xs, ys);
  return relative_amplitude_fixed_exponent(xs, ys, gamma);
}

}  // namespace lmf
