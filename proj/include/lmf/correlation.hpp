#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmf/core_types.hpp"
#include "lmf/errors.hpp"

namespace lmf {

/// Sample ACF at lags >= 1 (raw) or log-binned. C(0) = 1 is implied and never
/// stored. For binned curves `lags` holds geometric-mean bin positions and
/// `counts` the number of raw lags merged into each point.
struct AcfCurve {
  std::vector<double> lags;
  std::vector<double> values;
  std::vector<std::int64_t> counts;
  std::int64_t n_eps = 0;
};

/// Welch spectrum on frequencies in (0, 1/2], normalized as the two-sided
/// density  S(w) = sum_tau C(tau) e^{-i w tau}  (white +-1 noise gives S = 1).
struct PsdCurve {
  std::vector<double> freqs;
  std::vector<double> power;
  std::vector<std::int64_t> counts;
  std::int64_t segment_length = 0;
  std::int64_t n_segments = 0;
  std::int64_t n_eps = 0;
};

enum class FitMethod { Acf, Psd };
std::string_view to_string(FitMethod m);

struct FitRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct PowerLawFit {
  double prefactor = 0.0;   // c0 (for the PSD route converted from the spectral amplitude)
  double gamma_nlls = 0.0;
  double gamma_unbiased = std::numeric_limits<double>::quiet_NaN();
  double prefactor_unbiased = std::numeric_limits<double>::quiet_NaN();
  FitRange fit_range;
  FitMethod method = FitMethod::Acf;
  double residual_norm = 0.0;
  std::size_t n_points = 0;
  int iterations = 0;
  // fitted curve y = amplitude * x^{-exponent} on the route's own axis
  double amplitude = 0.0;
  double exponent = 0.0;
};

enum class AcfEstimator { Raw, MeanSubtracted };

/// C(tau) = sum_{t} e(t) e(t+tau) / (N - tau), tau = 1..max_lag, via FFT.
AcfCurve sample_acf(const SignSeries& series, std::int64_t max_lag, AcfEstimator estimator = AcfEstimator::Raw);

/// Geometric bins (bins_per_decade per factor of ten); ordinate is the
/// count-weighted arithmetic mean, abscissa the geometric mean of members.
AcfCurve log_bin(const AcfCurve& acf, int bins_per_decade);
PsdCurve log_bin(const PsdCurve& psd, int bins_per_decade);

enum class RangeRule {
  Plateau,     // window [kappa / C_plateau, 10^span_decades * that], trimmed at the noise floor
  NoiseFloor,  // tau+ at the q/sqrt(N) crossing, tau- by the monotone-decay walk
};

struct RangeOptions {
  RangeRule rule = RangeRule::Plateau;
  double noise_q = 2.0;        // floor q / sqrt(N * bin_count) (NoiseFloor: q / sqrt(N))
  double cap_fraction = 0.1;   // upper lag cap N * cap_fraction
  double min_decades = 1.0;
  std::size_t min_bins = 10;
  // Plateau rule
  double plateau_max_lag = 20.0;  // C_plateau averages bins with lag <= this
  double plateau_scale = 0.5;     // kappa
  double span_decades = 1.0;

  /// NoiseFloor rule with q = 2.
  static RangeOptions noise_floor() {
    RangeOptions o;
    o.rule = RangeRule::NoiseFloor;
    return o;
  }
};

/// Lag window on which the binned ACF is a clean positive decay.
/// Throws LmfError(NoPowerLawRegion).
FitRange select_fit_range(const AcfCurve& binned, const RangeOptions& options = {});

struct NllsOptions {
  int max_iterations = 200;
  double relative_step_tol = 1e-9;
  std::size_t min_points = 5;
};

/// Minimizes sum_i [(y_i - A x_i^{-e}) / (A x_i^{-e})]^2 over (A > 0, e).
/// Returns amplitude/exponent/residual/iterations filled in.
PowerLawFit fit_power_law_relative(std::span<const double> x, std::span<const double> y,
                                   const NllsOptions& options = {});

/// Best relative-LS amplitude when the exponent is held fixed (closed form).
double relative_amplitude_fixed_exponent(std::span<const double> x, std::span<const double> y, double exponent);

/// Relative NLLS of C(tau) = C0 tau^{-gamma} on the binned points within range.
PowerLawFit fit_relative_nlls(const AcfCurve& binned, const FitRange& range, const NllsOptions& options = {});

/// Points of a curve inside a range (inclusive, with a small relative slack).
void points_in_range(std::span<const double> x, std::span<const double> y, const FitRange& range,
                     std::vector<double>& xs, std::vector<double>& ys);

struct AcfOptions {
  int bins_per_decade = 10;
  RangeOptions range;
  NllsOptions nlls;
  AcfEstimator estimator = AcfEstimator::Raw;
};

struct AcfAnalysis {
  AcfCurve binned;
  PowerLawFit fit;
};

/// sample_acf (up to the lag cap) -> log_bin -> select_fit_range -> fit_relative_nlls.
AcfAnalysis analyze_acf(const SignSeries& series, const AcfOptions& options = {});

/// C0 refit on the chosen window with gamma held fixed.
double prefactor_at_gamma(const AcfAnalysis& analysis, double gamma);

// ---- spectral route ----

struct PsdOptions {
  std::int64_t segment_length = 1 << 14;
  double overlap = 0.5;
  int bins_per_decade = 10;
  double noise_q = 2.0;            // relative noise q / sqrt(n_segments)
  double plateau_min_freq = 0.1;   // white plateau estimated above this frequency
  double min_decades = 1.0;
  std::size_t min_bins = 10;
  bool subtract_segment_mean = true;
  NllsOptions nlls;
};

/// Hann-tapered Welch periodogram. Throws LmfError(SeriesTooShort).
PsdCurve psd_estimate(const SignSeries& series, const PsdOptions& options = {});

/// Low-frequency window where the binned spectrum rises above the white
/// plateau and is non-increasing in f. Throws LmfError(NoLrcDetected).
FitRange select_psd_range(const PsdCurve& binned, const PsdOptions& options = {});

/// S(f) = A f^{-beta}  ->  gamma = 1 - beta,
/// c0 = A (2 pi)^beta / (2 Gamma(1-gamma) sin(pi gamma / 2)).
PowerLawFit fit_psd_gamma(const PsdCurve& psd, const PsdOptions& options = {});

double psd_amplitude_to_c0(double amplitude, double gamma);
double c0_to_psd_amplitude(double c0, double gamma);

struct PsdAnalysis {
  PsdCurve binned;
  PowerLawFit fit;
};

PsdAnalysis analyze_psd(const SignSeries& series, const PsdOptions& options = {});

/// c0 from the spectral amplitude refit on the chosen window with beta = 1 - gamma.
double prefactor_at_gamma(const PsdAnalysis& analysis, double gamma);

}  // namespace lmf
