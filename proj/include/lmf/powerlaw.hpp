#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lmf {

struct CcdfPoint {
  std::int64_t length = 0;
  double ccdf = 0.0;  // fraction of samples >= length
};

/// One point per distinct value; P_>(min) = 1 and strictly decreasing.
std::vector<CcdfPoint> empirical_ccdf(std::span<const std::int64_t> lengths);

struct ClausetOptions {
  std::size_t min_samples = 50;
  double lmin_quantile = 0.9;  // l_min candidates are distinct values up to this quantile
};

/// alpha is the CCDF exponent: the fitted PDF is ~ L^{-(alpha+1)}.
struct TailFit {
  double alpha = 0.0;
  std::int64_t l_min = 1;
  double ks_distance = 0.0;
  std::size_t n_tail = 0;
};

/// Discrete power-law MLE of the PDF exponent for the tail L >= l_min,
/// solving  -zeta'(a, l_min)/zeta(a, l_min) = mean(ln L)  exactly.
double discrete_mle_pdf_exponent(double mean_log, std::int64_t l_min);

/// Clauset-Shalizi-Newman fit: MLE per l_min candidate, keep the smallest
/// KS distance between fitted and empirical tail CCDF.
TailFit clauset_fit(std::span<const std::int64_t> lengths, const ClausetOptions& options = {});

/// KS distance over all integers >= l_min between the empirical tail CCDF
/// and the discrete power law with the given CCDF exponent.
double ks_distance(std::span<const std::int64_t> sorted_tail, std::int64_t l_min, double alpha);

/// Semi-parametric bootstrap goodness-of-fit p-value (fraction of synthetic
/// fits with KS >= observed). Expensive; off by default in the pipeline.
double clauset_gof_pvalue(std::span<const std::int64_t> lengths, const TailFit& fit, int reps,
                          std::uint64_t seed, const ClausetOptions& options = {});

}  // namespace lmf
