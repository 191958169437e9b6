#include "lmf/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "lmf/discrete_power_law.hpp"
#include "lmf/errors.hpp"
#include "lmf/rng.hpp"
#include "lmf/special.hpp"

namespace lmf {
namespace {

struct Distinct {
  std::vector<std::int64_t> values;
  std::vector<std::int64_t> at_least;   // #samples >= values[j]
  std::vector<double> log_sum_at_least; // sum of ln L over samples >= values[j]
};

Distinct tabulate(const std::vector<std::int64_t>& sorted) {
  Distinct d;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    d.values.push_back(sorted[i]);
    d.at_least.push_back(static_cast<std::int64_t>(j - i));  // count for now
    i = j;
  }
  const std::size_t m = d.values.size();
  d.log_sum_at_least.assign(m, 0.0);
  std::int64_t acc = 0;
  double lacc = 0.0;
  for (std::size_t j = m; j-- > 0;) {
    acc += d.at_least[j];
    lacc += static_cast<double>(d.at_least[j]) * std::log(static_cast<double>(d.values[j]));
    d.at_least[j] = acc;
    d.log_sum_at_least[j] = lacc;
  }
  return d;
}

double ks_on_table(const Distinct& d, std::size_t first, double a) {
  const double lmin = static_cast<double>(d.values[first]);
  const double n_tail = static_cast<double>(d.at_least[first]);
  const double norm = hurwitz_zeta(a, lmin);
  double ks = 0.0;
  for (std::size_t j = first; j < d.values.size(); ++j) {
    const double x = static_cast<double>(d.values[j]);
    // left end of the plateau: P(L >= x)
    const double emp = static_cast<double>(d.at_least[j]) / n_tail;
    const double fit = j == first ? 1.0 : hurwitz_zeta(a, x) / norm;
    ks = std::max(ks, std::abs(emp - fit));
    // right end: P(L >= x+1), empirical equals the next distinct value's share
    const double emp_next = j + 1 < d.values.size() ? static_cast<double>(d.at_least[j + 1]) / n_tail : 0.0;
    const double fit_next = hurwitz_zeta(a, x + 1.0) / norm;
    ks = std::max(ks, std::abs(emp_next - fit_next));
  }
  return ks;
}

}  // namespace

std::vector<CcdfPoint> empirical_ccdf(std::span<const std::int64_t> lengths) {
  if (lengths.empty()) throw LmfError(ErrorCode::EmptySample, "no lengths");
  std::vector<std::int64_t> sorted(lengths.begin(), lengths.end());
  std::sort(sorted.begin(), sorted.end());
  const auto d = tabulate(sorted);
  const double n = static_cast<double>(sorted.size());
  std::vector<CcdfPoint> out;
  out.reserve(d.values.size());
  for (std::size_t j = 0; j < d.values.size(); ++j)
    out.push_back({d.values[j], static_cast<double>(d.at_least[j]) / n});
  return out;
}

double discrete_mle_pdf_exponent(double mean_log, std::int64_t l_min) {
  const double q = static_cast<double>(l_min);
  if (!(mean_log > std::log(q)))
    throw LmfError(ErrorCode::DegenerateSample, "tail has no variation above l_min");
  // g(a) = E_a[ln L] - mean_log, decreasing in a
  auto g = [&](double a) {
    auto [z, dz] = hurwitz_zeta_with_derivative(a, q);
    return -dz / z - mean_log;
  };
  const double denom = mean_log - std::log(q - 0.5);
  double guess = 1.0 + 1.0 / std::max(denom, 1e-12);
  guess = std::clamp(guess, 1.0 + 1e-6, 50.0);

  double lo = guess, hi = guess;
  double glo = g(lo), ghi = glo;
  int expand = 0;
  while (glo < 0.0) {  // root lies below: move lo toward 1
    hi = lo;
    ghi = glo;
    lo = 1.0 + (lo - 1.0) * 0.5;
    glo = g(lo);
    if (++expand > 200) throw LmfError(ErrorCode::FitDiverged, "MLE bracket search failed");
  }
  while (ghi > 0.0) {
    lo = hi;
    glo = ghi;
    hi = hi * 1.5 + 0.5;
    if (hi > 200.0) throw LmfError(ErrorCode::FitDiverged, "MLE exponent diverges");
    ghi = g(hi);
  }
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  std::uintmax_t max_iter = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, max_iter);
  return 0.5 * (a + b);
}

double ks_distance(std::span<const std::int64_t> sorted_tail, std::int64_t l_min, double alpha) {
  std::vector<std::int64_t> tail;
  for (auto v : sorted_tail)
    if (v >= l_min) tail.push_back(v);
  if (tail.empty()) throw LmfError(ErrorCode::EmptySample, "empty tail");
  std::sort(tail.begin(), tail.end());
  auto d = tabulate(tail);
  if (d.values.front() != l_min) {
    // empirical CCDF is 1 on [l_min, first value]; fitted drops below 1 there
    d.values.insert(d.values.begin(), l_min);
    d.at_least.insert(d.at_least.begin(), d.at_least.front());
    d.log_sum_at_least.insert(d.log_sum_at_least.begin(), d.log_sum_at_least.front());
  }
  return ks_on_table(d, 0, alpha + 1.0);
}

TailFit clauset_fit(std::span<const std::int64_t> lengths, const ClausetOptions& options) {
  if (lengths.size() < std::max<std::size_t>(options.min_samples, 2))
    throw LmfError(ErrorCode::InsufficientData,
                   "need at least " + std::to_string(options.min_samples) + " lengths, got " +
                       std::to_string(lengths.size()));
  std::vector<std::int64_t> sorted(lengths.begin(), lengths.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 1) throw LmfError(ErrorCode::InvalidConfig, "lengths must be >= 1");
  if (sorted.front() == sorted.back()) throw LmfError(ErrorCode::DegenerateSample, "all lengths equal");

  const auto d = tabulate(sorted);
  const auto q_index = static_cast<std::size_t>(std::floor(options.lmin_quantile * static_cast<double>(sorted.size() - 1)));
  const std::int64_t lmin_cap = sorted[q_index];

  TailFit best;
  best.ks_distance = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 1 < d.values.size() && d.values[j] <= lmin_cap; ++j) {
    const auto n_tail = static_cast<std::size_t>(d.at_least[j]);
    if (n_tail < 2) break;
    const double mean_log = d.log_sum_at_least[j] / static_cast<double>(n_tail);
    double a;
    try {
      a = discrete_mle_pdf_exponent(mean_log, d.values[j]);
    } catch (const LmfError&) {
      continue;
    }
    const double ks = ks_on_table(d, j, a);
    if (ks < best.ks_distance) {
      best = TailFit{a - 1.0, d.values[j], ks, n_tail};
    }
  }
  if (!std::isfinite(best.ks_distance))
    throw LmfError(ErrorCode::DegenerateSample, "no admissible l_min candidate");
  return best;
}

double clauset_gof_pvalue(std::span<const std::int64_t> lengths, const TailFit& fit, int reps,
                          std::uint64_t seed, const ClausetOptions& options) {
  if (reps < 1) throw LmfError(ErrorCode::InvalidConfig, "reps must be >= 1");
  std::vector<std::int64_t> body;
  for (auto v : lengths)
    if (v < fit.l_min) body.push_back(v);
  const double n = static_cast<double>(lengths.size());
  const double p_tail = static_cast<double>(lengths.size() - body.size()) / n;
  const DiscretePowerLaw law(fit.alpha + 1.0, fit.l_min, 10'000);
  Rng rng(seed);
  int exceed = 0;
  std::vector<std::int64_t> synth(lengths.size());
  for (int r = 0; r < reps; ++r) {
    for (auto& v : synth) {
      if (body.empty() || uniform01(rng) < p_tail) {
        v = law(rng);
      } else {
        v = body[std::min(body.size() - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(body.size())))];
      }
    }
    try {
      if (clauset_fit(synth, options).ks_distance >= fit.ks_distance) ++exceed;
    } catch (const LmfError&) {
      ++exceed;
    }
  }
  return static_cast<double>(exceed) / reps;
}

}  // namespace lmf
