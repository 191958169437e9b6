#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "lmf/rng.hpp"

namespace lmf {

/// Exact sampler for the discrete power law  P(L = k) = k^{-a} / zeta(a, l_min),
/// k >= l_min. Inverse CDF over a cached table of `table_size` values, exact
/// rejection from a floored continuous Pareto proposal beyond it.
class DiscretePowerLaw {
 public:
  DiscretePowerLaw(double pdf_exponent, std::int64_t l_min = 1, std::int64_t table_size = 1'000'000);

  std::int64_t operator()(Rng& rng) const;

  double pdf_exponent() const { return a_; }
  std::int64_t l_min() const { return l_min_; }
  double pmf(std::int64_t k) const;
  /// P(L >= k)
  double ccdf(std::int64_t k) const;

 private:
  std::int64_t sample_tail(Rng& rng) const;

  double a_;
  std::int64_t l_min_;
  double norm_;               // zeta(a, l_min)
  std::vector<double> cdf_;   // cdf_[i] = P(L <= l_min + i)
  std::int64_t tail_start_;   // first value not covered by the table
  double tail_accept_bound_;  // ((T+1)/T)^a
};

/// Shared, immutable sampler for a given (exponent, l_min), built once per
/// process. Thread-safe.
std::shared_ptr<const DiscretePowerLaw> cached_power_law(double pdf_exponent, std::int64_t l_min = 1);

}  // namespace lmf
