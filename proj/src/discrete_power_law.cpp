#include "lmf/discrete_power_law.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "lmf/special.hpp"

namespace lmf {

DiscretePowerLaw::DiscretePowerLaw(double pdf_exponent, std::int64_t l_min, std::int64_t table_size)
    : a_(pdf_exponent), l_min_(l_min) {
  if (!(a_ > 1.0)) throw std::domain_error("discrete power law needs exponent > 1");
  if (l_min_ < 1) throw std::domain_error("l_min must be >= 1");
  if (table_size < 1) throw std::domain_error("table_size must be >= 1");
  norm_ = hurwitz_zeta(a_, static_cast<double>(l_min_));

  cdf_.resize(static_cast<std::size_t>(table_size));
  long double acc = 0.0L;
  for (std::int64_t i = 0; i < table_size; ++i) {
    acc += std::pow(static_cast<long double>(l_min_ + i), -static_cast<long double>(a_));
    cdf_[static_cast<std::size_t>(i)] = static_cast<double>(acc / norm_);
  }
  tail_start_ = l_min_ + table_size;
  const double t = static_cast<double>(tail_start_);
  tail_accept_bound_ = std::pow((t + 1.0) / t, a_);
}

double DiscretePowerLaw::pmf(std::int64_t k) const {
  if (k < l_min_) return 0.0;
  return std::pow(static_cast<double>(k), -a_) / norm_;
}

double DiscretePowerLaw::ccdf(std::int64_t k) const {
  if (k <= l_min_) return 1.0;
  return hurwitz_zeta(a_, static_cast<double>(k)) / norm_;
}

std::int64_t DiscretePowerLaw::operator()(Rng& rng) const {
  const double u = uniform01(rng);
  if (u >= cdf_.back()) return sample_tail(rng);
  // most mass sits at the first few values
  const std::size_t scan = std::min<std::size_t>(cdf_.size(), 64);
  for (std::size_t i = 0; i < scan; ++i) {
    if (u < cdf_[i]) return l_min_ + static_cast<std::int64_t>(i);
  }
  auto it = std::upper_bound(cdf_.begin() + static_cast<std::ptrdiff_t>(scan), cdf_.end(), u);
  return l_min_ + static_cast<std::int64_t>(it - cdf_.begin());
}

std::int64_t DiscretePowerLaw::sample_tail(Rng& rng) const {
  // Proposal: floor(Y), Y continuous Pareto on [T, inf) with density ~ y^{-a}.
  // Target/proposal ratio at k is k^{-a} / int_k^{k+1} y^{-a} dy <= ((k+1)/k)^a.
  const double t = static_cast<double>(tail_start_);
  const double inv = -1.0 / (a_ - 1.0);
  for (;;) {
    const double y = t * std::pow(uniform01_open_low(rng), inv);
    if (y >= 9.0e18) continue;
    const double kd = std::floor(y);
    // int_k^{k+1} y^{-a} dy = k^{1-a} (1 - (1+1/k)^{1-a}) / (a-1)
    const double mass = std::pow(kd, 1.0 - a_) * -std::expm1((1.0 - a_) * std::log1p(1.0 / kd)) / (a_ - 1.0);
    const double ratio = std::pow(kd, -a_) / mass;
    if (uniform01(rng) * tail_accept_bound_ <= ratio) return static_cast<std::int64_t>(kd);
  }
}

std::shared_ptr<const DiscretePowerLaw> cached_power_law(double pdf_exponent, std::int64_t l_min) {
  static std::mutex mu;
  static std::map<std::pair<double, std::int64_t>, std::shared_ptr<const DiscretePowerLaw>> cache;
  std::lock_guard lock(mu);
  auto key = std::make_pair(pdf_exponent, l_min);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto sampler = std::make_shared<const DiscretePowerLaw>(pdf_exponent, l_min);
  cache.emplace(key, sampler);
  return sampler;
}

}  // namespace lmf
