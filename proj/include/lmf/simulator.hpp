#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lmf/core_types.hpp"
#include "lmf/discrete_power_law.hpp"
#include "lmf/rng.hpp"

namespace lmf {

struct IntensityMode {
  enum class Kind { Homogeneous, Pareto, Explicit };
  Kind kind = Kind::Homogeneous;
  double pareto_shape = 1.5;    // Pareto kind: tail index of the raw weights
  std::vector<double> weights;  // Explicit kind: unnormalized, one per ST

  static IntensityMode homogeneous() { return {}; }
  static IntensityMode pareto(double shape) { return {Kind::Pareto, shape, {}}; }
  static IntensityMode explicit_weights(std::vector<double> w) { return {Kind::Explicit, 0.0, std::move(w)}; }
};

/// Parses "homogeneous", "pareto:<shape>" or "explicit:w1;w2;...".
IntensityMode parse_intensity_mode(const std::string& text);
std::string to_string(const IntensityMode& mode);

struct SimConfig {
  std::string label = "sim";
  int n_st = 100;
  double alpha = 1.5;  // CCDF exponent; lengths have PDF ~ L^{-alpha-1}
  IntensityMode intensity;
  double rt_fraction = 0.0;
  int n_rt = 100;
  std::int64_t n_steps = 1'000'000;
  std::optional<std::int64_t> burn_in;  // default 10 * n_st
  std::uint64_t seed = 1;
  std::int64_t steps_per_day = 0;       // 0: no day index on events
  bool log_metaorders = true;

  std::int64_t effective_burn_in() const { return burn_in.value_or(10 * static_cast<std::int64_t>(n_st)); }
};

/// Throws LmfError(InvalidExponent / InvalidConfig).
void validate(const SimConfig& config);

/// Normalized intensities lambda^(i). Pareto weights are drawn from `rng`.
std::vector<double> normalized_intensities(const SimConfig& config, Rng& rng);

/// Metaorder length L >= 1 with P(L) = L^{-(alpha+1)} / zeta(alpha+1).
class MetaorderLengthSampler {
 public:
  explicit MetaorderLengthSampler(double alpha);
  std::int64_t operator()(Rng& rng) const { return (*law_)(rng); }
  double alpha() const { return alpha_; }
  double pmf(std::int64_t length) const { return law_->pmf(length); }

 private:
  double alpha_;
  std::shared_ptr<const DiscretePowerLaw> law_;
};

/// One draw; the sampler table is cached per alpha.
std::int64_t sample_metaorder_length(double alpha, Rng& rng);

/// Full datapoint with trader attribution and ground truth.
MarketDatapoint simulate(const SimConfig& config);

/// Signs only; same stream as simulate() for the same config.
SignSeries simulate_signs(const SimConfig& config);

/// Homogeneous-LMF ACF prefactor N_ST^{alpha-2} / alpha, alpha in (1,2).
double theoretical_prefactor(double alpha, double n_st);

}  // namespace lmf
