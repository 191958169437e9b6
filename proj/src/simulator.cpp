#include "lmf/simulator.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "lmf/errors.hpp"

namespace lmf {
namespace {

// Vose alias table for O(1) weighted trader selection.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& p) : prob_(p.size()), alias_(p.size()) {
    const std::size_t n = p.size();
    std::vector<double> scaled(n);
    std::vector<std::size_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      scaled[i] = p[i] * static_cast<double>(n);
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      const std::size_t s = small.back();
      small.pop_back();
      const std::size_t l = large.back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (auto i : large) prob_[i] = 1.0;
    for (auto i : small) prob_[i] = 1.0;
  }

  std::size_t operator()(Rng& rng) const {
    const double u = uniform01(rng) * static_cast<double>(prob_.size());
    const auto i = std::min(static_cast<std::size_t>(u), prob_.size() - 1);
    return (u - static_cast<double>(i)) < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::size_t> alias_;
};

struct Emit {
  std::int64_t step;  // post burn-in index
  TraderId trader;    // STs are 0..n_st-1, RTs follow
  int sign;
};

// Runs the LMF dynamics and calls sink(Emit) for every recorded step.
template <class Sink>
SimTruth run_engine(const SimConfig& config, Sink&& sink) {
  validate(config);
  Rng rng(config.seed);
  const auto lambdas = normalized_intensities(config, rng);
  const MetaorderLengthSampler lengths(config.alpha);

  const std::size_t n_st = static_cast<std::size_t>(config.n_st);
  const bool homogeneous = config.intensity.kind == IntensityMode::Kind::Homogeneous;
  std::optional<AliasTable> alias;
  if (!homogeneous) alias.emplace(lambdas);

  std::vector<std::int64_t> remaining(n_st);
  std::vector<std::int8_t> current_sign(n_st);
  std::vector<bool> fresh(n_st, true);
  for (std::size_t i = 0; i < n_st; ++i) {
    remaining[i] = lengths(rng);
    current_sign[i] = static_cast<std::int8_t>(random_sign(rng));
  }

  SimTruth truth;
  truth.alpha = config.alpha;
  truth.n_st = config.n_st;
  truth.intensities = lambdas;
  truth.rt_fraction = config.rt_fraction;
  if (config.log_metaorders) truth.metaorders.resize(n_st);

  const std::int64_t burn_in = config.effective_burn_in();
  const std::int64_t total = burn_in + config.n_steps;
  std::int64_t rt_counter = 0;
  const double n_st_d = static_cast<double>(n_st);

  for (std::int64_t t = 0; t < total; ++t) {
    const bool recorded = t >= burn_in;
    if (config.rt_fraction > 0.0 && uniform01(rng) < config.rt_fraction) {
      const int sign = random_sign(rng);
      const auto rt = static_cast<TraderId>(n_st + static_cast<std::size_t>(rt_counter % config.n_rt));
      ++rt_counter;
      if (recorded) sink(Emit{t - burn_in, rt, sign});
      continue;
    }
    std::size_t i;
    if (homogeneous) {
      i = std::min(static_cast<std::size_t>(uniform01(rng) * n_st_d), n_st - 1);
    } else {
      i = (*alias)(rng);
    }
    const int sign = current_sign[i];
    if (recorded) {
      if (config.log_metaorders) {
        auto& log = truth.metaorders[i];
        if (fresh[i]) log.push_back(Metaorder{0, static_cast<std::int8_t>(sign)});
        ++log.back().length;
      }
      fresh[i] = false;
      sink(Emit{t - burn_in, static_cast<TraderId>(i), sign});
    }
    if (--remaining[i] == 0) {
      remaining[i] = lengths(rng);
      current_sign[i] = static_cast<std::int8_t>(random_sign(rng));
      fresh[i] = true;
    }
  }
  return truth;
}

}  // namespace

IntensityMode parse_intensity_mode(const std::string& text) {
  if (text == "homogeneous") return IntensityMode::homogeneous();
  auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (kind == "pareto") return IntensityMode::pareto(arg.empty() ? 1.5 : std::stod(arg));
    if (kind == "explicit") {
      std::vector<double> w;
      std::stringstream ss(arg);
      std::string item;
      while (std::getline(ss, item, ';')) w.push_back(std::stod(item));
      return IntensityMode::explicit_weights(std::move(w));
    }
  } catch (const std::logic_error&) {
  }
  throw LmfError(ErrorCode::InvalidConfig, "unknown intensity mode '" + text + "'");
}

std::string to_string(const IntensityMode& mode) {
  switch (mode.kind) {
    case IntensityMode::Kind::Homogeneous: return "homogeneous";
    case IntensityMode::Kind::Pareto: {
      std::ostringstream os;
      os << "pareto:" << mode.pareto_shape;
      return os.str();
    }
    case IntensityMode::Kind::Explicit: {
      std::ostringstream os;
      os << "explicit:";
      for (std::size_t i = 0; i < mode.weights.size(); ++i) os << (i ? ";" : "") << mode.weights[i];
      return os.str();
    }
  }
  return "homogeneous";
}

void validate(const SimConfig& c) {
  if (!(c.alpha > 1.0)) throw LmfError(ErrorCode::InvalidExponent, "alpha must be > 1");
  if (c.n_st < 1) throw LmfError(ErrorCode::InvalidConfig, "n_st must be >= 1");
  if (!(c.rt_fraction >= 0.0 && c.rt_fraction <= 1.0))
    throw LmfError(ErrorCode::InvalidConfig, "rt_fraction must lie in [0,1]");
  if (c.rt_fraction > 0.0 && c.n_rt < 1) throw LmfError(ErrorCode::InvalidConfig, "n_rt must be >= 1");
  if (c.n_steps < 1) throw LmfError(ErrorCode::InvalidConfig, "n_steps must be >= 1");
  if (c.effective_burn_in() < 0) throw LmfError(ErrorCode::InvalidConfig, "burn_in must be >= 0");
  if (c.steps_per_day < 0) throw LmfError(ErrorCode::InvalidConfig, "steps_per_day must be >= 0");
  if (c.intensity.kind == IntensityMode::Kind::Pareto && !(c.intensity.pareto_shape > 0.0))
    throw LmfError(ErrorCode::InvalidConfig, "pareto shape must be > 0");
  if (c.intensity.kind == IntensityMode::Kind::Explicit) {
    if (c.intensity.weights.size() != static_cast<std::size_t>(c.n_st))
      throw LmfError(ErrorCode::InvalidConfig, "explicit weights must have n_st entries");
    for (double w : c.intensity.weights)
      if (!(w > 0.0) || !std::isfinite(w)) throw LmfError(ErrorCode::InvalidConfig, "weights must be positive");
  }
}

std::vector<double> normalized_intensities(const SimConfig& c, Rng& rng) {
  const auto n = static_cast<std::size_t>(c.n_st);
  std::vector<double> w;
  switch (c.intensity.kind) {
    case IntensityMode::Kind::Homogeneous:
      return std::vector<double>(n, 1.0 / static_cast<double>(n));
    case IntensityMode::Kind::Pareto:
      w.resize(n);
      for (auto& x : w) x = std::pow(uniform01_open_low(rng), -1.0 / c.intensity.pareto_shape);
      break;
    case IntensityMode::Kind::Explicit:
      w = c.intensity.weights;
      break;
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

MetaorderLengthSampler::MetaorderLengthSampler(double alpha) : alpha_(alpha) {
  if (!(alpha > 1.0)) throw LmfError(ErrorCode::InvalidExponent, "alpha must be > 1");
  law_ = cached_power_law(alpha + 1.0, 1);
}

std::int64_t sample_metaorder_length(double alpha, Rng& rng) {
  return MetaorderLengthSampler(alpha)(rng);
}

MarketDatapoint simulate(const SimConfig& config) {
  validate(config);
  DatapointBuilder builder(config.label);
  for (int i = 0; i < config.n_st; ++i) builder.trader("ST" + std::to_string(i));
  if (config.rt_fraction > 0.0)
    for (int j = 0; j < config.n_rt; ++j) builder.trader("RT" + std::to_string(j));
  builder.reserve(static_cast<std::size_t>(config.n_steps));

  auto truth = run_engine(config, [&](const Emit& e) {
    const std::int32_t day =
        config.steps_per_day > 0 ? static_cast<std::int32_t>(e.step / config.steps_per_day) : kNoDay;
    builder.add(e.step, e.trader, e.sign, day);
  });
  auto dp = std::move(builder).finish();
  dp.truth = std::move(truth);
  return dp;
}

SignSeries simulate_signs(const SimConfig& config) {
  SimConfig quiet = config;
  quiet.log_metaorders = false;
  std::vector<std::int8_t> signs;
  signs.reserve(static_cast<std::size_t>(config.n_steps));
  run_engine(quiet, [&](const Emit& e) { signs.push_back(static_cast<std::int8_t>(e.sign)); });
  return SignSeries(std::move(signs));
}

double theoretical_prefactor(double alpha, double n_st) {
  if (!(alpha > 1.0 && alpha < 2.0))
    throw LmfError(ErrorCode::OutsideLmfRegime, "prefactor formula needs alpha in (1,2)");
  if (!(n_st >= 1.0)) throw LmfError(ErrorCode::InvalidConfig, "n_st must be >= 1");
  return std::pow(n_st, alpha - 2.0) / alpha;
}

}  // namespace lmf
