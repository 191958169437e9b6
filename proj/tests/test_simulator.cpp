#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "lmf/correlation.hpp"
#include "lmf/simulator.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lmf;

TEST_CASE("sample_metaorder_length: mass at one is 1/zeta(alpha+1)") {
  Rng rng(11);
  const int draws = 1'000'000;
  int ones = 0;
  for (int i = 0; i < draws; ++i) ones += sample_metaorder_length(1.5, rng) == 1;
  const double expected = 1.0 / boost::math::zeta(2.5);
  CHECK(expected == doctest::Approx(0.7454).epsilon(1e-4));
  CHECK(std::abs(static_cast<double>(ones) / draws - expected) <= 0.002);
}

TEST_CASE("sample_metaorder_length rejects alpha <= 1") {
  Rng rng(1);
  CHECK_LMF_CODE(sample_metaorder_length(0.5, rng), ErrorCode::InvalidExponent);
  CHECK_LMF_CODE(sample_metaorder_length(1.0, rng), ErrorCode::InvalidExponent);
}

TEST_CASE("sample_metaorder_length: CCDF slope over [10, 1000]") {
  Rng rng(12);
  const int draws = 1'000'000;
  std::vector<std::int64_t> v(draws);
  for (auto& x : v) x = sample_metaorder_length(1.5, rng);
  std::vector<double> lx, ly;
  for (double l = 10; l <= 1000; l *= std::pow(10.0, 0.1)) {
    const auto k = static_cast<std::int64_t>(std::lround(l));
    const auto ge = std::count_if(v.begin(), v.end(), [&](auto x) { return x >= k; });
    lx.push_back(std::log10(static_cast<double>(k)));
    ly.push_back(std::log10(static_cast<double>(ge) / draws));
  }
  CHECK(oracle::slope(lx, ly) == doctest::Approx(-1.5).epsilon(0.05 / 1.5));
}

TEST_CASE("single splitting trader: runs are the metaorders") {
  SimConfig c;
  c.n_st = 1;
  c.alpha = 1.4;
  c.n_steps = 20'000;
  c.seed = 3;
  const auto dp = simulate(c);
  REQUIRE(dp.truth);
  REQUIRE(dp.events.size() == 20'000u);

  std::vector<std::int64_t> expected;
  int last = 0;
  for (const auto& m : dp.truth->metaorders[0]) {
    if (m.sign == last) {
      expected.back() += m.length;
    } else {
      expected.push_back(m.length);
      last = m.sign;
    }
  }
  std::vector<std::int64_t> runs;
  for (std::size_t i = 0; i < dp.events.size(); ++i) {
    if (i == 0 || dp.events[i].sign != dp.events[i - 1].sign) {
      runs.push_back(1);
    } else {
      ++runs.back();
    }
  }
  CHECK(runs == expected);
  std::int64_t total = 0;
  for (const auto& m : dp.truth->metaorders[0]) total += m.length;
  CHECK(total == 20'000);
}

TEST_CASE("rt_fraction = 1 gives an uncorrelated sequence") {
  SimConfig c;
  c.rt_fraction = 1.0;
  c.n_steps = 200'000;
  c.seed = 4;
  const auto s = simulate_signs(c);
  const auto acf = sample_acf(s, 1000);
  const double band = 3.0 / std::sqrt(static_cast<double>(s.size()));
  int outside = 0;
  for (double v : acf.values) outside += std::abs(v) > band;
  CHECK(outside <= 10);
}

TEST_CASE("simulation is deterministic and matches simulate_signs") {
  SimConfig c;
  c.n_steps = 50'000;
  c.seed = 99;
  c.rt_fraction = 0.3;
  c.n_rt = 7;
  c.steps_per_day = 1000;
  const auto a = simulate(c);
  const auto b = simulate(c);
  CHECK(a.events == b.events);
  const auto s = simulate_signs(c);
  REQUIRE(s.size() == a.events.size());
  bool same = true;
  for (std::size_t i = 0; i < s.size(); ++i) same = same && s[i] == a.events[i].sign;
  CHECK(same);
  CHECK(a.events.back().day == 49);
  CHECK(a.n_traders() == 107u);
  c.seed = 100;
  CHECK(simulate(c).events != a.events);
}

TEST_CASE("intensities are normalized") {
  Rng rng(5);
  SimConfig c;
  c.n_st = 50;
  auto h = normalized_intensities(c, rng);
  for (double x : h) CHECK(x == 1.0 / 50);
  c.intensity = IntensityMode::pareto(1.5);
  auto p = normalized_intensities(c, rng);
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
  for (double x : p) CHECK(x > 0.0);
  c.n_st = 3;
  c.intensity = IntensityMode::explicit_weights({1, 2, 5});
  auto e = normalized_intensities(c, rng);
  CHECK(e[2] == doctest::Approx(0.625));
}

TEST_CASE("intensity mode strings round trip") {
  CHECK(parse_intensity_mode("homogeneous").kind == IntensityMode::Kind::Homogeneous);
  const auto p = parse_intensity_mode("pareto:2.5");
  CHECK(p.kind == IntensityMode::Kind::Pareto);
  CHECK(p.pareto_shape == 2.5);
  const auto e = parse_intensity_mode("explicit:1;2;3");
  CHECK(e.weights == std::vector<double>{1, 2, 3});
  CHECK(parse_intensity_mode(to_string(e)).weights == e.weights);
  CHECK_LMF_CODE(parse_intensity_mode("lognormal"), ErrorCode::InvalidConfig);
}

TEST_CASE("SimConfig validation") {
  SimConfig c;
  c.alpha = 1.0;
  CHECK_LMF_CODE(validate(c), ErrorCode::InvalidExponent);
  c = {};
  c.rt_fraction = 1.2;
  CHECK_LMF_CODE(validate(c), ErrorCode::InvalidConfig);
  c = {};
  c.n_st = 0;
  CHECK_LMF_CODE(validate(c), ErrorCode::InvalidConfig);
  c = {};
  c.intensity = IntensityMode::explicit_weights({1.0, 2.0});
  CHECK_LMF_CODE(validate(c), ErrorCode::InvalidConfig);
}

TEST_CASE("theoretical_prefactor") {
  CHECK(theoretical_prefactor(1.5, 100) == doctest::Approx(std::pow(100.0, -0.5) / 1.5).epsilon(1e-15));
  CHECK(theoretical_prefactor(1.5, 100) == doctest::Approx(0.0666667).epsilon(1e-5));
  CHECK(theoretical_prefactor(1.5, 1) == doctest::Approx(1.0 / 1.5).epsilon(1e-15));
  CHECK_LMF_CODE(theoretical_prefactor(2.1, 100), ErrorCode::OutsideLmfRegime);
}
