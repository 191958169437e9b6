#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/binomial.hpp>

#include "CLI11.hpp"
#include "lmf/bias_table.hpp"
#include "lmf/clustering.hpp"
#include "lmf/correlation.hpp"
#include "lmf/discrete_power_law.hpp"
#include "lmf/errors.hpp"
#include "lmf/inference.hpp"
#include "lmf/pipeline.hpp"
#include "lmf/powerlaw.hpp"
#include "lmf/simulator.hpp"
#include "lmf/special.hpp"
#include "oracles.hpp"

using namespace lmf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  return quantile(std::move(v), 0.5);
}

struct AcfEstimate {
  bool ok = false;
  double gamma = 0.0;
  double n_st = 0.0;
  std::string error;
};

AcfEstimate acf_estimate(const SignSeries& series, const BiasTable& table) {
  AcfEstimate e;
  try {
    const auto a = analyze_acf(series);
    const auto n_eps = static_cast<std::int64_t>(series.size());
    e.gamma = debias_gamma(a.fit.gamma_nlls, n_eps, table);
    const double ratio = table.log10_c0_ratio(FitMethod::Acf, e.gamma, n_eps);
    e.n_st = n_st_lmf(prefactor_at_gamma(a, e.gamma) / std::pow(10.0, ratio), e.gamma);
    e.ok = true;
  } catch (const LmfError& err) {
    e.error = err.what();
  }
  return e;
}

Outcome gamma_closed_loop(const BiasTable& table, const IntensityMode& intensity, std::uint64_t seed0) {
  std::vector<double> xs, ys;
  std::string medians;
  bool pass = true;
  int failures = 0;
  for (double alpha : {1.2, 1.4, 1.6, 1.8}) {
    std::vector<double> g;
    for (int s = 0; s < 10; ++s) {
      SimConfig c;
      c.alpha = alpha;
      c.n_st = 100;
      c.n_steps = 1'000'000;
      c.intensity = intensity;
      c.seed = seed0 + static_cast<std::uint64_t>(100 * alpha) * 100 + s;
      c.log_metaorders = false;
      const auto e = acf_estimate(simulate_signs(c), table);
      if (!e.ok) {
        ++failures;
        continue;
      }
      g.push_back(e.gamma);
      xs.push_back(alpha - 1.0);
      ys.push_back(e.gamma);
    }
    const double m = median(g);
    if (!(std::abs(m - (alpha - 1.0)) <= 0.10)) pass = false;
    medians += fmt(" %.1f:%.3f", alpha, m);
  }
  const double slope = xs.size() >= 2 ? ols(xs, ys).slope : std::nan("");
  if (!(slope >= 0.85 && slope <= 1.15)) pass = false;
  return {pass, fmt("medians%s slope %.3f failed fits %d", medians.c_str(), slope, failures)};
}

Outcome criterion1(const BiasTable& table) { return gamma_closed_loop(table, IntensityMode::homogeneous(), 10'000); }

std::vector<AcfEstimate> n_st_grid(const BiasTable& table, const IntensityMode& intensity, int n_st,
                                   std::uint64_t seed0) {
  std::vector<AcfEstimate> out;
  for (int s = 0; s < 10; ++s) {
    SimConfig c;
    c.alpha = 1.5;
    c.n_st = n_st;
    c.n_steps = 10'000'000;
    c.intensity = intensity;
    c.seed = seed0 + 1000 * n_st + s;
    c.log_metaorders = false;
    out.push_back(acf_estimate(simulate_signs(c), table));
  }
  return out;
}

Outcome criterion2(const BiasTable& table) {
  bool pass = true;
  std::string detail;
  for (int n : {50, 100, 200}) {
    int hit = 0;
    for (const auto& e : n_st_grid(table, IntensityMode::homogeneous(), n, 20'000))
      if (e.ok && std::abs(std::log10(e.n_st / n)) <= 0.3) ++hit;
    if (hit < 8) pass = false;
    detail += fmt(" N=%d %d/10", n, hit);
  }
  return {pass, "within 0.3 decades:" + detail};
}

Outcome criterion3(const BiasTable& table) {
  int runs = 0, holds = 0;
  std::string detail;
  for (int n : {50, 100, 200}) {
    int h = 0;
    for (const auto& e : n_st_grid(table, IntensityMode::pareto(1.5), n, 30'000)) {
      ++runs;
      if (e.ok && lower_bound_check(e.n_st, n).holds) ++h;
    }
    holds += h;
    detail += fmt(" N=%d %d/10", n, h);
  }
  const bool bound = holds >= 0.95 * runs;
  const auto g = gamma_closed_loop(table, IntensityMode::pareto(1.5), 40'000);
  return {bound && g.pass, fmt("bound%s (%d/%d); gamma %s", detail.c_str(), holds, runs, g.detail.c_str())};
}

Outcome criterion4() {
  const ClusteringConfig config;
  Rng rng(4242);
  const std::int64_t traders = 10'000, n = 1000;
  std::int64_t st = 0;
  std::vector<OrderEvent> events(n);
  for (std::int64_t t = 0; t < traders; ++t) {
    for (std::int64_t i = 0; i < n; ++i) events[i] = OrderEvent{i, 0, static_cast<std::int8_t>(random_sign(rng))};
    if (binomial_test_trader(segment_metaorders(events), config).cls == TraderClass::ST) ++st;
  }
  const boost::math::binomial_distribution<double> band(static_cast<double>(traders), config.theta);
  const double lo = boost::math::quantile(band, 0.005), hi = boost::math::quantile(boost::math::complement(band, 0.005));
  const bool rate_ok = st >= lo && st <= hi;

  std::int64_t eligible = 0, classified = 0;
  for (double alpha : {1.2, 1.5, 1.8}) {
    SimConfig c;
    c.alpha = alpha;
    c.n_st = 100;
    c.n_steps = 200'000;
    c.seed = 4300 + static_cast<std::uint64_t>(alpha * 10);
    c.log_metaorders = false;
    const auto dp = simulate(c);
    for (const auto& t : cluster_traders(dp, config)) {
      if (t.label.n_orders < 500) continue;
      ++eligible;
      if (t.label.cls == TraderClass::ST) ++classified;
    }
  }
  const double freq = eligible ? static_cast<double>(classified) / eligible : 0.0;
  return {rate_ok && eligible > 0 && freq >= 0.99,
          fmt("Bernoulli ST count %lld in [%.0f, %.0f]; ST recall %lld/%lld = %.4f", static_cast<long long>(st), lo, hi,
              static_cast<long long>(classified), static_cast<long long>(eligible), freq)};
}

Outcome criterion5() {
  bool pass = true;
  std::string detail;
  std::uint64_t seed = 500;
  for (double alpha : {1.3, 1.62, 1.9}) {
    DiscretePowerLaw law(alpha + 1.0);
    Rng rng(seed++);
    std::vector<std::int64_t> v(100'000);
    for (auto& x : v) x = law(rng);
    const auto fit = clauset_fit(v);
    if (!(std::abs(fit.alpha - alpha) <= 0.05)) pass = false;
    detail += fmt(" %.2f->%.4f", alpha, fit.alpha);
  }
  return {pass, "alpha hat:" + detail};
}

Outcome criterion6() {
  Rng rng(606);
  double worst_acf = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 2 + rng() % 4095;
    std::vector<std::int8_t> s(n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = s[i] = static_cast<std::int8_t>(random_sign(rng));
    const auto fft = sample_acf(SignSeries(s), static_cast<std::int64_t>(n - 1));
    const auto naive = oracle::naive_acf(x, n - 1);
    for (std::size_t k = 0; k < naive.size(); ++k) worst_acf = std::max(worst_acf, std::abs(fft.values[k] - naive[k]));
  }
  double worst_p = 0.0;
  std::size_t cases = 0;
  auto check = [&](std::int64_t n, std::int64_t k) {
    const double exact = oracle::binomial_tail_half(n, k);
    const double got = binomial_upper_tail_half(n, k);
    const double rel = std::abs(got - exact) / std::max(exact, std::numeric_limits<double>::min());
    worst_p = std::max(worst_p, rel);
    ++cases;
  };
  for (std::int64_t n = 1; n <= 64; ++n)
    for (std::int64_t k = 0; k <= n + 1; ++k) check(n, k);
  for (int rep = 0; rep < 200; ++rep) {
    const std::int64_t n = 65 + static_cast<std::int64_t>(rng() % 2000);
    check(n, static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n + 2)));
  }
  return {worst_acf <= 1e-10 && worst_p <= 1e-12,
          fmt("max ACF diff %.3g over 1000 series; max relative p-value diff %.3g over %zu cases", worst_acf, worst_p,
              cases)};
}

Outcome criterion7() {
  double worst_c = 0.0, worst_g = 0.0;
  for (double c0 : {1e-3, 0.05, 0.7})
    for (double gamma : {0.15, 0.5, 0.9}) {
      AcfCurve curve;
      curve.n_eps = 1'000'000;
      for (int i = 0; i <= 40; ++i) {
        const double t = std::pow(10.0, i / 10.0);
        curve.lags.push_back(t);
        curve.values.push_back(c0 * std::pow(t, -gamma));
        curve.counts.push_back(1);
      }
      const auto fit = fit_relative_nlls(curve, {curve.lags.front(), curve.lags.back()});
      worst_c = std::max(worst_c, std::abs(fit.prefactor - c0) / c0);
      worst_g = std::max(worst_g, std::abs(fit.gamma_nlls - gamma));
    }
  return {worst_c <= 1e-6 && worst_g <= 1e-6,
          fmt("max relative C0 error %.3g, max gamma error %.3g over 9 cases", worst_c, worst_g)};
}

Outcome criterion8(const BiasTable& table) {
  std::vector<double> d;
  int failures = 0;
  for (int s = 0; s < 20; ++s) {
    SimConfig c;
    c.alpha = 1.5;
    c.n_steps = 1'000'000;
    c.seed = 800 + s;
    c.log_metaorders = false;
    const auto series = simulate_signs(c);
    try {
      const auto n_eps = static_cast<std::int64_t>(series.size());
      const double ga = debias_gamma(analyze_acf(series).fit.gamma_nlls, n_eps, table, FitMethod::Acf);
      const double gs = debias_gamma(analyze_psd(series).fit.gamma_nlls, n_eps, table, FitMethod::Psd);
      d.push_back(std::abs(ga - gs));
    } catch (const LmfError&) {
      ++failures;
    }
  }
  const double m = median(d);
  return {d.size() >= 10 && m <= 0.10, fmt("median |gamma_acf - gamma_psd| %.4f over %zu runs", m, d.size())};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome criterion9(const std::filesystem::path& cache_dir) {
  const auto root = std::filesystem::temp_directory_path() / "lmf_acceptance_det";
  std::filesystem::remove_all(root);
  std::string csv[2];
  for (int k = 0; k < 2; ++k) {
    PipelineConfig c;
    SimBatch batch;
    batch.alphas = {1.3, 1.6};
    batch.seeds_per_alpha = 2;
    batch.base.n_steps = 200'000;
    batch.master_seed = 99;
    c.simulation = batch;
    c.bias_cache_dir = cache_dir;
    c.output_dir = root / std::to_string(k);
    c.plots = false;
    csv[k] = slurp(run_pipeline(c).scatter_path);
  }
  std::filesystem::remove_all(root);
  return {!csv[0].empty() && csv[0] == csv[1], fmt("scatter CSV %zu bytes, identical: %s", csv[0].size(),
                                                    csv[0] == csv[1] ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::filesystem::path cache_dir = "bias_cache";
  std::set<int> only;
  app.add_option("--cache-dir", cache_dir, "Calibration table cache directory");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  BiasTable table;
  auto need_table = [&]() -> const BiasTable& {
    if (table.cells().empty()) table = load_or_build_bias_table(BiasTableConfig{}, cache_dir);
    return table;
  };

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, [&] { return criterion1(need_table()); }},
      {2, [&] { return criterion2(need_table()); }},
      {3, [&] { return criterion3(need_table()); }},
      {4, criterion4},
      {5, criterion5},
      {6, criterion6},
      {7, criterion7},
      {8, [&] { return criterion8(need_table()); }},
      {9, [&] { return criterion9(cache_dir); }},
  };

  int failed = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
