#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "lmf/pipeline.hpp"
#include "shared_table.hpp"
#include "support.hpp"

using namespace lmf;
namespace fs = std::filesystem;

namespace {

std::string cache_dir() {
  const char* dir = std::getenv("LMF_BIAS_CACHE");
  return dir ? dir : "bias_cache";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("lmf_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

PipelineConfig sim_config(const std::string& text, const fs::path& out) {
  auto kv = KvConfig::parse(text + "\nbias.cache_dir = " + cache_dir() + "\noutput_dir = " + out.string() + "\n");
  return pipeline_config_from_kv(kv);
}

ScatterRow row(const std::string& label, double alpha, double gamma) {
  ScatterRow r;
  r.label = label;
  r.n_eps = 1000;
  r.alpha = alpha;
  r.gamma_acf_unbiased = gamma;
  r.gamma_acf_nlls = r.gamma_psd_nlls = r.gamma_psd_unbiased = NAN;
  r.c0 = 0.05;
  r.n_st_lmf = 80;
  r.st_fraction = r.st_order_share = 0.5;
  r.alpha_true = r.n_st_true = NAN;
  return r;
}

}  // namespace

TEST_CASE("quantile and ols") {
  CHECK(quantile({3, 1, 2, 4}, 0.5) == 2.5);
  CHECK(quantile({1, 2, 3, 4, 5}, 0.25) == 2.0);
  CHECK(quantile({10}, 0.75) == 10.0);
  CHECK(std::isnan(quantile({}, 0.5)));
  auto r = ols({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(r.slope == doctest::Approx(2.0));
  CHECK(r.intercept == doctest::Approx(1.0));
  CHECK(std::isnan(ols({1}, {2}).slope));
}

TEST_CASE("summary excludes flagged rows and bins by alpha") {
  std::vector<ScatterRow> rows{row("a", 1.21, 0.2), row("b", 1.19, 0.3), row("c", 1.52, 0.5),
                               row("d", 1.5, 0.6), row("e", 1.5, 0.55), row("f", 1.8, 0.9)};
  rows[5].flags.push_back("NoPowerLawRegion");
  rows[0].n_st_true = 100;
  rows[1].n_st_true = 20;
  auto s = summarize_rows(rows);
  CHECK(s.n_rows == 6);
  CHECK(s.n_flagged == 1);
  REQUIRE(s.boxes.size() == 2);
  CHECK(s.boxes[0].center == doctest::Approx(1.2));
  CHECK(s.boxes[0].n == 2);
  CHECK(s.boxes[0].median == doctest::Approx(0.25));
  CHECK(s.boxes[1].n == 3);
  CHECK(s.boxes[1].median == doctest::Approx(0.55));
  CHECK(s.boxes[1].q1 == doctest::Approx(0.525));
  CHECK(s.gamma_on_alpha.n == 5);
  CHECK(s.lower_bound_rows == 2);
  CHECK(s.lower_bound_holds == 1);
  const auto json = summary_json(s);
  CHECK(json.find("\"gamma_acf_boxes\"") != std::string::npos);
}

TEST_CASE("scatter CSV round trip") {
  std::vector<ScatterRow> rows{row("x", 1.5, 0.5), row("y", NAN, 0.4)};
  rows[1].flags = {"EmptySample", "OutOfCalibration"};
  rows[1].warnings = {"Clamped"};
  rows[0].alpha_true = 1.5;
  rows[0].n_st_true = 100;
  const auto text = scatter_csv(rows);
  auto back = parse_scatter_csv(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].alpha == 1.5);
  CHECK(back[0].n_st_true == 100);
  CHECK(std::isnan(back[1].alpha));
  CHECK(back[1].flags == rows[1].flags);
  CHECK(back[1].warnings == rows[1].warnings);
  CHECK(scatter_csv(back) == text);
  CHECK_LMF_CODE(parse_scatter_csv("nope\n"), ErrorCode::ParseError);
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(NAN) == "");
}

TEST_CASE("config parsing") {
  auto c = pipeline_config_from_kv(KvConfig::parse("sim.alphas = 1.2, 1.8\nsim.seeds_per_alpha = 3\n"));
  REQUIRE(c.simulation);
  CHECK(c.simulation->alphas == std::vector<double>{1.2, 1.8});
  CHECK(expand_batch(*c.simulation).size() == 6);
  CHECK(c.ingest.min_transactions == 500'000);
  CHECK(c.ingest.trim_minutes == 10);
  CHECK(c.analysis.acf.range.rule == RangeRule::Plateau);

  auto nf = pipeline_config_from_kv(KvConfig::parse("acf.range_rule = noise_floor\n"));
  CHECK(nf.analysis.acf.range.rule == RangeRule::NoiseFloor);
  CHECK_LMF_CODE(pipeline_config_from_kv(KvConfig::parse("acf.range_rule = other\n")), ErrorCode::InvalidConfig);
  CHECK_LMF_CODE(pipeline_config_from_kv(KvConfig::parse("sim.alpha = 1.5\n")), ErrorCode::InvalidConfig);
  CHECK_LMF_CODE(pipeline_config_from_kv(KvConfig::parse("source = ftp\n")), ErrorCode::InvalidConfig);

  auto csv = pipeline_config_from_kv(KvConfig::parse("input = /nonexistent/a.csv\n"));
  CHECK(csv.inputs.size() == 1);
  CHECK_LMF_CODE(validate(csv), ErrorCode::IoError);
  auto neg = pipeline_config_from_kv(KvConfig::parse("min_transactions = -1\n"));
  CHECK_LMF_CODE(validate(neg), ErrorCode::InvalidConfig);
}

TEST_CASE("batch labels and seeds are stable") {
  SimBatch b;
  b.alphas = {1.5};
  b.seeds_per_alpha = 2;
  b.n_st_values = {50, 100};
  auto runs = expand_batch(b);
  REQUIRE(runs.size() == 4);
  CHECK(runs[0].label == "sim_a1.500_n50_s000");
  CHECK(runs[3].label == "sim_a1.500_n100_s001");
  CHECK(runs[0].seed != runs[1].seed);
  CHECK(expand_batch(b)[2].seed == runs[2].seed);
}

TEST_CASE("random-trader batch is flagged throughout") {
  const auto out = scratch("rt");
  auto cfg = sim_config(
      "sim.alphas = 1.3, 1.7\nsim.rt_fraction = 1\nsim.n_steps = 200000\nplots = false\npsd.enabled = false", out);
  auto res = run_pipeline(cfg);
  REQUIRE(res.rows.size() == 2);
  for (const auto& r : res.rows) {
    CHECK(r.flagged());
    CHECK(std::find(r.flags.begin(), r.flags.end(), "NoPowerLawRegion") != r.flags.end());
  }
  const auto log = slurp(res.log_path);
  CHECK(log.find("sim_a1.300_n100_s000\tflagged\tNoPowerLawRegion") != std::string::npos);
  CHECK(log.find("sim_a1.700_n100_s000\tflagged\tNoPowerLawRegion") != std::string::npos);
  CHECK(res.summary.n_flagged == 2);
}

TEST_CASE("pipeline output is reproducible") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const std::string text = "sim.alphas = 1.4, 1.6\nsim.n_steps = 300000\nsim.seed = 5\nplots = false";
  run_pipeline(sim_config(text, a));
  run_pipeline(sim_config(text, b));
  CHECK(slurp(a / "scatter.csv") == slurp(b / "scatter.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(!slurp(a / "scatter.csv").empty());
}

TEST_CASE("CSV input path with a truth sidecar") {
  const auto dir = scratch("csv");
  SimConfig c;
  c.label = "stock_a";
  c.n_steps = 600'000;
  c.rt_fraction = 0.2;
  c.seed = 71;
  c.steps_per_day = 100'000;
  auto dp = simulate(c);
  SimConfig small = c;
  small.label = "stock_b";
  small.n_steps = 5'000;
  auto dp2 = simulate(small);
  write_events_csv(std::vector<MarketDatapoint>{dp, dp2}, dir / "events.csv");
  write_truth_json(std::vector<MarketDatapoint>{dp, dp2}, dir / "truth.json");
  auto kv = KvConfig::parse("input = " + (dir / "events.csv").string() + "\ntruth = " + (dir / "truth.json").string() +
                            "\nbias.cache_dir = " + cache_dir() + "\noutput_dir = " + (dir / "out").string() + "\n");
  auto res = run_pipeline(pipeline_config_from_kv(kv));
  REQUIRE(res.rows.size() == 1);
  const auto& r = res.rows[0];
  CHECK(r.label == "stock_a");
  CHECK(r.n_eps == 600'000);
  CHECK(r.n_st_true == 100);
  CHECK(r.alpha_true == 1.5);
  CHECK(r.n_st_detected > 50);
  CHECK(r.alpha > r.alpha_true - 0.05);
  CHECK(r.alpha < 2.2);
  CHECK(r.l_min >= 1);
  const auto log = slurp(res.log_path);
  CHECK(log.find("stock_b\tdropped\tInsufficientData") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "gamma_alpha.svg"));
  CHECK(fs::exists(dir / "out" / "ccdf.csv"));
}

TEST_CASE("scatter slope over a 40-run batch") {
  const auto out = scratch("batch40");
  auto cfg = sim_config(
      "sim.alphas = 1.2, 1.35, 1.5, 1.65, 1.8\nsim.seeds_per_alpha = 8\nsim.n_steps = 1000000\n"
      "sim.seed = 2024\npsd.enabled = false\nplots = false",
      out);
  auto res = run_pipeline(cfg);
  REQUIRE(res.rows.size() == 40);
  CHECK(res.summary.n_flagged <= 4);
  MESSAGE("slope on fitted alpha " << res.summary.gamma_on_alpha.slope << ", on true alpha "
                                   << res.summary.gamma_on_alpha_true.slope);
  CHECK(res.summary.gamma_on_alpha.slope >= 0.5);
  CHECK(res.summary.gamma_on_alpha.slope <= 1.15);
  CHECK(res.summary.gamma_on_alpha_true.slope >= 0.85);
  CHECK(res.summary.gamma_on_alpha_true.slope <= 1.15);
}

TEST_CASE("single long homogeneous run recovers the number of splitting traders") {
  const auto out = scratch("long");
  auto cfg = sim_config("sim.alphas = 1.5\nsim.n_steps = 10000000\nsim.seed = 77\nplots = false\npsd.enabled = false",
                        out);
  auto res = run_pipeline(cfg);
  REQUIRE(res.rows.size() == 1);
  const auto& r = res.rows[0];
  REQUIRE_FALSE(r.flagged());
  CHECK(r.n_st_lmf >= 50.0);
  CHECK(r.n_st_lmf <= 200.0);
}
