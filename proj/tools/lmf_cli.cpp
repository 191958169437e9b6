#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lmf/bias_table.hpp"
#include "lmf/errors.hpp"
#include "lmf/ingest.hpp"
#include "lmf/kv_config.hpp"
#include "lmf/pipeline.hpp"
#include "lmf/plots.hpp"
#include "lmf/simulator.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kConfig = 3,
  kInput = 4,
};

int exit_code_for(lmf::ErrorCode code) {
  switch (code) {
    case lmf::ErrorCode::InvalidConfig:
      return kConfig;
    case lmf::ErrorCode::ParseError:
    case lmf::ErrorCode::IoError:
      return kInput;
    default:
      return kFailure;
  }
}

lmf::KvConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  lmf::KvConfig kv = path.empty() ? lmf::KvConfig::parse("", "defaults") : lmf::KvConfig::load(path);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0)
      throw lmf::LmfError(lmf::ErrorCode::InvalidConfig, "--set expects key=value, got '" + o + "'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv.set(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
  return kv;
}

void print_table(const lmf::BiasTable& table, std::ostream& out) {
  out << "gamma_true\tn_eps\tacf_ok\tacf_mean\tacf_sd\tpsd_ok\tpsd_mean\tpsd_sd\n";
  for (const auto& c : table.cells()) {
    out << lmf::format_real(c.gamma_true) << '\t' << c.n_eps << '\t' << c.acf.n_ok << '\t'
        << lmf::format_real(c.acf.mean_gamma) << '\t' << lmf::format_real(c.acf.sd_gamma) << '\t' << c.psd.n_ok
        << '\t' << lmf::format_real(c.psd.mean_gamma) << '\t' << lmf::format_real(c.psd.sd_gamma) << '\n';
  }
}

lmf::BiasProgress stderr_progress(bool quiet) {
  if (quiet) return {};
  return [](std::size_t done, std::size_t total) {
    if (done == total || done % 10 == 0) std::fprintf(stderr, "\rbias table %zu/%zu", done, total);
    if (done == total) std::fputc('\n', stderr);
  };
}

struct SimulateArgs {
  std::string config;
  std::vector<std::string> overrides;
  double alpha = 1.5;
  int n_st = 100;
  std::int64_t n_steps = 1'000'000;
  std::string intensity = "homogeneous";
  double rt_fraction = 0.0;
  int n_rt = 100;
  std::int64_t steps_per_day = 0;
  std::uint64_t seed = 1;
  std::string label = "sim";
  std::string out = "events.csv";
  std::string truth = "truth.json";
};

int run_simulate(const SimulateArgs& a) {
  std::vector<lmf::SimConfig> runs;
  if (!a.config.empty() || !a.overrides.empty()) {
    auto kv = load_config(a.config, a.overrides);
    if (!kv.has("source")) kv.set("source", "simulation");
    const auto pc = lmf::pipeline_config_from_kv(kv);
    if (!pc.simulation) throw lmf::LmfError(lmf::ErrorCode::InvalidConfig, "simulate needs source = simulation");
    runs = lmf::expand_batch(*pc.simulation);
  } else {
    lmf::SimConfig c;
    c.label = a.label;
    c.alpha = a.alpha;
    c.n_st = a.n_st;
    c.n_steps = a.n_steps;
    c.intensity = lmf::parse_intensity_mode(a.intensity);
    c.rt_fraction = a.rt_fraction;
    c.n_rt = a.n_rt;
    c.steps_per_day = a.steps_per_day;
    c.seed = a.seed;
    c.log_metaorders = false;
    runs.push_back(c);
  }
  std::vector<lmf::MarketDatapoint> dps;
  dps.reserve(runs.size());
  for (const auto& r : runs) {
    lmf::validate(r);
    dps.push_back(lmf::simulate(r));
  }
  lmf::write_events_csv(dps, a.out);
  if (!a.truth.empty()) lmf::write_truth_json(dps, a.truth);
  std::cout << "wrote " << dps.size() << " datapoint(s) to " << a.out;
  if (!a.truth.empty()) std::cout << " (truth: " << a.truth << ")";
  std::cout << '\n';
  return kOk;
}

int run_analyze(const std::string& config, const std::vector<std::string>& overrides,
                const std::vector<std::string>& inputs, const std::string& output_dir, bool quiet) {
  auto kv = load_config(config, overrides);
  if (!inputs.empty()) {
    std::string joined;
    for (const auto& p : inputs) joined += (joined.empty() ? "" : ",") + p;
    kv.set("source", "csv");
    kv.set("input", joined);
  }
  if (!output_dir.empty()) kv.set("output_dir", output_dir);
  const auto pc = lmf::pipeline_config_from_kv(kv);
  if (!quiet) std::cerr << "bias table cache: " << pc.bias_cache_dir.string() << '\n';
  const auto result = lmf::run_pipeline(pc);

  std::size_t flagged = 0, dropped = 0;
  for (const auto& r : result.rows) flagged += r.flagged();
  for (const auto& e : result.log) dropped += e.status == "dropped";
  const auto& s = result.summary;
  std::cout << "rows " << result.rows.size() << ", flagged " << flagged << ", dropped " << dropped << '\n';
  std::cout << "gamma vs alpha-1: slope " << lmf::format_real(s.gamma_on_alpha.slope) << ", intercept "
            << lmf::format_real(s.gamma_on_alpha.intercept) << " (n=" << s.gamma_on_alpha.n << ")\n";
  std::cout << "lower bound holds " << s.lower_bound_holds << "/" << s.lower_bound_rows << '\n';
  std::cout << "outputs in " << pc.output_dir.string() << '\n';
  if (!result.rows.empty() && flagged == result.rows.size()) {
    std::cerr << "every datapoint was flagged; see " << result.log_path.string() << '\n';
    return kFailure;
  }
  return kOk;
}

int run_scatter(const std::string& scatter, const std::string& out, double slack) {
  const auto rows = lmf::read_scatter_csv(scatter);
  const auto summary = lmf::summarize_rows(rows, slack);
  const auto json = lmf::summary_json(summary);
  if (out.empty() || out == "-") {
    std::cout << json << '\n';
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw lmf::LmfError(lmf::ErrorCode::IoError, "cannot write " + out);
    f << json << '\n';
  }
  return kOk;
}

int run_calibrate(const std::string& config, const std::vector<std::string>& overrides, const std::string& cache_dir,
                  bool force, bool quiet) {
  auto kv = load_config(config, overrides);
  if (!kv.has("source")) kv.set("source", "simulation");
  const auto pc = lmf::pipeline_config_from_kv(kv);
  const fs::path dir = cache_dir.empty() ? pc.bias_cache_dir : fs::path(cache_dir);
  lmf::BiasTable table = [&] {
    if (force) {
      lmf::validate(pc.bias);
      auto t = lmf::build_bias_table(pc.bias, stderr_progress(quiet));
      fs::create_directories(dir);
      t.save(lmf::bias_cache_path(pc.bias, dir));
      return t;
    }
    bool built = false;
    auto t = lmf::load_or_build_bias_table(pc.bias, dir, &built, stderr_progress(quiet));
    if (!quiet) std::cerr << (built ? "built" : "loaded") << " bias table in " << dir.string() << '\n';
    return t;
  }();
  print_table(table, std::cout);
  return kOk;
}

int run_plot(const std::string& scatter, const std::string& ccdf, const std::string& out_dir, double slack) {
  const auto rows = lmf::read_scatter_csv(scatter);
  std::vector<lmf::CcdfSample> samples;
  if (!ccdf.empty()) samples = lmf::read_ccdf_csv(ccdf);
  fs::create_directories(out_dir);
  lmf::emit_plots(rows, samples, out_dir, slack);
  std::cout << "plots written to " << out_dir << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order-sign long-range correlation analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lmf 0.1.0");

  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress output");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic sign sequences as CSV plus a truth sidecar");
  simulate->add_option("-c,--config", sim.config, "Config file; its sim.* keys define a batch")->check(CLI::ExistingFile);
  simulate->add_option("--set", sim.overrides, "Override a config key (key=value)");
  simulate->add_option("--alpha", sim.alpha, "Metaorder length tail exponent");
  simulate->add_option("--n-st", sim.n_st, "Number of splitting traders");
  simulate->add_option("--steps", sim.n_steps, "Recorded transactions");
  simulate->add_option("--intensity", sim.intensity, "homogeneous | pareto:<shape> | explicit:w1;w2;...");
  simulate->add_option("--rt-fraction", sim.rt_fraction, "Share of steps taken by random traders");
  simulate->add_option("--n-rt", sim.n_rt, "Number of random traders");
  simulate->add_option("--steps-per-day", sim.steps_per_day, "Day length in steps (0: no day column)");
  simulate->add_option("--seed", sim.seed, "Seed");
  simulate->add_option("--label", sim.label, "Datapoint label");
  simulate->add_option("-o,--out", sim.out, "Events CSV")->capture_default_str();
  simulate->add_option("--truth", sim.truth, "Truth JSON (empty to skip)")->capture_default_str();

  std::string an_config, an_output;
  std::vector<std::string> an_overrides, an_inputs;
  auto* analyze = app.add_subcommand("analyze", "Run the full pipeline and write the scatter table");
  analyze->add_option("-c,--config", an_config, "Config file")->check(CLI::ExistingFile);
  analyze->add_option("--set", an_overrides, "Override a config key (key=value)");
  analyze->add_option("-i,--input", an_inputs, "Event CSV files (implies source = csv)")->check(CLI::ExistingFile);
  analyze->add_option("-o,--output-dir", an_output, "Output directory");

  std::string sc_in, sc_out;
  double sc_slack = lmf::kDefaultLowerBoundSlack;
  auto* scatter = app.add_subcommand("scatter", "Summarize a scatter table (regression, boxes, lower bound)");
  scatter->add_option("scatter_csv", sc_in, "Scatter CSV")->required()->check(CLI::ExistingFile);
  scatter->add_option("-o,--out", sc_out, "Summary JSON (default stdout)");
  scatter->add_option("--slack", sc_slack, "Lower-bound slack factor");

  std::string cb_config, cb_cache;
  std::vector<std::string> cb_overrides;
  bool cb_force = false;
  auto* calibrate = app.add_subcommand("calibrate-bias", "Build or load the Monte Carlo bias table");
  calibrate->add_option("-c,--config", cb_config, "Config file (bias.*, acf.*, psd.* keys)")->check(CLI::ExistingFile);
  calibrate->add_option("--set", cb_overrides, "Override a config key (key=value)");
  calibrate->add_option("--cache-dir", cb_cache, "Table cache directory");
  calibrate->add_flag("--force", cb_force, "Rebuild even when a cached table exists");

  std::string pl_scatter, pl_ccdf, pl_out = ".";
  double pl_slack = lmf::kDefaultLowerBoundSlack;
  auto* plot = app.add_subcommand("plot", "Render SVG figures from a scatter table");
  plot->add_option("scatter_csv", pl_scatter, "Scatter CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--ccdf", pl_ccdf, "CCDF CSV")->check(CLI::ExistingFile);
  plot->add_option("-o,--out-dir", pl_out, "Output directory")->capture_default_str();
  plot->add_option("--slack", pl_slack, "Lower-bound slack factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*analyze) return run_analyze(an_config, an_overrides, an_inputs, an_output, quiet);
    if (*scatter) return run_scatter(sc_in, sc_out, sc_slack);
    if (*calibrate) return run_calibrate(cb_config, cb_overrides, cb_cache, cb_force, quiet);
    if (*plot) return run_plot(pl_scatter, pl_ccdf, pl_out, pl_slack);
  } catch (const lmf::LmfError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
