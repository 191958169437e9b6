#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lmf/bias_table.hpp"
#include "lmf/clustering.hpp"
#include "lmf/correlation.hpp"
#include "lmf/ingest.hpp"
#include "lmf/inference.hpp"
#include "lmf/kv_config.hpp"
#include "lmf/powerlaw.hpp"
#include "lmf/simulator.hpp"

namespace lmf {

struct AnalysisOptions {
  ClusteringConfig clustering;
  ClausetOptions clauset;
  AcfOptions acf;
  PsdOptions psd;
  bool run_psd = true;
  double lower_bound_slack = kDefaultLowerBoundSlack;
  std::size_t ccdf_points = 60;  // log-spaced CCDF samples kept per datapoint
};

/// One datapoint of the scatter table. NaN marks a quantity that could not be computed.
struct ScatterRow {
  std::string label;
  std::int64_t n_eps = 0;
  double alpha = 0.0;  // Clauset tail exponent of pooled ST metaorder lengths
  std::int64_t l_min = 0;
  std::int64_t n_tail = 0;
  double gamma_acf_nlls = 0.0;
  double gamma_acf_unbiased = 0.0;
  double gamma_psd_nlls = 0.0;
  double gamma_psd_unbiased = 0.0;
  double c0 = 0.0;
  double n_st_lmf = 0.0;
  double st_fraction = 0.0;
  double st_order_share = 0.0;
  std::int64_t n_st_detected = 0;
  double alpha_true = 0.0;
  double n_st_true = 0.0;
  std::vector<std::string> flags;     // exclude the row from headline statistics
  std::vector<std::string> warnings;  // informational

  bool flagged() const { return !flags.empty(); }
  double log10_n_st_lmf() const;
  /// log10 N^{1-gamma} for the estimate and for the truth, gamma = gamma_acf_unbiased.
  double log10_n_lmf_pow() const;
  double log10_n_true_pow() const;
};

struct CcdfSample {
  std::string label;
  std::vector<CcdfPoint> points;
};

struct DatapointAnalysis {
  ScatterRow row;
  CcdfSample ccdf;
  std::vector<std::string> messages;  // one per flag or warning, "CODE: detail"
};

/// Cluster, fit the length tail, fit both correlation routes, debias and
/// invert. Never throws for per-datapoint failures; they become flags.
DatapointAnalysis analyze_datapoint(const MarketDatapoint& dp, const AnalysisOptions& options,
                                    const BiasTable& table);

struct SimBatch {
  std::vector<double> alphas{1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8};
  int seeds_per_alpha = 1;
  std::vector<int> n_st_values;  // empty: base.n_st only
  SimConfig base;
  std::uint64_t master_seed = 1;
};

/// Labels and configs of every run in the batch, in output order.
std::vector<SimConfig> expand_batch(const SimBatch& batch);

struct PipelineConfig {
  std::vector<std::filesystem::path> inputs;
  std::optional<std::filesystem::path> truth_path;
  std::optional<SimBatch> simulation;
  IngestOptions ingest;
  AnalysisOptions analysis;
  BiasTableConfig bias;
  std::filesystem::path bias_cache_dir = "bias_cache";
  std::filesystem::path output_dir = "out";
  bool plots = true;
  unsigned parallelism = 0;
};

/// Reads every documented key; unknown keys throw LmfError(InvalidConfig).
PipelineConfig pipeline_config_from_kv(const KvConfig& kv);
void validate(const PipelineConfig& config);

struct Regression {
  std::size_t n = 0;
  double slope = 0.0;
  double intercept = 0.0;
};

struct AlphaBox {
  double center = 0.0;
  std::size_t n = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

struct ScatterSummary {
  std::size_t n_rows = 0;
  std::size_t n_flagged = 0;
  Regression gamma_on_alpha;        // gamma_acf_unbiased on (alpha - 1), Clauset alpha
  Regression gamma_on_alpha_true;   // same against the simulation truth when present
  Regression gamma_psd_on_alpha;
  std::vector<AlphaBox> boxes;      // gamma_acf_unbiased per alpha bin of width 0.1
  std::size_t lower_bound_rows = 0;
  std::size_t lower_bound_holds = 0;
};

/// Linear-interpolation quantile (type 7) of unsorted data.
double quantile(std::vector<double> values, double q);
Regression ols(const std::vector<double>& x, const std::vector<double>& y);
ScatterSummary summarize_rows(const std::vector<ScatterRow>& rows,
                              double lower_bound_slack = kDefaultLowerBoundSlack);

std::string scatter_csv(const std::vector<ScatterRow>& rows);
std::vector<ScatterRow> parse_scatter_csv(const std::string& text);
std::vector<ScatterRow> read_scatter_csv(const std::filesystem::path& path);
std::string summary_json(const ScatterSummary& summary);
std::string ccdf_csv(const std::vector<CcdfSample>& samples);
std::vector<CcdfSample> read_ccdf_csv(const std::filesystem::path& path);

struct RunLogEntry {
  std::string label;
  std::string status;  // ok, warning, flagged, dropped
  std::string code;
  std::string detail;
};

struct PipelineResult {
  std::vector<ScatterRow> rows;
  std::vector<RunLogEntry> log;
  ScatterSummary summary;
  std::filesystem::path scatter_path, summary_path, log_path, ccdf_path;
  bool bias_table_built = false;
};

/// Runs every datapoint and writes scatter.csv, summary.json, ccdf.csv,
/// run_log.tsv (and plots when enabled) under output_dir.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Format used for every real number in the tables.
std::string format_real(double v);

}  // namespace lmf
