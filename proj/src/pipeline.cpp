#include "lmf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lmf/errors.hpp"
#include "lmf/parallel.hpp"
#include "lmf/plots.hpp"

namespace lmf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool finite(double v) { return std::isfinite(v); }

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<CcdfPoint> thin_ccdf(const std::vector<CcdfPoint>& all, std::size_t target) {
  if (all.size() <= target || target < 2) return all;
  std::vector<CcdfPoint> out;
  const double lmax = std::log(static_cast<double>(all.back().length));
  std::size_t i = 0;
  for (std::size_t j = 0; j < target && i < all.size(); ++j) {
    const double want = std::exp(lmax * static_cast<double>(j) / static_cast<double>(target - 1));
    while (i < all.size() && static_cast<double>(all[i].length) < want * (1.0 - 1e-12)) ++i;
    if (i < all.size() && (out.empty() || out.back().length != all[i].length)) out.push_back(all[i]);
  }
  if (out.back().length != all.back().length) out.push_back(all.back());
  return out;
}

}  // namespace

double ScatterRow::log10_n_st_lmf() const { return n_st_lmf > 0.0 ? std::log10(n_st_lmf) : kNaN; }

double ScatterRow::log10_n_lmf_pow() const {
  return n_st_lmf > 0.0 ? (1.0 - gamma_acf_unbiased) * std::log10(n_st_lmf) : kNaN;
}

double ScatterRow::log10_n_true_pow() const {
  return n_st_true > 0.0 ? (1.0 - gamma_acf_unbiased) * std::log10(n_st_true) : kNaN;
}

DatapointAnalysis analyze_datapoint(const MarketDatapoint& dp, const AnalysisOptions& opt, const BiasTable& table) {
  DatapointAnalysis out;
  ScatterRow& r = out.row;
  r.label = dp.label;
  r.alpha = r.gamma_acf_nlls = r.gamma_acf_unbiased = r.gamma_psd_nlls = r.gamma_psd_unbiased = kNaN;
  r.c0 = r.n_st_lmf = r.st_fraction = r.st_order_share = r.alpha_true = r.n_st_true = kNaN;
  out.ccdf.label = dp.label;
  if (dp.truth) {
    r.alpha_true = dp.truth->alpha;
    r.n_st_true = dp.truth->n_st;
  }
  auto flag = [&](const LmfError& e) {
    const std::string code(to_string(e.code()));
    if (std::find(r.flags.begin(), r.flags.end(), code) == r.flags.end()) r.flags.push_back(code);
    out.messages.emplace_back(e.what());
  };
  auto warn = [&](const std::string& code, const std::string& msg) {
    if (std::find(r.warnings.begin(), r.warnings.end(), code) == r.warnings.end()) r.warnings.push_back(code);
    out.messages.push_back(code + ": " + msg);
  };

  SignSeries series;
  try {
    series = series_from_events(dp.events);
  } catch (const LmfError& e) {
    flag(e);
    return out;
  }
  const auto n_eps = static_cast<std::int64_t>(series.size());
  r.n_eps = n_eps;

  try {
    const auto traders = cluster_traders(dp, opt.clustering);
    std::vector<TraderLabel> labels;
    labels.reserve(traders.size());
    for (const auto& t : traders) labels.push_back(t.label);
    const auto summary = market_clustering_summary(dp, labels);
    r.st_fraction = summary.st_fraction;
    r.st_order_share = summary.st_order_share;
    r.n_st_detected = summary.n_st;
    const auto lengths = pooled_st_lengths(traders);
    if (lengths.empty()) throw LmfError(ErrorCode::EmptySample, "no splitting traders detected");
    out.ccdf.points = thin_ccdf(empirical_ccdf(lengths), opt.ccdf_points);
    const auto fit = clauset_fit(lengths, opt.clauset);
    r.alpha = fit.alpha;
    r.l_min = fit.l_min;
    r.n_tail = static_cast<std::int64_t>(fit.n_tail);
  } catch (const LmfError& e) {
    flag(e);
  }

  try {
    const auto a = analyze_acf(series, opt.acf);
    r.gamma_acf_nlls = a.fit.gamma_nlls;
    bool clamped = false;
    r.gamma_acf_unbiased = debias_gamma(a.fit.gamma_nlls, n_eps, table, FitMethod::Acf, &clamped);
    if (clamped) warn("Clamped", "acf gamma pulled onto the calibration range");
    const double ratio = table.log10_c0_ratio(FitMethod::Acf, r.gamma_acf_unbiased, n_eps);
    r.c0 = prefactor_at_gamma(a, r.gamma_acf_unbiased) / std::pow(10.0, ratio);
    r.n_st_lmf = n_st_lmf(r.c0, r.gamma_acf_unbiased);
  } catch (const LmfError& e) {
    flag(e);
  }

  if (opt.run_psd) {
    try {
      const auto p = analyze_psd(series, opt.psd);
      r.gamma_psd_nlls = p.fit.gamma_nlls;
      bool clamped = false;
      r.gamma_psd_unbiased = debias_gamma(p.fit.gamma_nlls, n_eps, table, FitMethod::Psd, &clamped);
      if (clamped) warn("Clamped", "psd gamma pulled onto the calibration range");
    } catch (const LmfError& e) {
      warn(std::string(to_string(e.code())), e.what());
    }
  }
  return out;
}

std::vector<SimConfig> expand_batch(const SimBatch& batch) {
  std::vector<SimConfig> out;
  std::vector<int> ns = batch.n_st_values;
  if (ns.empty()) ns.push_back(batch.base.n_st);
  for (int n : ns) {
    for (double a : batch.alphas) {
      for (int s = 0; s < batch.seeds_per_alpha; ++s) {
        SimConfig c = batch.base;
        c.alpha = a;
        c.n_st = n;
        char label[96];
        std::snprintf(label, sizeof label, "sim_a%.3f_n%d_s%03d", a, n, s);
        c.label = label;
        c.seed = derive_seed(batch.master_seed, c.label);
        c.log_metaorders = false;
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

namespace {

AcfEstimator parse_estimator(const std::string& s) {
  if (s == "raw") return AcfEstimator::Raw;
  if (s == "mean_subtracted") return AcfEstimator::MeanSubtracted;
  throw LmfError(ErrorCode::InvalidConfig, "acf.estimator must be raw or mean_subtracted");
}

}  // namespace

PipelineConfig pipeline_config_from_kv(const KvConfig& kv) {
  PipelineConfig c;
  const std::string source = kv.get_string("source", kv.has("input") ? "csv" : "simulation");
  if (source == "csv") {
    const auto list = kv.get_string("input", "");
    for (const auto& p : split(list, ',')) {
      const auto t = p.substr(p.find_first_not_of(' ') == std::string::npos ? 0 : p.find_first_not_of(' '));
      if (!t.empty()) c.inputs.emplace_back(t);
    }
    if (const auto t = kv.get("truth")) c.truth_path = *t;
  } else if (source == "simulation") {
    SimBatch b;
    b.alphas = kv.get_doubles("sim.alphas", b.alphas);
    b.seeds_per_alpha = static_cast<int>(kv.get_int("sim.seeds_per_alpha", b.seeds_per_alpha));
    for (auto n : kv.get_ints("sim.n_st", {})) b.n_st_values.push_back(static_cast<int>(n));
    b.base.n_steps = kv.get_int("sim.n_steps", b.base.n_steps);
    b.base.intensity = parse_intensity_mode(kv.get_string("sim.intensity", "homogeneous"));
    b.base.rt_fraction = kv.get_double("sim.rt_fraction", b.base.rt_fraction);
    b.base.n_rt = static_cast<int>(kv.get_int("sim.n_rt", b.base.n_rt));
    b.base.steps_per_day = kv.get_int("sim.steps_per_day", b.base.steps_per_day);
    if (kv.has("sim.burn_in")) b.base.burn_in = kv.get_int("sim.burn_in", 0);
    b.master_seed = static_cast<std::uint64_t>(kv.get_int("sim.seed", 1));
    c.simulation = b;
  } else {
    throw LmfError(ErrorCode::InvalidConfig, "source must be csv or simulation");
  }

  c.ingest.min_transactions = kv.get_int("min_transactions", c.ingest.min_transactions);
  c.ingest.trim_minutes = static_cast<int>(kv.get_int("trim_minutes", c.ingest.trim_minutes));

  auto& a = c.analysis;
  a.clustering.theta = kv.get_double("clustering.theta", a.clustering.theta);
  a.clustering.min_orders = kv.get_int("clustering.min_orders", a.clustering.min_orders);
  a.clauset.min_samples = static_cast<std::size_t>(kv.get_int("clauset.min_samples", 50));
  a.clauset.lmin_quantile = kv.get_double("clauset.lmin_quantile", a.clauset.lmin_quantile);
  a.acf.bins_per_decade = static_cast<int>(kv.get_int("acf.bins_per_decade", a.acf.bins_per_decade));
  a.acf.range.noise_q = kv.get_double("acf.noise_q", a.acf.range.noise_q);
  a.acf.range.cap_fraction = kv.get_double("acf.cap_fraction", a.acf.range.cap_fraction);
  a.acf.range.min_decades = kv.get_double("acf.min_decades", a.acf.range.min_decades);
  a.acf.range.plateau_max_lag = kv.get_double("acf.plateau_max_lag", a.acf.range.plateau_max_lag);
  a.acf.range.plateau_scale = kv.get_double("acf.plateau_scale", a.acf.range.plateau_scale);
  a.acf.range.span_decades = kv.get_double("acf.span_decades", a.acf.range.span_decades);
  {
    const std::string rule = kv.get_string("acf.range_rule", "plateau");
    if (rule == "plateau") {
      a.acf.range.rule = RangeRule::Plateau;
    } else if (rule == "noise_floor") {
      a.acf.range.rule = RangeRule::NoiseFloor;
    } else {
      throw LmfError(ErrorCode::InvalidConfig, "acf.range_rule must be plateau or noise_floor");
    }
  }
  a.acf.estimator = parse_estimator(kv.get_string("acf.estimator", "raw"));
  a.run_psd = kv.get_bool("psd.enabled", a.run_psd);
  a.psd.segment_length = kv.get_int("psd.segment_length", a.psd.segment_length);
  a.psd.overlap = kv.get_double("psd.overlap", a.psd.overlap);
  a.psd.bins_per_decade = static_cast<int>(kv.get_int("psd.bins_per_decade", a.psd.bins_per_decade));
  a.psd.noise_q = kv.get_double("psd.noise_q", a.psd.noise_q);
  a.lower_bound_slack = kv.get_double("lower_bound_slack", a.lower_bound_slack);

  c.bias.gamma_grid = kv.get_doubles("bias.gamma_grid", c.bias.gamma_grid);
  c.bias.n_eps_grid = kv.get_ints("bias.n_eps_grid", c.bias.n_eps_grid);
  c.bias.reps = static_cast<int>(kv.get_int("bias.reps", c.bias.reps));
  c.bias.n_st = static_cast<int>(kv.get_int("bias.n_st", c.bias.n_st));
  c.bias.seed = static_cast<std::uint64_t>(kv.get_int("bias.seed", static_cast<std::int64_t>(c.bias.seed)));
  c.bias.acf = a.acf;
  c.bias.psd = a.psd;
  c.bias.with_psd = a.run_psd;
  c.bias_cache_dir = kv.get_string("bias.cache_dir", c.bias_cache_dir.string());

  c.output_dir = kv.get_string("output_dir", c.output_dir.string());
  c.plots = kv.get_bool("plots", c.plots);
  c.parallelism = static_cast<unsigned>(kv.get_int("parallelism", 0));
  c.bias.threads = c.parallelism;

  const auto unused = kv.unused_keys();
  if (!unused.empty()) throw LmfError(ErrorCode::InvalidConfig, "unknown config keys: " + join(unused, ' '));
  return c;
}

void validate(const PipelineConfig& c) {
  if (c.inputs.empty() && !c.simulation) throw LmfError(ErrorCode::InvalidConfig, "no input files and no simulation");
  if (!c.inputs.empty() && c.simulation)
    throw LmfError(ErrorCode::InvalidConfig, "choose either input files or a simulation batch");
  for (const auto& p : c.inputs)
    if (!std::filesystem::exists(p)) throw LmfError(ErrorCode::IoError, "input not found: " + p.string());
  if (c.truth_path && !std::filesystem::exists(*c.truth_path))
    throw LmfError(ErrorCode::IoError, "truth file not found: " + c.truth_path->string());
  if (c.ingest.min_transactions < 0) throw LmfError(ErrorCode::InvalidConfig, "min_transactions must be >= 0");
  if (c.simulation) {
    const auto& b = *c.simulation;
    if (b.alphas.empty() || b.seeds_per_alpha < 1)
      throw LmfError(ErrorCode::InvalidConfig, "simulation batch needs alphas and seeds_per_alpha >= 1");
    for (const auto& sc : expand_batch(b)) lmf::validate(sc);
  }
  validate(c.analysis.clustering);
  validate(c.bias);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Regression ols(const std::vector<double>& x, const std::vector<double>& y) {
  Regression r;
  r.n = x.size();
  if (r.n < 2) {
    r.slope = r.intercept = kNaN;
    return r;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < r.n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(r.n);
  my /= static_cast<double>(r.n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < r.n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  r.slope = sxx > 0.0 ? sxy / sxx : kNaN;
  r.intercept = my - r.slope * mx;
  return r;
}

ScatterSummary summarize_rows(const std::vector<ScatterRow>& rows, double slack) {
  ScatterSummary s;
  s.n_rows = rows.size();
  std::vector<double> ax, ay, tx, ty, px, py;
  std::map<long, std::vector<double>> bins;
  for (const auto& r : rows) {
    if (r.flagged()) {
      ++s.n_flagged;
      continue;
    }
    if (finite(r.alpha) && finite(r.gamma_acf_unbiased)) {
      ax.push_back(r.alpha - 1.0);
      ay.push_back(r.gamma_acf_unbiased);
      bins[std::lround(r.alpha * 10.0)].push_back(r.gamma_acf_unbiased);
    }
    if (finite(r.alpha_true) && finite(r.gamma_acf_unbiased)) {
      tx.push_back(r.alpha_true - 1.0);
      ty.push_back(r.gamma_acf_unbiased);
    }
    if (finite(r.alpha) && finite(r.gamma_psd_unbiased)) {
      px.push_back(r.alpha - 1.0);
      py.push_back(r.gamma_psd_unbiased);
    }
    if (finite(r.n_st_true) && r.n_st_true > 0.0 && finite(r.n_st_lmf) && r.n_st_lmf > 0.0) {
      ++s.lower_bound_rows;
      if (lower_bound_check(r.n_st_lmf, r.n_st_true, slack).holds) ++s.lower_bound_holds;
    }
  }
  s.gamma_on_alpha = ols(ax, ay);
  s.gamma_on_alpha_true = ols(tx, ty);
  s.gamma_psd_on_alpha = ols(px, py);
  for (const auto& [key, v] : bins) {
    AlphaBox b;
    b.center = static_cast<double>(key) / 10.0;
    b.n = v.size();
    b.min = *std::min_element(v.begin(), v.end());
    b.max = *std::max_element(v.begin(), v.end());
    b.q1 = quantile(v, 0.25);
    b.median = quantile(v, 0.5);
    b.q3 = quantile(v, 0.75);
    s.boxes.push_back(b);
  }
  return s;
}

std::string format_real(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

const char* const kScatterHeader =
    "label,n_eps,alpha,l_min,n_tail,gamma_acf_nlls,gamma_acf_unbiased,gamma_psd_nlls,gamma_psd_unbiased,c0,"
    "n_st_lmf,log10_n_st_lmf,log10_n_lmf_pow,log10_n_true_pow,st_fraction,st_order_share,n_st_detected,"
    "alpha_true,n_st_true,flags,warnings";

double parse_real(const std::string& s) {
  if (s.empty()) return kNaN;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw LmfError(ErrorCode::ParseError, "bad number '" + s + "'");
  }
  if (pos != s.size()) throw LmfError(ErrorCode::ParseError, "bad number '" + s + "'");
  return v;
}

std::vector<std::string> split_codes(const std::string& s) {
  std::vector<std::string> out;
  for (auto& p : split(s, ';'))
    if (!p.empty()) out.push_back(p);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LmfError(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LmfError(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw LmfError(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace

std::string scatter_csv(const std::vector<ScatterRow>& rows) {
  std::ostringstream os;
  os << kScatterHeader << '\n';
  for (const auto& r : rows) {
    os << r.label << ',' << r.n_eps << ',' << format_real(r.alpha) << ',' << r.l_min << ',' << r.n_tail << ','
       << format_real(r.gamma_acf_nlls) << ',' << format_real(r.gamma_acf_unbiased) << ','
       << format_real(r.gamma_psd_nlls) << ',' << format_real(r.gamma_psd_unbiased) << ',' << format_real(r.c0)
       << ',' << format_real(r.n_st_lmf) << ',' << format_real(r.log10_n_st_lmf()) << ','
       << format_real(r.log10_n_lmf_pow()) << ',' << format_real(r.log10_n_true_pow()) << ','
       << format_real(r.st_fraction) << ',' << format_real(r.st_order_share) << ',' << r.n_st_detected << ','
       << format_real(r.alpha_true) << ',' << format_real(r.n_st_true) << ',' << join(r.flags, ';') << ','
       << join(r.warnings, ';') << '\n';
  }
  return os.str();
}

std::vector<ScatterRow> parse_scatter_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kScatterHeader)
    throw LmfError(ErrorCode::ParseError, "scatter table header mismatch");
  std::vector<ScatterRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 21)
      throw LmfError(ErrorCode::ParseError, "scatter line " + std::to_string(lineno) + ": expected 21 fields");
    ScatterRow r;
    try {
      r.label = f[0];
      r.n_eps = std::stoll(f[1]);
      r.alpha = parse_real(f[2]);
      r.l_min = std::stoll(f[3]);
      r.n_tail = std::stoll(f[4]);
      r.gamma_acf_nlls = parse_real(f[5]);
      r.gamma_acf_unbiased = parse_real(f[6]);
      r.gamma_psd_nlls = parse_real(f[7]);
      r.gamma_psd_unbiased = parse_real(f[8]);
      r.c0 = parse_real(f[9]);
      r.n_st_lmf = parse_real(f[10]);
      r.st_fraction = parse_real(f[14]);
      r.st_order_share = parse_real(f[15]);
      r.n_st_detected = std::stoll(f[16]);
      r.alpha_true = parse_real(f[17]);
      r.n_st_true = parse_real(f[18]);
      r.flags = split_codes(f[19]);
      r.warnings = split_codes(f[20]);
    } catch (const LmfError& e) {
      throw LmfError(ErrorCode::ParseError, "scatter line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::exception&) {
      throw LmfError(ErrorCode::ParseError, "scatter line " + std::to_string(lineno) + ": bad integer");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ScatterRow> read_scatter_csv(const std::filesystem::path& path) {
  return parse_scatter_csv(read_file(path));
}

std::string summary_json(const ScatterSummary& s) {
  using J = nlohmann::ordered_json;
  auto num = [](double v) { return std::isfinite(v) ? J(v) : J(nullptr); };
  auto reg = [&](const Regression& r) { return J{{"n", r.n}, {"slope", num(r.slope)}, {"intercept", num(r.intercept)}}; };
  J boxes = J::array();
  for (const auto& b : s.boxes)
    boxes.push_back(J{{"alpha_center", b.center},
                      {"n", b.n},
                      {"min", b.min},
                      {"q1", b.q1},
                      {"median", b.median},
                      {"q3", b.q3},
                      {"max", b.max}});
  J j{{"n_rows", s.n_rows},
      {"n_flagged", s.n_flagged},
      {"gamma_acf_on_alpha_minus_1", reg(s.gamma_on_alpha)},
      {"gamma_acf_on_true_alpha_minus_1", reg(s.gamma_on_alpha_true)},
      {"gamma_psd_on_alpha_minus_1", reg(s.gamma_psd_on_alpha)},
      {"gamma_acf_boxes", boxes},
      {"lower_bound", J{{"rows", s.lower_bound_rows}, {"holds", s.lower_bound_holds}}}};
  return j.dump(2) + "\n";
}

std::string ccdf_csv(const std::vector<CcdfSample>& samples) {
  std::ostringstream os;
  os << "label,length,ccdf\n";
  for (const auto& s : samples)
    for (const auto& p : s.points) os << s.label << ',' << p.length << ',' << format_real(p.ccdf) << '\n';
  return os.str();
}

std::vector<CcdfSample> read_ccdf_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "label,length,ccdf")
    throw LmfError(ErrorCode::ParseError, path.string() + ": ccdf header mismatch");
  std::vector<CcdfSample> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 3) throw LmfError(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno));
    if (out.empty() || out.back().label != f[0]) out.push_back({f[0], {}});
    try {
      out.back().points.push_back({std::stoll(f[1]), parse_real(f[2])});
    } catch (const std::exception&) {
      throw LmfError(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno));
    }
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  validate(config);
  PipelineResult result;
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) throw LmfError(ErrorCode::IoError, "cannot create " + config.output_dir.string() + ": " + ec.message());

  BiasTableConfig bias = config.bias;
  bias.threads = config.parallelism;
  const BiasTable table = load_or_build_bias_table(bias, config.bias_cache_dir, &result.bias_table_built);

  std::vector<MarketDatapoint> loaded;
  std::vector<SimConfig> sims;
  if (config.simulation) {
    sims = expand_batch(*config.simulation);
  } else {
    std::set<std::string> seen;
    for (const auto& path : config.inputs) {
      auto ing = ingest(path, config.ingest);
      for (const auto& d : ing.dropped)
        result.log.push_back({d.label, "dropped", "InsufficientData", d.reason});
      for (auto& dp : ing.datapoints) {
        if (!seen.insert(dp.label).second)
          throw LmfError(ErrorCode::InvalidConfig, "label '" + dp.label + "' appears in more than one input");
        loaded.push_back(std::move(dp));
      }
    }
    if (config.truth_path) attach_truth_json(loaded, *config.truth_path);
    std::sort(loaded.begin(), loaded.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  }

  const std::size_t n_tasks = config.simulation ? sims.size() : loaded.size();
  std::vector<DatapointAnalysis> analyses(n_tasks);
  parallel_for(n_tasks, config.parallelism, [&](std::size_t i) {
    if (config.simulation) {
      const MarketDatapoint dp = simulate(sims[i]);
      analyses[i] = analyze_datapoint(dp, config.analysis, table);
    } else {
      analyses[i] = analyze_datapoint(loaded[i], config.analysis, table);
    }
  });

  std::vector<CcdfSample> ccdfs;
  for (auto& a : analyses) {
    const auto& r = a.row;
    if (a.messages.empty()) {
      result.log.push_back({r.label, "ok", "", ""});
    } else {
      for (const auto& m : a.messages) {
        const auto colon = m.find(':');
        const std::string code = m.substr(0, colon);
        const bool is_flag = std::find(r.flags.begin(), r.flags.end(), code) != r.flags.end();
        std::string detail = colon == std::string::npos ? "" : m.substr(colon + 1);
        if (!detail.empty() && detail.front() == ' ') detail.erase(0, 1);
        std::replace(detail.begin(), detail.end(), '\t', ' ');
        std::replace(detail.begin(), detail.end(), '\n', ' ');
        result.log.push_back({r.label, is_flag ? "flagged" : "warning", code, detail});
      }
    }
    result.rows.push_back(r);
    if (!a.ccdf.points.empty()) ccdfs.push_back(std::move(a.ccdf));
  }
  result.summary = summarize_rows(result.rows, config.analysis.lower_bound_slack);

  result.scatter_path = config.output_dir / "scatter.csv";
  result.summary_path = config.output_dir / "summary.json";
  result.log_path = config.output_dir / "run_log.tsv";
  result.ccdf_path = config.output_dir / "ccdf.csv";
  write_file(result.scatter_path, scatter_csv(result.rows));
  write_file(result.summary_path, summary_json(result.summary));
  write_file(result.ccdf_path, ccdf_csv(ccdfs));
  std::ostringstream log;
  log << "label\tstatus\tcode\tdetail\n";
  for (const auto& e : result.log) log << e.label << '\t' << e.status << '\t' << e.code << '\t' << e.detail << '\n';
  write_file(result.log_path, log.str());

  if (config.plots) {
    try {
      emit_plots(result.rows, ccdfs, config.output_dir, config.analysis.lower_bound_slack);
    } catch (const LmfError& e) {
      if (e.code() != ErrorCode::NothingToPlot) throw;
      result.log.push_back({"*", "warning", "NothingToPlot", "every row is flagged"});
      log << "*\twarning\tNothingToPlot\tevery row is flagged\n";
      write_file(result.log_path, log.str());
    }
  }
  return result;
}

}  // namespace lmf
