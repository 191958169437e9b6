#include "lmf/bias_table.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "lmf/errors.hpp"
#include "lmf/parallel.hpp"
#include "lmf/rng.hpp"
#include "lmf/simulator.hpp"

namespace lmf {

using nlohmann::json;

void validate(const BiasTableConfig& c) {
  if (c.gamma_grid.empty() || c.n_eps_grid.empty()) throw LmfError(ErrorCode::InvalidConfig, "empty bias grid");
  if (c.reps < 20) throw LmfError(ErrorCode::InvalidConfig, "bias table needs reps >= 20");
  if (c.n_st < 1) throw LmfError(ErrorCode::InvalidConfig, "n_st must be >= 1");
  for (std::size_t i = 0; i < c.gamma_grid.size(); ++i) {
    const double g = c.gamma_grid[i];
    if (!(g > 0.0 && g < 1.0)) throw LmfError(ErrorCode::InvalidConfig, "gamma grid must lie in (0,1)");
    if (i > 0 && !(g > c.gamma_grid[i - 1])) throw LmfError(ErrorCode::InvalidConfig, "gamma grid must increase");
  }
  for (std::size_t i = 0; i < c.n_eps_grid.size(); ++i) {
    if (c.n_eps_grid[i] < 1000) throw LmfError(ErrorCode::InvalidConfig, "n_eps grid values must be >= 1000");
    if (i > 0 && c.n_eps_grid[i] <= c.n_eps_grid[i - 1])
      throw LmfError(ErrorCode::InvalidConfig, "n_eps grid must increase");
  }
}

std::string canonical_string(const BiasTableConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "v1|gamma=";
  for (double g : c.gamma_grid) os << g << ',';
  os << "|n=";
  for (auto n : c.n_eps_grid) os << n << ',';
  os << "|reps=" << c.reps << "|n_st=" << c.n_st << "|seed=" << c.seed;
  const auto& a = c.acf;
  os << "|acf=" << a.bins_per_decade << ',' << static_cast<int>(a.range.rule) << ',' << a.range.noise_q << ','
     << a.range.cap_fraction << ',' << a.range.min_decades << ',' << a.range.plateau_max_lag << ','
     << a.range.plateau_scale << ',' << a.range.span_decades << ',' << a.range.min_bins << ','
     << static_cast<int>(a.estimator) << ',' << a.nlls.max_iterations << ',' << a.nlls.relative_step_tol << ',' << a.nlls.min_points;
  const auto& p = c.psd;
  os << "|psd=" << c.with_psd << ',' << p.segment_length << ',' << p.overlap << ',' << p.bins_per_decade << ','
     << p.noise_q << ',' << p.plateau_min_freq << ',' << p.min_decades << ',' << p.min_bins << ','
     << p.subtract_segment_mean << ',' << p.nlls.max_iterations << ',' << p.nlls.relative_step_tol << ','
     << p.nlls.min_points;
  return os.str();
}

std::uint64_t config_hash(const BiasTableConfig& config) { return fnv1a64(canonical_string(config)); }

std::vector<double> isotonic_increasing(const std::vector<double>& y, const std::vector<double>& w) {
  struct Block {
    double value, weight;
    std::size_t len;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], w.empty() ? 1.0 : w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
      Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      const double wt = a.weight + b.weight;
      a.value = (a.value * a.weight + b.value * b.weight) / wt;
      a.weight = wt;
      a.len += b.len;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks) out.insert(out.end(), b.len, b.value);
  return out;
}

BiasTable::BiasTable(BiasTableConfig config, std::vector<BiasCell> cells)
    : config_(std::move(config)), cells_(std::move(cells)) {
  if (cells_.size() != config_.gamma_grid.size() * config_.n_eps_grid.size())
    throw LmfError(ErrorCode::InvalidConfig, "bias table cell count does not match its grids");
}

const BiasCell& BiasTable::cell(std::size_t g, std::size_t n) const {
  return cells_.at(g * config_.n_eps_grid.size() + n);
}

BiasTable::Curve BiasTable::curve_at(FitMethod method, std::int64_t n_eps) const {
  const auto& grid = config_.n_eps_grid;
  if (method == FitMethod::Psd && !config_.with_psd)
    throw LmfError(ErrorCode::OutOfCalibration, "table was built without the spectral route");
  if (n_eps <= 0) throw LmfError(ErrorCode::OutOfCalibration, "n_eps must be positive");
  const double ln = std::log10(static_cast<double>(n_eps));
  std::vector<double> lg(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) lg[i] = std::log10(static_cast<double>(grid[i]));

  // bracketing grid indices and weight on the upper one
  std::size_t i0 = 0, i1 = 0;
  double t = 0.0;
  if (grid.size() == 1) {
    if (std::abs(ln - lg[0]) > 1.0 + 1e-9)
      throw LmfError(ErrorCode::OutOfCalibration, "n_eps more than one decade from the single table column");
  } else if (ln <= lg.front()) {
    if (lg.front() - ln > (lg[1] - lg[0]) + 1e-9)
      throw LmfError(ErrorCode::OutOfCalibration, "n_eps below the table by more than one grid step");
  } else if (ln >= lg.back()) {
    const std::size_t k = lg.size() - 1;
    if (ln - lg[k] > (lg[k] - lg[k - 1]) + 1e-9)
      throw LmfError(ErrorCode::OutOfCalibration, "n_eps above the table by more than one grid step");
    i0 = i1 = k;
  } else {
    while (i1 < lg.size() && lg[i1] < ln) ++i1;
    i0 = i1 - 1;
    t = (ln - lg[i0]) / (lg[i1] - lg[i0]);
  }

  Curve c;
  for (std::size_t g = 0; g < config_.gamma_grid.size(); ++g) {
    const MethodCell& a = cell(g, i0).method(method);
    const MethodCell& b = cell(g, i1).method(method);
    const bool need_a = t < 1.0, need_b = t > 0.0;
    if ((need_a && !a.usable) || (need_b && !b.usable)) continue;
    const double ya = need_a ? a.iso_gamma : 0.0, yb = need_b ? b.iso_gamma : 0.0;
    const double ra = need_a ? a.log10_c0_ratio : 0.0, rb = need_b ? b.log10_c0_ratio : 0.0;
    c.x.push_back(config_.gamma_grid[g]);
    c.y.push_back((1.0 - t) * ya + t * yb);
    c.r.push_back((1.0 - t) * ra + t * rb);
  }
  if (c.x.size() < 2) throw LmfError(ErrorCode::CellUnusable, "fewer than two usable cells at this n_eps");
  return c;
}

namespace {

double interp(const std::vector<double>& x, const std::vector<double>& y, double v) {
  if (v <= x.front()) return y.front();
  if (v >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), v);
  const std::size_t k = static_cast<std::size_t>(it - x.begin());
  const double t = (v - x[k - 1]) / (x[k] - x[k - 1]);
  return y[k - 1] + t * (y[k] - y[k - 1]);
}

}  // namespace

double BiasTable::forward(FitMethod method, double gamma_true, std::int64_t n_eps) const {
  const Curve c = curve_at(method, n_eps);
  return interp(c.x, c.y, gamma_true);
}

double BiasTable::log10_c0_ratio(FitMethod method, double gamma_true, std::int64_t n_eps) const {
  const Curve c = curve_at(method, n_eps);
  return interp(c.x, c.r, gamma_true);
}

DebiasResult BiasTable::debias(FitMethod method, double g, std::int64_t n_eps) const {
  if (!std::isfinite(g)) throw LmfError(ErrorCode::OutOfCalibration, "non-finite gamma_nlls");
  const Curve c = curve_at(method, n_eps);
  const std::size_t k = c.x.size();
  const double lo = c.y.front(), hi = c.y.back();
  const double step = (c.x.back() - c.x.front()) / static_cast<double>(k - 1);
  if (g < lo) {
    if (lo - g > step) throw LmfError(ErrorCode::OutOfCalibration, "gamma_nlls below the table image");
    return {c.x.front(), true};
  }
  if (g > hi) {
    if (g - hi > step) throw LmfError(ErrorCode::OutOfCalibration, "gamma_nlls above the table image");
    return {c.x.back(), true};
  }
  // first and last knot segments touching g; a flat run maps to its midpoint
  double first = c.x.back(), last = c.x.front();
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const double y0 = c.y[i], y1 = c.y[i + 1];
    if (g < y0 || g > y1) continue;
    double xg;
    if (y1 > y0) {
      xg = c.x[i] + (g - y0) / (y1 - y0) * (c.x[i + 1] - c.x[i]);
      first = std::min(first, xg);
      last = std::max(last, xg);
    } else {
      first = std::min(first, c.x[i]);
      last = std::max(last, c.x[i + 1]);
    }
  }
  return {0.5 * (first + last), false};
}

namespace {

json method_to_json(const MethodCell& m) {
  return json{{"n_ok", m.n_ok},          {"mean_gamma", m.mean_gamma}, {"sd_gamma", m.sd_gamma},
              {"iso_gamma", m.iso_gamma}, {"log10_c0_ratio", m.log10_c0_ratio}, {"usable", m.usable}};
}

MethodCell method_from_json(const json& j) {
  MethodCell m;
  m.n_ok = j.at("n_ok").get<int>();
  m.mean_gamma = j.at("mean_gamma").get<double>();
  m.sd_gamma = j.at("sd_gamma").get<double>();
  m.iso_gamma = j.at("iso_gamma").get<double>();
  m.log10_c0_ratio = j.at("log10_c0_ratio").get<double>();
  m.usable = j.at("usable").get<bool>();
  return m;
}

}  // namespace

std::string BiasTable::to_json() const {
  json cells = json::array();
  for (const auto& c : cells_)
    cells.push_back(json{{"gamma_true", c.gamma_true},
                         {"n_eps", c.n_eps},
                         {"reps", c.reps},
                         {"acf", method_to_json(c.acf)},
                         {"psd", method_to_json(c.psd)}});
  json j{{"hash", hash()},
         {"config", canonical_string(config_)},
         {"gamma_grid", config_.gamma_grid},
         {"n_eps_grid", config_.n_eps_grid},
         {"cells", cells}};
  return j.dump(1);
}

BiasTable BiasTable::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw LmfError(ErrorCode::ParseError, std::string("bias table: ") + e.what());
  }
  try {
    BiasTableConfig cfg;
    cfg.gamma_grid = j.at("gamma_grid").get<std::vector<double>>();
    cfg.n_eps_grid = j.at("n_eps_grid").get<std::vector<std::int64_t>>();
    std::vector<BiasCell> cells;
    for (const auto& cj : j.at("cells")) {
      BiasCell c;
      c.gamma_true = cj.at("gamma_true").get<double>();
      c.n_eps = cj.at("n_eps").get<std::int64_t>();
      c.reps = cj.at("reps").get<int>();
      c.acf = method_from_json(cj.at("acf"));
      c.psd = method_from_json(cj.at("psd"));
      cells.push_back(c);
    }
    return BiasTable(std::move(cfg), std::move(cells));
  } catch (const json::exception& e) {
    throw LmfError(ErrorCode::ParseError, std::string("bias table: ") + e.what());
  }
}

void BiasTable::save(const std::filesystem::path& path) const {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw LmfError(ErrorCode::IoError, "cannot write " + tmp);
    out << to_json() << '\n';
    if (!out) throw LmfError(ErrorCode::IoError, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw LmfError(ErrorCode::IoError, "cannot move table into " + path.string() + ": " + ec.message());
}

BiasTable BiasTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LmfError(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

namespace {

struct RunResult {
  bool acf_ok = false, psd_ok = false;
  double acf_gamma = 0.0, psd_gamma = 0.0;
  double acf_ratio = 0.0, psd_ratio = 0.0;
};

void summarize(MethodCell& m, const std::vector<RunResult>& runs, bool acf, int reps) {
  double s = 0.0, s2 = 0.0, r = 0.0;
  int ok = 0;
  for (const auto& run : runs) {
    if (acf ? !run.acf_ok : !run.psd_ok) continue;
    const double g = acf ? run.acf_gamma : run.psd_gamma;
    s += g;
    s2 += g * g;
    r += acf ? run.acf_ratio : run.psd_ratio;
    ++ok;
  }
  m.n_ok = ok;
  m.usable = 2 * ok >= reps && ok > 0;
  if (ok > 0) {
    m.mean_gamma = s / ok;
    m.sd_gamma = ok > 1 ? std::sqrt(std::max(0.0, (s2 - s * s / ok) / (ok - 1))) : 0.0;
    m.log10_c0_ratio = r / ok;
  }
  m.iso_gamma = m.mean_gamma;
}

void apply_isotonic(std::vector<BiasCell>& cells, std::size_t n_gamma, std::size_t n_n, FitMethod method) {
  for (std::size_t n = 0; n < n_n; ++n) {
    std::vector<std::size_t> idx;
    std::vector<double> y, w;
    for (std::size_t g = 0; g < n_gamma; ++g) {
      const auto& m = cells[g * n_n + n].method(method);
      if (!m.usable) continue;
      idx.push_back(g * n_n + n);
      y.push_back(m.mean_gamma);
      w.push_back(m.n_ok);
    }
    const auto iso = isotonic_increasing(y, w);
    for (std::size_t k = 0; k < idx.size(); ++k) cells[idx[k]].method(method).iso_gamma = iso[k];
  }
}

}  // namespace

BiasTable build_bias_table(const BiasTableConfig& config, const BiasProgress& progress) {
  validate(config);
  const std::size_t ng = config.gamma_grid.size(), nn = config.n_eps_grid.size();
  const std::size_t reps = static_cast<std::size_t>(config.reps);
  const std::size_t total = ng * nn * reps;
  std::vector<RunResult> runs(total);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;

  // largest series first so the pool drains evenly
  std::vector<std::size_t> order(total);
  for (std::size_t i = 0; i < total; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return config.n_eps_grid[(a / reps) % nn] > config.n_eps_grid[(b / reps) % nn];
  });

  parallel_for(total, config.threads, [&](std::size_t k) {
    const std::size_t task = order[k];
    const std::size_t rep = task % reps;
    const std::size_t n = (task / reps) % nn;
    const std::size_t g = task / (reps * nn);
    const double gamma = config.gamma_grid[g];
    SimConfig sim;
    sim.alpha = gamma + 1.0;
    sim.n_st = config.n_st;
    sim.n_steps = config.n_eps_grid[n];
    sim.log_metaorders = false;
    char label[96];
    std::snprintf(label, sizeof label, "bias/g=%.6g/n=%lld/r=%zu", gamma,
                  static_cast<long long>(config.n_eps_grid[n]), rep);
    sim.seed = derive_seed(config.seed, label);
    const SignSeries series = simulate_signs(sim);
    const double c0_true = theoretical_prefactor(sim.alpha, config.n_st);

    RunResult& out = runs[task];
    try {
      const auto a = analyze_acf(series, config.acf);
      out.acf_gamma = a.fit.gamma_nlls;
      out.acf_ratio = std::log10(prefactor_at_gamma(a, gamma) / c0_true);
      out.acf_ok = std::isfinite(out.acf_gamma) && std::isfinite(out.acf_ratio);
    } catch (const LmfError&) {
      out.acf_ok = false;
    }
    if (config.with_psd) {
      try {
        const auto p = analyze_psd(series, config.psd);
        out.psd_gamma = p.fit.gamma_nlls;
        out.psd_ratio = std::log10(prefactor_at_gamma(p, gamma) / c0_true);
        out.psd_ok = std::isfinite(out.psd_gamma) && std::isfinite(out.psd_ratio);
      } catch (const LmfError&) {
        out.psd_ok = false;
      }
    }
    const std::size_t d = ++done;
    if (progress) {
      std::lock_guard lock(progress_mu);
      progress(d, total);
    }
  });

  std::vector<BiasCell> cells(ng * nn);
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t n = 0; n < nn; ++n) {
      BiasCell& c = cells[g * nn + n];
      c.gamma_true = config.gamma_grid[g];
      c.n_eps = config.n_eps_grid[n];
      c.reps = config.reps;
      const std::size_t base = (g * nn + n) * reps;
      std::vector<RunResult> slice(runs.begin() + static_cast<std::ptrdiff_t>(base),
                                   runs.begin() + static_cast<std::ptrdiff_t>(base + reps));
      summarize(c.acf, slice, true, config.reps);
      if (config.with_psd) summarize(c.psd, slice, false, config.reps);
    }
  }
  apply_isotonic(cells, ng, nn, FitMethod::Acf);
  if (config.with_psd) apply_isotonic(cells, ng, nn, FitMethod::Psd);
  return BiasTable(config, std::move(cells));
}

std::filesystem::path bias_cache_path(const BiasTableConfig& config, const std::filesystem::path& cache_dir) {
  char name[64];
  std::snprintf(name, sizeof name, "bias_%016llx.json", static_cast<unsigned long long>(config_hash(config)));
  return cache_dir / name;
}

BiasTable load_or_build_bias_table(const BiasTableConfig& config, const std::filesystem::path& cache_dir,
                                   bool* built, const BiasProgress& progress) {
  validate(config);
  const auto path = bias_cache_path(config, cache_dir);
  if (std::filesystem::exists(path)) {
    BiasTable cached = BiasTable::load(path);
    if (cached.config().gamma_grid == config.gamma_grid && cached.config().n_eps_grid == config.n_eps_grid) {
      if (built) *built = false;
      return BiasTable(config, cached.cells());
    }
  }
  BiasTable table = build_bias_table(config, progress);
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  if (ec) throw LmfError(ErrorCode::IoError, "cannot create " + cache_dir.string() + ": " + ec.message());
  table.save(path);
  if (built) *built = true;
  return table;
}

double debias_gamma(double gamma_nlls, std::int64_t n_eps, const BiasTable& table, FitMethod method, bool* clamped) {
  const auto r = table.debias(method, gamma_nlls, n_eps);
  if (clamped) *clamped = r.clamped;
  return r.gamma;
}

}  // namespace lmf
