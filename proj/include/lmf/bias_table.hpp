#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "lmf/correlation.hpp"

namespace lmf {

struct BiasTableConfig {
  std::vector<double> gamma_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::int64_t> n_eps_grid{100'000, 1'000'000, 10'000'000};
  int reps = 20;
  int n_st = 100;
  std::uint64_t seed = 7;
  AcfOptions acf;
  PsdOptions psd;
  bool with_psd = true;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Throws LmfError(InvalidConfig).
void validate(const BiasTableConfig& config);

/// Canonical text of every setting that influences table contents.
std::string canonical_string(const BiasTableConfig& config);
std::uint64_t config_hash(const BiasTableConfig& config);

/// Per-method statistics of one (gamma_true, n_eps) cell.
struct MethodCell {
  int n_ok = 0;
  double mean_gamma = 0.0;       // raw Monte Carlo mean of gamma_nlls
  double sd_gamma = 0.0;
  double iso_gamma = 0.0;        // after isotonic regression in gamma_true
  double log10_c0_ratio = 0.0;   // mean log10(prefactor refit at gamma_true / N^{alpha-2}/alpha)
  bool usable = false;
};

struct BiasCell {
  double gamma_true = 0.0;
  std::int64_t n_eps = 0;
  int reps = 0;
  MethodCell acf;
  MethodCell psd;

  const MethodCell& method(FitMethod m) const { return m == FitMethod::Acf ? acf : psd; }
  MethodCell& method(FitMethod m) { return m == FitMethod::Acf ? acf : psd; }
};

struct DebiasResult {
  double gamma = 0.0;
  bool clamped = false;
};

class BiasTable {
 public:
  BiasTable() = default;
  BiasTable(BiasTableConfig config, std::vector<BiasCell> cells);

  const BiasTableConfig& config() const { return config_; }
  const std::vector<BiasCell>& cells() const { return cells_; }
  const BiasCell& cell(std::size_t gamma_index, std::size_t n_index) const;
  std::uint64_t hash() const { return config_hash(config_); }

  /// Isotonic mean gamma_nlls at gamma_true, linear in gamma_true and log10 n_eps.
  double forward(FitMethod method, double gamma_true, std::int64_t n_eps) const;

  /// Inverse of the forward map. Within one gamma grid spacing outside the
  /// table image the result is clamped and flagged; beyond that it throws
  /// LmfError(OutOfCalibration).
  DebiasResult debias(FitMethod method, double gamma_nlls, std::int64_t n_eps) const;

  /// Interpolated log10 prefactor ratio at (gamma_true, n_eps).
  double log10_c0_ratio(FitMethod method, double gamma_true, std::int64_t n_eps) const;

  std::string to_json() const;
  static BiasTable from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static BiasTable load(const std::filesystem::path& path);

 private:
  struct Curve {
    std::vector<double> x;  // gamma_true knots
    std::vector<double> y;  // isotonic mean gamma_nlls
    std::vector<double> r;  // log10 prefactor ratio
  };
  Curve curve_at(FitMethod method, std::int64_t n_eps) const;

  BiasTableConfig config_;
  std::vector<BiasCell> cells_;  // gamma-major: cells_[g * n_grid + n]
};

/// Pool-adjacent-violators fit, non-decreasing, weighted.
std::vector<double> isotonic_increasing(const std::vector<double>& y, const std::vector<double>& w);

using BiasProgress = std::function<void(std::size_t done, std::size_t total)>;

/// Monte Carlo calibration: reps LMF runs per cell (alpha = gamma_true + 1,
/// homogeneous), full ACF and PSD routes. Cells with more than half of the
/// runs failing are marked unusable.
BiasTable build_bias_table(const BiasTableConfig& config, const BiasProgress& progress = {});

std::filesystem::path bias_cache_path(const BiasTableConfig& config, const std::filesystem::path& cache_dir);

/// Reads cache_dir/bias_<hash>.json when present, otherwise builds and writes it.
BiasTable load_or_build_bias_table(const BiasTableConfig& config, const std::filesystem::path& cache_dir,
                                   bool* built = nullptr, const BiasProgress& progress = {});

/// Throws LmfError(OutOfCalibration). `clamped` is set when the value was
/// pulled back onto the table range.
double debias_gamma(double gamma_nlls, std::int64_t n_eps, const BiasTable& table,
                    FitMethod method = FitMethod::Acf, bool* clamped = nullptr);

}  // namespace lmf
