#pragma once

#include <cmath>
#include <optional>

#include "lmf/correlation.hpp"

namespace lmf {

/// alpha = gamma + 1. Throws LmfError(OutsideLmfRegime) unless gamma in (0,1).
double alpha_from_gamma(double gamma);

/// N = [(gamma+1) c0]^{-1/(1-gamma)}.
/// Throws LmfError(OutsideLmfRegime) for gamma outside (0,1), LmfError(InvalidPrefactor) for c0 <= 0.
double n_st_lmf(double c0, double gamma);

struct TruthComparison {
  double n_st_true = 0.0;
  double log10_ratio = 0.0;
};

struct MicroEstimate {
  double gamma = 0.0;
  double alpha_from_gamma = 0.0;
  double c0 = 0.0;
  double n_st_lmf = 0.0;
  FitMethod method = FitMethod::Acf;
  bool valid = false;
  bool below_one = false;  // (gamma+1) c0 >= 1
  std::optional<TruthComparison> comparison;
};

/// Never throws; out-of-regime input yields valid = false.
MicroEstimate micro_estimate(double gamma, double c0, FitMethod method,
                             std::optional<double> truth_n_st = std::nullopt);

inline const double kDefaultLowerBoundSlack = std::pow(10.0, 0.15);

struct LowerBoundResult {
  bool holds = false;
  double log10_ratio = 0.0;
};

LowerBoundResult lower_bound_check(double n_st_lmf, double truth_n_st, double slack = kDefaultLowerBoundSlack);
LowerBoundResult lower_bound_check(const MicroEstimate& estimate, double truth_n_st,
                                   double slack = kDefaultLowerBoundSlack);

}  // namespace lmf
