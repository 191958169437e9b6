#include "lmf/inference.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lmf/errors.hpp"

namespace lmf {

namespace {

void require_regime(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw LmfError(ErrorCode::OutsideLmfRegime, "gamma " + std::to_string(gamma) + " outside (0,1)");
}

}  // namespace

double alpha_from_gamma(double gamma) {
  require_regime(gamma);
  return gamma + 1.0;
}

double n_st_lmf(double c0, double gamma) {
  require_regime(gamma);
  if (!(c0 > 0.0) || !std::isfinite(c0))
    throw LmfError(ErrorCode::InvalidPrefactor, "prefactor " + std::to_string(c0) + " must be positive");
  return std::exp(-std::log((gamma + 1.0) * c0) / (1.0 - gamma));
}

MicroEstimate micro_estimate(double gamma, double c0, FitMethod method, std::optional<double> truth_n_st) {
  MicroEstimate m;
  m.gamma = gamma;
  m.c0 = c0;
  m.method = method;
  if (!(gamma > 0.0 && gamma < 1.0) || !(c0 > 0.0) || !std::isfinite(c0)) return m;
  m.alpha_from_gamma = alpha_from_gamma(gamma);
  m.n_st_lmf = n_st_lmf(c0, gamma);
  m.valid = m.n_st_lmf > 0.0 && std::isfinite(m.n_st_lmf);
  m.below_one = (gamma + 1.0) * c0 >= 1.0;
  if (m.valid && truth_n_st && *truth_n_st > 0.0)
    m.comparison = TruthComparison{*truth_n_st, std::log10(m.n_st_lmf / *truth_n_st)};
  return m;
}

LowerBoundResult lower_bound_check(double estimate, double truth, double slack) {
  LowerBoundResult r;
  r.log10_ratio = std::log10(estimate / truth);
  r.holds = estimate <= truth * slack;
  return r;
}

LowerBoundResult lower_bound_check(const MicroEstimate& estimate, double truth, double slack) {
  if (!estimate.valid) return {false, std::numeric_limits<double>::quiet_NaN()};
  return lower_bound_check(estimate.n_st_lmf, truth, slack);
}

}  // namespace lmf
