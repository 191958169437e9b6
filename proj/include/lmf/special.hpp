#pragma once

#include <cstdint>
#include <utility>

namespace lmf {

/// Hurwitz zeta  sum_{k>=0} (k+q)^{-s}  for s > 1, q > 0, by direct
/// summation plus an Euler-Maclaurin tail.
double hurwitz_zeta(double s, double q);

/// (zeta(s,q), d/ds zeta(s,q)) evaluated together.
std::pair<double, double> hurwitz_zeta_with_derivative(double s, double q);

inline double riemann_zeta(double s) { return hurwitz_zeta(s, 1.0); }

/// Binomial pmf P(X = k), X ~ Bin(n, p), via the saddle-point expansion
/// (stirlerr/bd0), accurate to a few ulps in relative terms.
double binomial_pmf(std::int64_t k, std::int64_t n, double p);

/// P(Bin(n, 1/2) >= k) by exact tail summation.
double binomial_upper_tail_half(std::int64_t n, std::int64_t k);

}  // namespace lmf
