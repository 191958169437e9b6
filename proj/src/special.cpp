#include "lmf/special.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lmf {
namespace {

// B_{2j} / (2j)!  for j = 1..10
constexpr std::array<double, 10> kBernoulliOverFactorial = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
    -174611.0 / 330.0 / 2432902008176640000.0,
};

int direct_terms(double s) { return 10 + static_cast<int>(std::ceil(s)); }

}  // namespace

double hurwitz_zeta(double s, double q) { return hurwitz_zeta_with_derivative(s, q).first; }

std::pair<double, double> hurwitz_zeta_with_derivative(double s, double q) {
  if (!(s > 1.0)) throw std::domain_error("hurwitz_zeta requires s > 1");
  if (!(q > 0.0)) throw std::domain_error("hurwitz_zeta requires q > 0");

  const int n = direct_terms(s);
  double value = 0.0;
  double deriv = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    const double x = q + k;
    const double lx = std::log(x);
    const double t = std::exp(-s * lx);
    value += t;
    deriv -= lx * t;
  }

  const double x = q + n;
  const double lx = std::log(x);
  const double x_s = std::exp(-s * lx);  // x^{-s}
  const double x_1s = x * x_s;           // x^{1-s}

  value += x_1s / (s - 1.0) + 0.5 * x_s;
  deriv += -lx * x_1s / (s - 1.0) - x_1s / ((s - 1.0) * (s - 1.0)) - 0.5 * lx * x_s;

  // Euler-Maclaurin corrections: B_{2j}/(2j)! (s)_{2j-1} x^{-s-2j+1}
  double rising = s;              // (s)_1
  double rising_log_deriv = 1.0 / s;
  double x_pow = x_s / x;         // x^{-s-1}
  const double inv_x2 = 1.0 / (x * x);
  for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
    const double c = kBernoulliOverFactorial[j];
    const double term = c * rising * x_pow;
    value += term;
    deriv += term * (rising_log_deriv - lx);
    // advance (s)_{2j-1} -> (s)_{2j+1}
    const double a = s + 2.0 * j + 1.0;
    const double b = s + 2.0 * j + 2.0;
    rising *= a * b;
    rising_log_deriv += 1.0 / a + 1.0 / b;
    x_pow *= inv_x2;
  }
  return {value, deriv};
}

namespace {

// log(n!) - log(sqrt(2 pi n) (n/e)^n)
double stirlerr(double n) {
  constexpr double S0 = 1.0 / 12.0;
  constexpr double S1 = 1.0 / 360.0;
  constexpr double S2 = 1.0 / 1260.0;
  constexpr double S3 = 1.0 / 1680.0;
  constexpr double S4 = 1.0 / 1188.0;
  if (n <= 15.0) {
    const long double nl = n;
    const long double v = std::lgamma(nl + 1.0L) - (nl + 0.5L) * std::log(nl) + nl -
                          0.5L * std::log(2.0L * std::numbers::pi_v<long double>);
    return static_cast<double>(v);
  }
  const double nn = n * n;
  if (n > 500) return (S0 - S1 / nn) / n;
  if (n > 80) return (S0 - (S1 - S2 / nn) / nn) / n;
  if (n > 35) return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n;
  return (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n;
}

// x log(x/np) + np - x, computed without cancellation near x = np
double bd0(double x, double np) {
  if (std::fabs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

}  // namespace

double binomial_pmf(std::int64_t k, std::int64_t n, double p) {
  if (n < 0 || p < 0.0 || p > 1.0) throw std::domain_error("binomial_pmf: bad arguments");
  if (k < 0 || k > n) return 0.0;
  const double q = 1.0 - p;
  const double x = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (q == 0.0) return k == n ? 1.0 : 0.0;
  if (k == 0) {
    if (n == 0) return 1.0;
    const double lc = (p < 0.1) ? -bd0(nd, nd * q) - nd * p : nd * std::log(q);
    return std::exp(lc);
  }
  if (k == n) {
    const double lc = (q < 0.1) ? -bd0(nd, nd * p) - nd * q : nd * std::log(p);
    return std::exp(lc);
  }
  const double lc = stirlerr(nd) - stirlerr(x) - stirlerr(nd - x) - bd0(x, nd * p) -
                    bd0(nd - x, nd * q);
  const double lf = std::log(2.0 * std::numbers::pi) + std::log(x) + std::log1p(-x / nd);
  return std::exp(lc - 0.5 * lf);
}

double binomial_upper_tail_half(std::int64_t n, std::int64_t k) {
  if (n < 0) throw std::domain_error("binomial_upper_tail_half: n < 0");
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;

  if (n <= 1000) {
    // C(n, j) stays finite; scale by 2^-n once at the end
    if (2 * k > n) {
      double t = 1.0, sum = 0.0;
      for (std::int64_t j = n; j >= k; --j) {
        sum += t;
        t *= static_cast<double>(j) / static_cast<double>(n - j + 1);
      }
      return std::ldexp(sum, static_cast<int>(-n));
    }
    double t = 1.0, sum = 0.0;
    for (std::int64_t j = 0; j < k; ++j) {
      sum += t;
      t *= static_cast<double>(n - j) / static_cast<double>(j + 1);
    }
    return 1.0 - std::ldexp(sum, static_cast<int>(-n));
  }

  if (2 * k > n) {
    // upper tail directly; terms decrease from k upward
    double t = binomial_pmf(k, n, 0.5);
    double sum = 0.0;
    for (std::int64_t j = k; j <= n; ++j) {
      sum += t;
      if (t < sum * 1e-18) break;
      t *= static_cast<double>(n - j) / static_cast<double>(j + 1);
    }
    return std::min(sum, 1.0);
  }
  // 1 - P(X <= k-1); the lower tail is at most one half here
  double t = binomial_pmf(k - 1, n, 0.5);
  double sum = 0.0;
  for (std::int64_t j = k - 1; j >= 0; --j) {
    sum += t;
    if (t < sum * 1e-18) break;
    t *= static_cast<double>(j) / static_cast<double>(n - j + 1);
  }
  return std::max(0.0, 1.0 - sum);
}

}  // namespace lmf
