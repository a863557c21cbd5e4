#include "efc/special.hpp"

#include <cmath>
#include <limits>

#include "efc/errors.hpp"

namespace efc::special {

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) throw DomainError("log_binomial: need 0 <= k <= n");
  if (k == 0 || k == n) return 0.0;
  return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
         std::lgamma(double(n - k) + 1.0);
}

namespace {

constexpr int kItMax = 500;
constexpr double kEps = 1e-16;

// Lower incomplete gamma by power series, returns P(a, x).
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kItMax; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * kEps)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw QuadratureFailure("incomplete gamma series did not converge");
}

// Upper incomplete gamma by Lentz continued fraction, returns Q(a, x).
double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kItMax; ++i) {
    double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps)
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  }
  throw QuadratureFailure("incomplete gamma continued fraction did not converge");
}

}  // namespace

double reg_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("reg_gamma_p: need a > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double reg_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("reg_gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double upper_gamma(double a, double x) {
  // Q * Gamma(a); both factors are well scaled for the a, x ranges used here
  // (a <= ~20, so Gamma(a) stays far from overflow).
  return reg_gamma_q(a, x) * std::tgamma(a);
}

double chi_square_sf(double stat, double df) {
  if (!(df > 0.0)) throw DomainError("chi_square_sf: need df > 0");
  if (stat <= 0.0) return 1.0;
  return reg_gamma_q(0.5 * df, 0.5 * stat);
}

double log1p_plus(double x) {
  if (!(x >= 0.0) || x >= 1.0) throw DomainError("log1p_plus: need 0 <= x < 1");
  if (x > 1e-3) return std::log1p(-x) + x;
  // -(x^2/2 + x^3/3 + ...); at x <= 1e-3 eight terms reach 2^-53 relative.
  double term = x * x;
  double sum = 0.0;
  for (int j = 2; j <= 12; ++j) {
    sum += term / j;
    term *= x;
    if (term < sum * 1e-18) break;
  }
  return -sum;
}

double expm1_minus(double u) {
  if (std::fabs(u) > 1e-2) return std::expm1(u) - u;
  double term = u * u / 2.0;
  double sum = 0.0;
  for (int j = 3; j <= 16; ++j) {
    sum += term;
    term *= u / j;
    if (std::fabs(term) < std::fabs(sum) * 1e-18) break;
  }
  return sum;
}

double binom_mean_excess(std::int64_t n, double x) {
  if (n < 0 || !(x >= 0.0) || x >= 1.0)
    throw DomainError("binom_mean_excess: need n >= 0, 0 <= x < 1");
  if (x == 0.0 || n < 2) return 0.0;
  const double nd = double(n);
  if (nd * x > 1e-2) return nd * x - 1.0 + std::exp(nd * std::log1p(-x));
  // n x - 1 + (1-x)^n  ==  [expm1(u) - u] + n [log1p(-x) + x],  u = n log1p(-x).
  // Each bracket is O((n x)^2); the naive form cancels to noise here.
  const double u = nd * std::log1p(-x);
  return expm1_minus(u) + nd * log1p_plus(x);
}

double binom_tail_ge2(std::int64_t n, double x) {
  if (n < 0 || !(x >= 0.0) || x >= 1.0)
    throw DomainError("binom_tail_ge2: need n >= 0, 0 <= x < 1");
  if (x == 0.0 || n < 2) return 0.0;
  const double m = double(n - 1);
  const double L = std::log1p(-x);
  if (m * x > 1e-2) {
    const double w = std::exp(m * L);  // (1-x)^{n-1}
    return 1.0 - w * (1.0 + m * x);
  }
  // 1 - (1-x)^{n-1} (1 + (n-1) x) regrouped into O((m x)^2) pieces.
  const double v = m * L;
  const double ev = std::expm1(v);
  return -(expm1_minus(v) + m * log1p_plus(x) + m * x * ev);
}

}  // namespace efc::special
