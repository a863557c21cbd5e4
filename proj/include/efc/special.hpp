#pragma once

#include <cstdint>

// Small special-function kit: log-binomial, regularized incomplete gamma,
// and numerically stable forms of the two binomial remainder weights that
// appear in the coagulation rate integrals.

namespace efc::special {

// log C(n, k); requires 0 <= k <= n.
double log_binomial(std::int64_t n, std::int64_t k);

// Regularized incomplete gamma P(a, x) (lower) and Q(a, x) = 1 - P(a, x).
// a > 0, x >= 0. Series for x < a + 1, continued fraction otherwise.
double reg_gamma_p(double a, double x);
double reg_gamma_q(double a, double x);

// Unnormalized upper gamma: integral of t^{a-1} e^{-t} over (x, inf).
double upper_gamma(double a, double x);

// Survival function of the chi-square distribution with df degrees of freedom.
double chi_square_sf(double stat, double df);

// P(Bin(n, x) >= 2) = 1 - (1-x)^n - n x (1-x)^{n-1}.
// Grouped-series form below the n*x threshold; the naive expression loses
// all significance there.
double binom_tail_ge2(std::int64_t n, double x);

// E[(K - 1) 1{K >= 2}] for K ~ Bin(n, x), equal to n x - 1 + (1-x)^n.
double binom_mean_excess(std::int64_t n, double x);

// log1p(-x) + x, i.e. -(x^2/2 + x^3/3 + ...), without cancellation.
double log1p_plus(double x);

// expm1(u) - u, i.e. u^2/2! + u^3/3! + ..., without cancellation.
double expm1_minus(double u);

}  // namespace efc::special
