#include "efc/generator.hpp"

#include <algorithm>
#include <cmath>

#include "efc/errors.hpp"
#include "efc/parallel.hpp"
#include "efc/quadrature.hpp"
#include "efc/special.hpp"

namespace efc {

double testfn_delta(const TestFunction& f, double n, double k) {
  if (!(n >= 1.0) || !(k >= 0.0))
    throw DomainError("testfn_delta: need n >= 1, k >= 0");
  if (k == 0.0) return 0.0;
  const double l = f.shift();
  // iterated-log increment, computed innermost-out: d_0 = k,
  // d_{j+1} = log(1 + d_j / log^(j)(n+l)); every divisor exceeds 1 by the
  // shift constraints, so nothing cancels
  auto iter_delta = [&](int depth) {
    double d = k;
    double base = n + l;
    for (int j = 1; j <= depth; ++j) {
      d = std::log1p(d / base);
      base = std::log(base);
    }
    return d;
  };
  switch (f.family()) {
    case TestFnFamily::Constant:
      return 0.0;
    case TestFnFamily::PlainLog:
      return std::log1p(k / n);
    case TestFnFamily::IteratedLog:
      return iter_delta(f.depth());
    default: {
      // the reciprocal families all reduce to an increment of 1/loglog
      const double d2 = iter_delta(2);  // loglog(n+k+l) - loglog(n+l)
      const double base = std::log(std::log(n + l));
      const double dinv = -d2 / (base * (base + d2));
      return f.family() == TestFnFamily::OneMinusInvLogLog ? -dinv : dinv;
    }
  }
}

double gen_coag_apply(const CoagulationMeasure& lam, const TestFunction& f,
                      std::int64_t n, const GenOptions& opt) {
  if (n < 1) throw DomainError("gen_coag_apply: n must be >= 1");
  if (n == 1 || f.growth() == GrowthClass::Flat) return 0.0;
  if (n > opt.n_cap)
    throw GridTooLarge("merge drift: n exceeds the direct-summation cap");
  const RateTable tab = build_rate_table(lam, n, ExecPolicy::Parallel, opt.rates);
  double acc = 0.0;
  for (std::int64_t k = 2; k <= n; ++k) {
    // f(n-k+1) - f(n) = -(f valued k-1 above n-k+1)
    acc -= tab.per_k[std::size_t(k - 2)] *
           testfn_delta(f, double(n - k + 1), double(k - 1));
  }
  return acc;
}

namespace {

struct TailParams {
  double b = 0.0;
  double alpha = 0.0;
};

// certified bound on everything beyond x = exp(s_cap): the continuation
// density is b s^a e^{-s} ds in log-space, and |df| <= s + 1 always (log
// growth) or a constant (bounded families)
double cap_remainder(const TailParams& tp, double s_cap, double df_const,
                     bool log_growth) {
  const double g2 = special::upper_gamma(tp.alpha + 2.0, s_cap);
  const double g1 = special::upper_gamma(tp.alpha + 1.0, s_cap);
  double rem = log_growth ? tp.b * (g2 + g1) : df_const * tp.b * g1;
  // the midpoint-defect integrand tails off at the same exponential rate;
  // a generous multiple of the same closed form covers it
  return rem + tp.b * (7.0 * g2);
}

}  // namespace

FragValue gen_frag_apply(const SplittingMeasure& mu, const TestFunction& f,
                         std::int64_t n, const GenOptions& opt) {
  if (n < 1) throw DomainError("gen_frag_apply: n must be >= 1");
  if (f.growth() == GrowthClass::Flat) return {0.0, 0.0};
  const double nd = double(n);

  if (mu.finite_support()) {
    const std::uint64_t kmax = mu.table_size();
    double acc = 0.0;
    for (std::uint64_t k = 1; k <= kmax; ++k)
      acc += mu.mass(k) * testfn_delta(f, nd, double(k));
    return {nd * acc, 0.0};
  }

  if (f.growth() == GrowthClass::Linear)
    throw TailBoundUnavailable(
        "split drift: first moment of the splitting measure diverges for "
        "linear test functions");

  const bool log_growth = f.growth() == GrowthClass::LogGrowth;
  const double osc = log_growth ? 0.0 : std::fabs(f.limit() - f(nd));
  const TailParams tp{mu.cont_b(), mu.cont_alpha()};

  std::uint64_t K = std::max<std::uint64_t>(
      {std::uint64_t(32 * n), 4096u, mu.table_size(),
       std::uint64_t(std::ceil(mu.continuation_from()))});
  for (;;) {
    const double head =
        chunked_sum(1, K + 1, [&](std::uint64_t k) {
          return mu.mass(k) * testfn_delta(f, nd, double(k));
        });
    const double s0 = std::log(double(K) + 0.5);
    const double s_cap = std::max(s0, std::log(nd)) + 80.0;

    // sum_{k > K} mass(k) df(k) ~ integral from K + 1/2 of the smooth
    // continuation, in s = log x coordinates
    auto df_at = [&](double x) { return testfn_delta(f, nd, x); };
    auto main_ig = [&](double s) {
      const double x = std::exp(s);
      return mu.density_cont(x) * df_at(x) * x;
    };
    const auto main = quad::integrate(main_ig, s0, s_cap);

    // midpoint defect per unit cell is bounded by sup|h''|/24 with
    // h = density * df; expand h'' via the published majorants
    auto defect_ig = [&](double s) {
      const double x = std::exp(s);
      const double dfb = log_growth ? std::log1p(x / nd) : osc;
      return (mu.density_cont_d2_bound(x) * dfb +
              2.0 * mu.density_cont_d1_bound(x) * f.deriv_bound(x) +
              mu.density_cont(x) * f.deriv2_bound(x)) *
             x;
    };
    const auto defect =
        quad::integrate(defect_ig, s0, s_cap, {.rel_tol = 1e-6});

    const double value = nd * (head + main.value);
    const double err =
        nd * ((defect.value + defect.error) / 24.0 + main.error +
              cap_remainder(tp, s_cap, osc, log_growth));
    const double tol = std::max(opt.tol_rel * std::fabs(value), opt.tol_abs);
    if (err <= tol) return {value, err};
    if (K >= (1u << 26))
      throw TailBoundUnavailable(
          "split drift: tail bound did not reach tolerance");
    K *= 4;
  }
}

GeneratorValue gen_apply(const ModelSpec& spec, const TestFunction& f,
                         std::int64_t n, const GenOptions& opt) {
  const double coag = gen_coag_apply(spec.lambda, f, n, opt);
  const FragValue frag =
      spec.truncation ? gen_frag_apply(spec.effective_mu(), f, n, opt)
                      : gen_frag_apply(spec.mu, f, n, opt);
  return {n, coag, frag.value, frag.error_bound, coag + frag.value};
}

GeneratorValue gen_truncated_apply(const ModelSpec& spec, const TestFunction& f,
                                   std::int64_t n, const GenOptions& opt) {
  if (!spec.truncation)
    throw DomainError("truncated drift: the model has no truncation level");
  return gen_apply(spec, f, n, opt);
}

}  // namespace efc
