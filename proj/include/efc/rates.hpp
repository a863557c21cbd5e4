#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "efc/measures.hpp"
#include "efc/parallel.hpp"

// Jump rates of the block-counting chain. A merge of k of n blocks happens at
// rate C(n,k) * lambda_nk; a split attaching k extra blocks happens at rate
// n * mu(k). The aggregate functionals below have two evaluation routes: the
// explicit sum over k, and a single integral obtained by summing the binomial
// kernel in closed form under the integral sign. They must agree; tests lean
// on that.

namespace efc {

enum class SumMethod { Auto, DirectSum, IntegralIdentity };

struct RateOptions {
  double rel_tol = 1e-11;
  std::int64_t n_direct = 512;  // Auto switches to the integral route above this
  bool closed_form = true;  // uniform/beta merge rates are exact; off forces quadrature
};

// integral of x^(k-2) (1-x)^(n-k) over the coagulation measure; 2 <= k <= n
double lambda_nk(const CoagulationMeasure& lam, std::int64_t n, std::int64_t k,
                 const RateOptions& opt = {});

// C(n,k) * lambda_nk, with the binomial weight kept inside the exponent so
// large n stays representable
double coag_rate_nk(const CoagulationMeasure& lam, std::int64_t n,
                    std::int64_t k, const RateOptions& opt = {});

// sum_k C(n,k) lambda_nk  ==  integral of P(Bin(n,x) >= 2) x^-2 d Lambda
double total_coag_rate(const CoagulationMeasure& lam, std::int64_t n,
                       SumMethod method = SumMethod::Auto,
                       const RateOptions& opt = {});

// sum_k C(n,k) lambda_nk (k-1)  ==  integral of (nx - 1 + (1-x)^n) x^-2 d Lambda
double phi_lambda(const CoagulationMeasure& lam, std::int64_t n,
                  SumMethod method = SumMethod::Auto,
                  const RateOptions& opt = {});

// sum_k C(n,k) lambda_nk (k-1)^2, via the closed identity
// Lambda_total * n (n-1) - phi_lambda(n)
double phi_lambda_second_moment(const CoagulationMeasure& lam, std::int64_t n,
                                const RateOptions& opt = {});

// sum of C(n,k) lambda_nk over k > floor(delta * n)
double tail_coag_rate(const CoagulationMeasure& lam, std::int64_t n,
                      double delta, const RateOptions& opt = {});

// n * sum_{k<=n} k mu(k)
double phi_mu(const SplittingMeasure& mu, std::uint64_t n);

// phi_lambda - phi_mu, the signed drift scale of the chain at n
double phi_diff(const ModelSpec& spec, std::int64_t n,
                SumMethod method = SumMethod::Auto, const RateOptions& opt = {});

// Per-k merge rates at a fixed n, with prefix sums for inverse-CDF sampling.
struct RateTable {
  std::int64_t n = 0;
  std::vector<double> per_k;  // per_k[i] = rate of a (i+2)-merge
  std::vector<double> cum;    // inclusive prefix sums of per_k
  double total = 0.0;
  double phi = 0.0;
};

RateTable build_rate_table(const CoagulationMeasure& lam, std::int64_t n,
                           ExecPolicy policy = ExecPolicy::Parallel,
                           const RateOptions& opt = {});

// Thread-safe LRU over rate tables keyed by (measure, n). Values are
// deterministic, so a racing duplicate build is wasted work, nothing worse.
class RateTableCache {
 public:
  explicit RateTableCache(std::size_t capacity = 1024);
  ~RateTableCache();
  std::shared_ptr<const RateTable> get(const CoagulationMeasure& lam,
                                       std::int64_t n,
                                       ExecPolicy policy = ExecPolicy::Parallel);
  std::size_t size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace efc
