#pragma once

#include <cstdint>

#include "efc/measures.hpp"
#include "efc/rates.hpp"
#include "efc/test_functions.hpp"

// Drift evaluation: the action of the chain's generator on a test function,
// split into the merge part (finite sum over k = 2..n, exact rates) and the
// split part (infinite sum over k >= 1, truncated with a certified bound).

namespace efc {

struct GenOptions {
  // fragmentation tail: looser of relative-to-value and absolute
  double tol_rel = 1e-8;
  double tol_abs = 1e-12;
  // the merge part is a direct O(n) sum; beyond this it refuses rather than
  // approximate, since drift signs must stay trustworthy
  std::int64_t n_cap = 20000;
  RateOptions rates{};
};

struct FragValue {
  double value = 0.0;
  double error_bound = 0.0;  // certified truncation bound, not roundoff
};

struct GeneratorValue {
  std::int64_t n = 0;
  double coag_part = 0.0;
  double frag_part = 0.0;
  double frag_truncation_error = 0.0;
  double total = 0.0;  // coag_part + frag_part
};

// f(n+k) - f(n) evaluated without cancellation; k may be any real >= 0
double testfn_delta(const TestFunction& f, double n, double k);

// sum over k = 2..n of C(n,k) lambda_nk [f(n-k+1) - f(n)]; zero at n = 1
double gen_coag_apply(const CoagulationMeasure& lam, const TestFunction& f,
                      std::int64_t n, const GenOptions& opt = {});

// n * sum over k >= 1 of mu(k) [f(n+k) - f(n)]. Exact head sum plus a
// midpoint-rule integral of the smooth tail continuation; the returned bound
// covers the midpoint defect (via the measure's derivative majorants and the
// test function's envelope) and the far-tail cutoff.
FragValue gen_frag_apply(const SplittingMeasure& mu, const TestFunction& f,
                         std::int64_t n, const GenOptions& opt = {});

// both parts on the model's effective splitting measure (truncation honored)
GeneratorValue gen_apply(const ModelSpec& spec, const TestFunction& f,
                         std::int64_t n, const GenOptions& opt = {});

// same evaluation, but requires spec.truncation to be set; the split sum is
// then finite and the bound is exactly zero
GeneratorValue gen_truncated_apply(const ModelSpec& spec, const TestFunction& f,
                                   std::int64_t n, const GenOptions& opt = {});

}  // namespace efc
