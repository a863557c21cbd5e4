#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "efc/errors.hpp"
#include "efc/generator.hpp"
#include "efc/measures.hpp"
#include "efc/rates.hpp"
#include "efc/test_functions.hpp"

using namespace efc;

TEST_CASE("test function evaluation and shift defaults") {
  auto id = TestFunction::iterated_log(0, 0.0);
  CHECK(id(7.0) == 7.0);
  CHECK(TestFunction::iterated_log(0).shift() == 0.0);
  CHECK(TestFunction::iterated_log(1).shift() == 1.0);
  CHECK(TestFunction::iterated_log(2).shift() == 2.0);
  CHECK(TestFunction::iterated_log(3).shift() == 15.0);

  auto inv = TestFunction::inv_loglog(10.0);
  CHECK(inv(90.0) == doctest::Approx(0.6548018210176062).epsilon(1e-14));
  CHECK(TestFunction::constant(5.0)(123.0) == 5.0);
  CHECK(TestFunction::plain_log()(1.0) == 0.0);
  auto opl = TestFunction::one_plus_inv_loglog(10.0);
  auto oml = TestFunction::one_minus_inv_loglog(10.0);
  // loglog(11) = 0.8745913829236889
  CHECK(opl(1.0) == doctest::Approx(1.0 + 1.0 / 0.8745913829236889).epsilon(1e-14));
  CHECK(oml(1.0) == doctest::Approx(1.0 - 1.0 / 0.8745913829236889).epsilon(1e-14));

  CHECK_THROWS_AS(TestFunction::iterated_log(2, 1.0), DomainError);
  CHECK_THROWS_AS(TestFunction::iterated_log(-1, 0.0), DomainError);
  CHECK_THROWS_AS(TestFunction::inv_loglog(5.0), DomainError);
  CHECK_THROWS_AS(inv(0.5), DomainError);

  CHECK(inv.limit() == 0.0);
  CHECK(opl.limit() == 1.0);
  CHECK(oml.limit() == 1.0);
  CHECK(TestFunction::constant(2.0).limit() == 2.0);
  CHECK_THROWS_AS(TestFunction::plain_log().limit(), DomainError);

  CHECK(id.orientation() == Orientation::IncreasingToInf);
  CHECK(inv.orientation() == Orientation::DecreasingToZero);
  CHECK(opl.orientation() == Orientation::Bounded);
  CHECK(id.growth() == GrowthClass::Linear);
  CHECK(TestFunction::plain_log().growth() == GrowthClass::LogGrowth);
}

TEST_CASE("increment helper matches the direct difference") {
  std::vector<TestFunction> fns{
      TestFunction::iterated_log(0),      TestFunction::iterated_log(1),
      TestFunction::iterated_log(2),      TestFunction::iterated_log(3),
      TestFunction::plain_log(),          TestFunction::inv_loglog(10.0),
      TestFunction::one_plus_inv_loglog(10.0),
      TestFunction::one_minus_inv_loglog(10.0),
      TestFunction::constant(3.0)};
  for (const auto& f : fns) {
    for (double n : {1.0, 5.0, 1000.0, 250000.0}) {
      CHECK(testfn_delta(f, n, 0.0) == 0.0);
      for (double k : {1.0, 2.0, 3.5, 17.0, 100000.0}) {
        double direct = f(n + k) - f(n);
        double stable = testfn_delta(f, n, k);
        CHECK(stable ==
              doctest::Approx(direct).epsilon(1e-6).scale(std::fabs(f(n)) * 1e-10));
      }
    }
    // stability where the direct difference is pure cancellation: increments
    // over adjacent k must be positive and decreasing for increasing concave
    // families (and mirror for decreasing)
    if (f.family() == TestFnFamily::Constant) continue;
    double n = 1e9;
    double d1 = testfn_delta(f, n, 1.0);
    double d2 = testfn_delta(f, n, 2.0);
    if (f.orientation() == Orientation::DecreasingToZero ||
        f.family() == TestFnFamily::OnePlusInvLogLog) {
      CHECK(d1 < 0.0);
      CHECK(d2 < d1 * 0.999);
    } else {
      CHECK(d1 > 0.0);
      CHECK(d2 > d1 * 1.001);
    }
  }
}

TEST_CASE("derivative envelopes hold against central differences") {
  std::vector<TestFunction> fns{
      TestFunction::iterated_log(1),  TestFunction::iterated_log(2),
      TestFunction::iterated_log(3),  TestFunction::plain_log(),
      TestFunction::inv_loglog(10.0), TestFunction::one_plus_inv_loglog(10.0),
      TestFunction::one_minus_inv_loglog(10.0)};
  for (const auto& f : fns) {
    for (double x : {1.5, 3.7, 11.0, 101.0, 9999.0, 1e6}) {
      double h1 = x * 1e-7;
      double d1 = (f(x + h1) - f(x - h1)) / (2.0 * h1);
      CHECK(std::fabs(d1) <= f.deriv_bound(x) * (1.0 + 1e-5));
      double h2 = x * 1e-4;
      double d2 = (f(x + h2) - 2.0 * f(x) + f(x - h2)) / (h2 * h2);
      CHECK(std::fabs(d2) <= f.deriv2_bound(x) * (1.0 + 1e-3));
      // envelopes nonincreasing
      CHECK(f.deriv_bound(2.0 * x) <= f.deriv_bound(x));
      CHECK(f.deriv2_bound(2.0 * x) <= f.deriv2_bound(x));
    }
  }
}

TEST_CASE("merge drift: signs, closed case, refusal cap") {
  auto u1 = CoagulationMeasure::uniform(1.0);
  auto id = TestFunction::iterated_log(0, 0.0);
  CHECK(gen_coag_apply(u1, id, 1) == 0.0);
  CHECK(gen_coag_apply(u1, TestFunction::constant(9.0), 50) == 0.0);
  // f(n) = n collapses the merge sum to minus the mean block-loss rate
  CHECK(gen_coag_apply(u1, id, 4) == doctest::Approx(-13.0 / 3.0).epsilon(1e-10));
  auto lp = CoagulationMeasure::log_power(1.0, 2.0);
  for (std::int64_t n : {2, 10, 100}) {
    CHECK(gen_coag_apply(u1, id, n) ==
          doctest::Approx(-phi_lambda(u1, n)).epsilon(1e-9));
    CHECK(gen_coag_apply(lp, id, n) ==
          doctest::Approx(-phi_lambda(lp, n)).epsilon(1e-9));
    CHECK(gen_coag_apply(lp, TestFunction::plain_log(), n) <= 0.0);
    CHECK(gen_coag_apply(lp, TestFunction::inv_loglog(10.0), n) >= 0.0);
  }
  GenOptions tight;
  tight.n_cap = 100;
  CHECK_THROWS_AS(gen_coag_apply(u1, id, 101, tight), GridTooLarge);
}

TEST_CASE("split drift: atoms, brute-force cross-checks, bound contract") {
  auto id = TestFunction::iterated_log(0, 0.0);
  auto atom2 = SplittingMeasure::tabulated({0.0, 0.5});
  auto r = gen_frag_apply(atom2, id, 4);
  CHECK(r.value == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(r.error_bound == 0.0);
  CHECK(gen_frag_apply(atom2, TestFunction::constant(1.0), 9).value == 0.0);

  auto mu = SplittingMeasure::log_power(1.0, 1.0);
  CHECK_THROWS_AS(gen_frag_apply(mu, id, 5), TailBoundUnavailable);

  // brute-force long-double head; the mass missing past 2^25 leaves ~1e-5
  // relative slack for log growth and ~1e-6 for the bounded families
  auto brute = [&](const TestFunction& f, std::int64_t n) {
    long double acc = 0.0L;
    for (std::uint64_t k = 1; k < (1u << 25); ++k)
      acc += (long double)mu.mass(k) * (long double)testfn_delta(f, double(n), double(k));
    return double(acc) * double(n);
  };
  auto plog = TestFunction::plain_log();
  auto inv = TestFunction::inv_loglog(10.0);
  {
    auto g = gen_frag_apply(mu, plog, 10);
    CHECK(g.value == doctest::Approx(brute(plog, 10)).epsilon(1e-4));
    CHECK(g.value > 0.0);
    CHECK(g.error_bound <= std::max(1e-8 * std::fabs(g.value), 1e-12));
  }
  {
    auto g = gen_frag_apply(mu, inv, 50);
    CHECK(g.value == doctest::Approx(brute(inv, 50)).epsilon(5e-6));
    CHECK(g.value < 0.0);
    CHECK(g.error_bound <= std::max(1e-8 * std::fabs(g.value), 1e-12));
  }
  {
    auto g = gen_frag_apply(mu, TestFunction::one_minus_inv_loglog(10.0), 50);
    CHECK(g.value == doctest::Approx(brute(TestFunction::one_minus_inv_loglog(10.0), 50))
                         .epsilon(5e-6));
    CHECK(g.value > 0.0);
  }
}

TEST_CASE("split drift of log n carries the known leading terms") {
  // n * sum mu(k) log(1+k/n) = Phi_mu(n)/n + b log n + O(1): the over-n tail
  // gives 2log2 * b log n, the in-range curvature correction (1-2log2) b log n
  auto mu = SplittingMeasure::log_power(1.0, 1.0);
  const std::int64_t n = 100000;
  auto g = gen_frag_apply(mu, TestFunction::plain_log(), n);
  double lead = phi_mu(mu, n) / double(n) + std::log(double(n));
  CHECK(g.value == doctest::Approx(lead).epsilon(0.10));
}

TEST_CASE("combined drift and the truncated variant") {
  auto u1 = CoagulationMeasure::uniform(1.0);
  auto atom2 = SplittingMeasure::tabulated({0.0, 0.5});
  auto id = TestFunction::iterated_log(0, 0.0);
  ModelSpec spec{u1, atom2, {}};
  auto v = gen_apply(spec, id, 4);
  CHECK(v.coag_part == doctest::Approx(-13.0 / 3.0).epsilon(1e-10));
  CHECK(v.frag_part == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(v.total == doctest::Approx(-1.0 / 3.0).epsilon(1e-9));
  CHECK(v.total == v.coag_part + v.frag_part);

  auto v1 = gen_apply(spec, id, 1);
  CHECK(v1.coag_part == 0.0);
  CHECK(v1.total == v1.frag_part);

  auto mu = SplittingMeasure::log_power(1.0, 1.0);
  ModelSpec untrunc{u1, mu, {}};
  CHECK_THROWS_AS(gen_truncated_apply(untrunc, id, 5), DomainError);

  // collapsing everything onto the atom at 1 gives n * total mass for f = id
  ModelSpec m1{u1, mu, 1};
  auto t1 = gen_truncated_apply(m1, id, 5);
  CHECK(t1.frag_part == doctest::Approx(5.0 * mu.total_mass()).epsilon(1e-10));
  CHECK(t1.frag_truncation_error == 0.0);
  CHECK(t1.total ==
        doctest::Approx(-phi_lambda(u1, 5) + 5.0 * mu.total_mass()).epsilon(1e-9));
}

TEST_CASE("truncation dominates the full drift for decreasing positive f") {
  auto u1 = CoagulationMeasure::uniform(1.0);
  auto mu = SplittingMeasure::log_power(1.0, 1.0);
  auto inv = TestFunction::inv_loglog(10.0);
  ModelSpec full{u1, mu, {}};
  for (std::int64_t n : {5, 50, 500}) {
    auto base = gen_apply(full, inv, n);
    double prev = std::numeric_limits<double>::infinity();
    for (std::uint64_t m : {2ull, 8ull, 32ull}) {
      ModelSpec tr{u1, mu, m};
      auto v = gen_truncated_apply(tr, inv, n);
      CHECK(v.total >= base.total - base.frag_truncation_error - 1e-12);
      // collapsing the tail onto a nearer atom overstates the drift of a
      // decreasing function, monotonically in m
      CHECK(v.total <= prev + 1e-12);
      prev = v.total;
    }
  }
}
