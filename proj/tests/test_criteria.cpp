#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "efc/criteria.hpp"
#include "efc/errors.hpp"
#include "efc/measures.hpp"
#include "efc/test_functions.hpp"

using namespace efc;

namespace {

ModelSpec lp_spec(double b, double alpha, double c, double beta) {
  return ModelSpec{CoagulationMeasure::log_power(c, beta),
                   SplittingMeasure::log_power(b, alpha),
                   {}};
}

std::vector<std::int64_t> pow2_grid(std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> g;
  for (std::int64_t n = lo; n <= hi; n *= 2) g.push_back(n);
  return g;
}

}  // namespace

TEST_CASE("classification off the critical line is exact") {
  auto ent = classify_regime(lp_spec(1, 1, 1, 3));
  CHECK(ent.verdict == Verdict::Entrance);
  CHECK(ent.threshold == 2.0);
  CHECK(ent.threshold_margin == doctest::Approx(1.0));
  CHECK(ent.grid.empty());

  auto ext = classify_regime(lp_spec(1, 1, 1, 1.5));
  CHECK(ext.verdict == Verdict::Exit);
  CHECK(ext.threshold_margin == doctest::Approx(-0.5));

  // critical exponents, decisive coefficients
  auto ent2 = classify_regime(lp_spec(1, 1, 2, 2));
  CHECK(ent2.verdict == Verdict::Entrance);
  CHECK(ent2.threshold == doctest::Approx(0.5));
  CHECK(ent2.threshold_margin == doctest::Approx(0.5));
  CHECK(ent2.grid.empty());

  auto ext2 = classify_regime(lp_spec(1, 1, 0.5, 2));
  CHECK(ext2.verdict == Verdict::Exit);
  CHECK(ext2.threshold_margin == doctest::Approx(-0.25));

  // exponent comparison ignores coefficients entirely
  CHECK(classify_regime(lp_spec(5, 0.7, 0.01, 2)).verdict == Verdict::Entrance);
  CHECK(classify_regime(lp_spec(0.01, 1, 100, 1.2)).verdict == Verdict::Exit);

  // joint rescaling of b and c never flips a non-critical verdict
  for (double s : {0.25, 7.0}) {
    CHECK(classify_regime(lp_spec(s, 1, s, 3)).verdict == Verdict::Entrance);
    CHECK(classify_regime(lp_spec(s, 1, s * 0.5, 2)).verdict == Verdict::Exit);
    CHECK(classify_regime(lp_spec(s, 1, s * 2, 2)).verdict == Verdict::Entrance);
  }
}

TEST_CASE("classification input validation") {
  ModelSpec bad1{CoagulationMeasure::uniform(1.0),
                 SplittingMeasure::log_power(1, 1),
                 {}};
  CHECK_THROWS_AS(classify_regime(bad1), UnsupportedFamily);
  ModelSpec bad2{CoagulationMeasure::log_power(1, 2),
                 SplittingMeasure::tabulated({0.0, 0.5}),
                 {}};
  CHECK_THROWS_AS(classify_regime(bad2), UnsupportedFamily);
  ModelSpec trunc = lp_spec(1, 1, 1, 2);
  trunc.truncation = 8;
  CHECK_THROWS_AS(classify_regime(trunc), DomainError);
  CHECK_THROWS_AS(classify_regime(lp_spec(1, 1, 1, 2), {4, 8, 16}), DomainError);
  CHECK_THROWS_AS(
      classify_regime(lp_spec(1, 1, 1, 2), {2, 4, 8, 16, 32, 64, 128, 256}),
      DomainError);
}

TEST_CASE("critical pair with alpha = 1 lands in the inconclusive band") {
  auto v = classify_regime(lp_spec(1, 1, 1, 2));
  CHECK(v.grid.size() == 17);
  CHECK(v.grid.front() == 16);
  CHECK(v.grid.back() == 1000000);
  CHECK(v.ratios.size() == v.grid.size());
  CHECK(v.verdict == Verdict::Inconclusive);
  CHECK(v.threshold == 0.0);
  CHECK(std::fabs(v.extrapolated_limit) < 0.1);
  CHECK(std::fabs(v.threshold_margin) < 0.1);
}

TEST_CASE("exactly critical pair with alpha = 2 is an exit boundary") {
  auto v = classify_regime(lp_spec(1, 2, 1, 3));
  CHECK(v.verdict == Verdict::Exit);
  CHECK(v.threshold == doctest::Approx(0.8862943611198906));
  CHECK(v.extrapolated_limit < 0.0);
  CHECK(v.extrapolated_limit > -1.0);
  CHECK(v.threshold_margin < -0.08);
  CHECK(v.basis.find("below") != std::string::npos);
}

TEST_CASE("near-critical coefficients fall through to extrapolation") {
  auto v = classify_regime(lp_spec(1, 1, 1.04, 2));
  CHECK_FALSE(v.grid.empty());
  CHECK((v.verdict == Verdict::NonExplosive ||
         v.verdict == Verdict::Inconclusive));
}

TEST_CASE("nonexplosion drift bound") {
  auto plog = TestFunction::plain_log();

  // pure coalescence pushes any increasing f down
  ModelSpec pure{CoagulationMeasure::uniform(1.0),
                 SplittingMeasure::tabulated({0.0}),
                 {}};
  auto rep = check_nonexplosion(pure, plog, pow2_grid(2, 1024));
  CHECK(rep.kind == DriftKind::NonExplosionBound);
  CHECK(rep.satisfied);
  CHECK(rep.c_min <= 0.0);
  double cmax = -1e300;
  for (double r : rep.ratios) cmax = std::max(cmax, r);
  CHECK(rep.c_min == cmax);

  // entrance family: bounded ratio, no upward trend
  auto ent = check_nonexplosion(lp_spec(1, 1, 1, 3),
                                TestFunction::iterated_log(1),
                                pow2_grid(8, 4096));
  CHECK(ent.satisfied);
  CHECK(std::isfinite(ent.c_min));

  // exit family: fragmentation wins, ratio of log drift trends up
  auto ext = check_nonexplosion(lp_spec(1, 1, 1, 1.2), plog,
                                pow2_grid(8, 4096));
  CHECK_FALSE(ext.satisfied);

  CHECK_THROWS_AS(
      check_nonexplosion(pure, TestFunction::inv_loglog(10.0), {8, 16}),
      DomainError);
  CHECK_THROWS_AS(check_nonexplosion(pure, plog, {1, 2, 4}), DomainError);
  CHECK_THROWS_AS(check_nonexplosion(pure, plog, {}), DomainError);
}

TEST_CASE("coming-down drift floor") {
  auto f = TestFunction::one_plus_inv_loglog(10.0);
  auto grid = pow2_grid(64, 8192);
  std::vector<double> a_list{100.0, 1000.0, 4000.0};

  ModelSpec ent = lp_spec(1, 1, 1, 3);
  ent.truncation = 64;
  auto rep = check_cdi_drift(ent, f, grid, a_list);
  CHECK(rep.kind == DriftKind::CdiDrift);
  CHECK(rep.satisfied);
  CHECK(rep.fitted.size() == 3);
  CHECK(rep.fitted[0] <= rep.fitted[1]);
  CHECK(rep.fitted[1] <= rep.fitted[2]);
  CHECK(rep.fitted[2] > 1.0);
  // fitted is the running minimum of ratios past a
  for (std::size_t j = 0; j < a_list.size(); ++j) {
    double d = 1e300;
    for (std::size_t i = 0; i < rep.grid.size(); ++i)
      if (double(rep.grid[i]) > a_list[j]) d = std::min(d, rep.ratios[i]);
    CHECK(rep.fitted[j] == d);
  }

  // pure coalescence with a strong merge measure also lifts d(a)
  ModelSpec pure{CoagulationMeasure::log_power(1.0, 3.0),
                 SplittingMeasure::tabulated({0.0}),
                 64};
  auto pc = check_cdi_drift(pure, f, grid, a_list);
  for (double v : pc.values) CHECK(v >= 0.0);
  CHECK(pc.satisfied);

  // a constant test function can never certify divergence
  ModelSpec entc = ent;
  auto flat = check_cdi_drift(entc, TestFunction::constant(2.0), grid, a_list);
  CHECK_FALSE(flat.satisfied);
  for (double v : flat.fitted) CHECK(std::fabs(v) < 1e-9);

  ModelSpec untrunc = lp_spec(1, 1, 1, 3);
  CHECK_THROWS_AS(check_cdi_drift(untrunc, f, grid, a_list), DomainError);
  CHECK_THROWS_AS(check_cdi_drift(ent, TestFunction::plain_log(), grid, a_list),
                  DomainError);
  CHECK_THROWS_AS(check_cdi_drift(ent, f, grid, {4000.0, 100.0}), DomainError);
  CHECK_THROWS_AS(check_cdi_drift(ent, f, grid, {9000.0}), DomainError);
  CHECK_THROWS_AS(check_cdi_drift(ent, f, grid, {}), DomainError);
}

TEST_CASE("stay-infinite drift ceiling") {
  auto f = TestFunction::inv_loglog(10.0);
  auto grid = pow2_grid(8, 4096);
  std::vector<double> a_list{10.0, 100.0, 1000.0};

  auto rep = check_stay_infinite(lp_spec(1, 1, 1, 1.2), f, grid, a_list);
  CHECK(rep.kind == DriftKind::StayInfiniteBound);
  CHECK(rep.satisfied);
  CHECK(rep.fitted.size() == 3);
  // sup over a shrinking suffix cannot grow
  CHECK(rep.fitted[0] >= rep.fitted[1]);
  CHECK(rep.fitted[1] >= rep.fitted[2]);

  auto ent = check_stay_infinite(lp_spec(1, 1, 1, 3), f, grid, a_list);
  CHECK_FALSE(ent.satisfied);

  CHECK_THROWS_AS(check_stay_infinite(lp_spec(1, 1, 1, 1.2),
                                      TestFunction::constant(1.0), grid, a_list),
                  DomainError);
  CHECK_THROWS_AS(check_stay_infinite(lp_spec(1, 1, 1, 1.2),
                                      TestFunction::one_plus_inv_loglog(10.0),
                                      grid, a_list),
                  DomainError);
}

TEST_CASE("verdicts agree with the matching drift checks") {
  // entrance family: classify says Entrance and both positive criteria hold
  ModelSpec ent = lp_spec(1, 1, 1, 3);
  CHECK(classify_regime(ent).verdict == Verdict::Entrance);
  CHECK(check_nonexplosion(ent, TestFunction::iterated_log(1),
                           pow2_grid(8, 4096))
            .satisfied);
  ModelSpec entm = ent;
  entm.truncation = 64;
  CHECK(check_cdi_drift(entm, TestFunction::one_plus_inv_loglog(10.0),
                        pow2_grid(64, 8192), {100.0, 1000.0, 4000.0})
            .satisfied);

  // exit family: classify says Exit and the ceiling criterion holds
  ModelSpec ext = lp_spec(1, 1, 1, 1.5);
  CHECK(classify_regime(ext).verdict == Verdict::Exit);
  CHECK(check_stay_infinite(ext, TestFunction::inv_loglog(10.0),
                            pow2_grid(8, 4096), {10.0, 100.0, 1000.0})
            .satisfied);
}

TEST_CASE("verdict names") {
  CHECK(to_string(Verdict::Entrance) == "Entrance");
  CHECK(to_string(Verdict::Exit) == "Exit");
  CHECK(to_string(Verdict::ComesDown) == "ComesDown");
  CHECK(to_string(Verdict::StaysInfinite) == "StaysInfinite");
  CHECK(to_string(Verdict::Explodes) == "Explodes");
  CHECK(to_string(Verdict::NonExplosive) == "NonExplosive");
  CHECK(to_string(Verdict::Inconclusive) == "Inconclusive");
}
