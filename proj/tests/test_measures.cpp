#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "efc/measures.hpp"
#include "efc/errors.hpp"
#include "efc/quadrature.hpp"

using namespace efc;

TEST_CASE("coagulation families validate their parameters") {
  CHECK_THROWS_AS(CoagulationMeasure::uniform(0.0), DomainError);
  CHECK_THROWS_AS(CoagulationMeasure::uniform(-1.0), DomainError);
  CHECK_THROWS_AS(CoagulationMeasure::log_power(1.0, 1.0), DomainError);
  CHECK_THROWS_AS(CoagulationMeasure::log_power(-2.0, 3.0), DomainError);
  CHECK_THROWS_AS(CoagulationMeasure::beta_density(0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(CoagulationMeasure::tabulated({0.1, 0.2}, {1.0}), DomainError);
  CHECK_THROWS_AS(CoagulationMeasure::tabulated({0.2, 0.1}, {1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(CoagulationMeasure::tabulated({0.1, 0.2}, {1.0, -1.0}), DomainError);
  CHECK_THROWS_AS(CoagulationMeasure::tabulated({-0.1, 0.2}, {1.0, 1.0}), DomainError);
}

TEST_CASE("coagulation masses and densities") {
  auto u = CoagulationMeasure::uniform(2.5);
  CHECK(u.total_mass() == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(u.density(0.3) == 2.5);
  CHECK(u.density_at_exp(1.0) == 2.5);

  // log-power mass c * Gamma(beta), checked against the t-space integral
  for (double beta : {1.5, 2.0, 3.0}) {
    auto lp = CoagulationMeasure::log_power(0.7, beta);
    CHECK(lp.total_mass() == doctest::Approx(0.7 * std::tgamma(beta)).epsilon(1e-13));
    std::vector<double> pts;
    for (double t = 0.0; t <= 80.0; t += 1.0) pts.push_back(t);
    auto r = quad::integrate_panels(
        [&](double t) { return lp.density_at_exp(t) * std::exp(-t); }, pts);
    CHECK(r.value == doctest::Approx(lp.total_mass()).epsilon(1e-11));
    CHECK(lp.density(0.25) ==
          doctest::Approx(0.7 * std::pow(std::log(4.0), beta - 1.0)).epsilon(1e-14));
  }

  auto be = CoagulationMeasure::beta_density(2.0, 3.0, 1.3);
  CHECK(be.total_mass() == doctest::Approx(1.3).epsilon(1e-13));
  // Beta(2,3) density: 12 x (1-x)^2
  CHECK(be.density(0.5) == doctest::Approx(1.3 * 12.0 * 0.5 * 0.25).epsilon(1e-13));
  // density_at_exp must stay accurate for tiny t where 1 - e^-t cancels
  double t = 1e-9;
  CHECK(be.density_at_exp(t) ==
        doctest::Approx(be.density(std::exp(-t))).epsilon(1e-9));

  auto tab = CoagulationMeasure::tabulated({0.2, 0.4, 0.8}, {0.0, 5.0, 0.0});
  // trapezoid mass: 0.5*0.2*5 + 0.5*0.4*5 = 1.5
  CHECK(tab.total_mass() == doctest::Approx(1.5).epsilon(1e-13));
  CHECK(tab.density(0.1) == 0.0);
  CHECK(tab.density(0.3) == doctest::Approx(2.5).epsilon(1e-13));
  CHECK(tab.support_lo() == 0.2);
  CHECK(tab.support_hi() == 0.8);
  CHECK(u.support_lo() == 0.0);
  CHECK(u.support_hi() == 1.0);

  CHECK_THROWS_AS(u.lp_c(), DomainError);
  CHECK_THROWS_AS(tab.beta_a(), DomainError);
  CHECK(u.key() != tab.key());
  CHECK(CoagulationMeasure::uniform(2.5).key() == u.key());
}

TEST_CASE("splitting masses follow the closed form exactly") {
  auto mu = SplittingMeasure::log_power(1.25, 2.0, 0.5);
  CHECK(mu.mass(1) == 0.5);
  for (std::uint64_t k : {2ull, 3ull, 17ull, 100000ull}) {
    double lk = std::log(double(k));
    CHECK(mu.mass(k) ==
          1.25 * std::pow(lk, 2.0) / (double(k) * double(k)));
  }
  CHECK_THROWS_AS(mu.mass(0), DomainError);
  CHECK_THROWS_AS(SplittingMeasure::log_power(-1.0, 1.0), DomainError);
  CHECK_THROWS_AS(SplittingMeasure::log_power(1.0, -1.5), DomainError);
}

TEST_CASE("splitting total mass hits the zeta-derivative reference") {
  // sum over k>=2 of log(k)/k^2 = -zeta'(2), computed offline to 19 digits
  const double zeta_ref = 0.9375482543158437537;
  auto mu = SplittingMeasure::log_power(1.0, 1.0);
  CHECK(mu.total_mass() == doctest::Approx(zeta_ref).epsilon(1e-9));
  CHECK(mu.total_mass_error() < 1e-9 * zeta_ref);
  // atom at 1 just shifts the total
  auto mu1 = SplittingMeasure::log_power(1.0, 1.0, 0.25);
  CHECK(mu1.total_mass() == doctest::Approx(zeta_ref + 0.25).epsilon(1e-9));
  // the total is linear in b
  auto mu3 = SplittingMeasure::log_power(3.0, 1.0);
  CHECK(mu3.total_mass() == doctest::Approx(3.0 * zeta_ref).epsilon(1e-9));
}

TEST_CASE("tail mass and partial first moment are consistent") {
  auto mu = SplittingMeasure::log_power(1.0, 1.0);
  // tail(k) = total - head(k)
  double head = 0.0;
  for (std::uint64_t k = 1; k <= 50; ++k) head += mu.mass(k);
  CHECK(mu.tail_mass(50) == doctest::Approx(mu.total_mass() - head).epsilon(1e-12));
  CHECK(mu.tail_mass(1) == doctest::Approx(mu.total_mass()).epsilon(1e-12));

  double pm = 0.0;
  for (std::uint64_t k = 1; k <= 1000; ++k) pm += double(k) * mu.mass(k);
  CHECK(mu.partial_first_moment(1000) == doctest::Approx(pm).epsilon(1e-12));

  // far beyond the direct window the closed-form extension must agree with
  // the asymptotic order (log n)^(a+1)/(a+1): ratio of two large n values
  auto mu2 = SplittingMeasure::log_power(2.0, 1.5);
  double p1 = mu2.partial_first_moment(200000000ull);
  double p2 = mu2.partial_first_moment(400000000ull);
  double g1 = std::pow(std::log(2e8), 2.5), g2 = std::pow(std::log(4e8), 2.5);
  CHECK(p2 / p1 == doctest::Approx(g2 / g1).epsilon(2e-3));
}

TEST_CASE("tabulated splitting measures, with and without continuation") {
  auto fin = SplittingMeasure::tabulated({0.0, 0.5, 0.25});
  CHECK(fin.finite_support());
  CHECK(!fin.has_continuation());
  CHECK(fin.mass(2) == 0.5);
  CHECK(fin.mass(7) == 0.0);
  CHECK(fin.total_mass() == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(fin.total_mass_error() == 0.0);
  CHECK(fin.tail_mass(2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(fin.partial_first_moment(2) == doctest::Approx(1.0).epsilon(1e-15));

  auto cont = SplittingMeasure::tabulated({0.1, 0.2}, PowerLogTail{1.0, 1.0});
  CHECK(!cont.finite_support());
  CHECK(cont.has_continuation());
  CHECK(cont.mass(2) == 0.2);
  CHECK(cont.mass(3) == doctest::Approx(std::log(3.0) / 9.0).epsilon(1e-15));
  // total = table head + (full log-power sum minus its own 1..2 head)
  auto lp = SplittingMeasure::log_power(1.0, 1.0);
  double expect = 0.1 + 0.2 + (lp.total_mass() - lp.mass(2));
  CHECK(cont.total_mass() == doctest::Approx(expect).epsilon(1e-10));

  CHECK_THROWS_AS(SplittingMeasure::tabulated({}), DomainError);
  CHECK_THROWS_AS(SplittingMeasure::tabulated({0.1, -0.2}), DomainError);
  CHECK_THROWS_AS(SplittingMeasure::tabulated({0.1}, PowerLogTail{-1.0, 0.0}),
                  DomainError);
}

TEST_CASE("truncation conserves mass and matches by atom") {
  auto mu = SplittingMeasure::log_power(1.0, 1.0, 0.3);
  for (std::uint64_t m : {2ull, 5ull, 64ull}) {
    auto tr = mu_truncate(mu, m);
    CHECK(tr.finite_support());
    CHECK(tr.table_size() == m);
    for (std::uint64_t k = 1; k < m; ++k)
      CHECK(tr.mass(k) == doctest::Approx(mu.mass(k)).epsilon(1e-14));
    CHECK(tr.mass(m) == doctest::Approx(mu.tail_mass(m - 1)).epsilon(1e-12));
    CHECK(tr.mass(m + 1) == 0.0);
    CHECK(tr.total_mass() == doctest::Approx(mu.total_mass()).epsilon(1e-12));
  }
  // level 1 collapses everything onto the atom at 1
  auto one = mu_truncate(mu, 1);
  CHECK(one.mass(1) == doctest::Approx(mu.total_mass()).epsilon(1e-12));
  CHECK(one.mass(2) == 0.0);
  CHECK_THROWS_AS(mu_truncate(mu, 0), DomainError);
}

TEST_CASE("smooth continuation and its derivative majorants") {
  auto mu = SplittingMeasure::log_power(2.0, 1.5);
  CHECK(mu.has_continuation());
  double x0 = mu.continuation_from();
  for (double x : {x0, 2.0 * x0, 1e5}) {
    CHECK(mu.density_cont(x) ==
          doctest::Approx(2.0 * std::pow(std::log(x), 1.5) / (x * x)).epsilon(1e-13));
    // central differences stay under the published majorants
    double h = x * 1e-5;
    double d1 = (mu.density_cont(x + h) - mu.density_cont(x - h)) / (2.0 * h);
    double d2 = (mu.density_cont(x + h) - 2.0 * mu.density_cont(x) +
                 mu.density_cont(x - h)) / (h * h);
    CHECK(std::fabs(d1) <= mu.density_cont_d1_bound(x) * (1.0 + 1e-6));
    CHECK(std::fabs(d2) <= mu.density_cont_d2_bound(x) * (1.0 + 1e-4));
    // majorants decrease along the tail
    CHECK(mu.density_cont_d1_bound(2.0 * x) <= mu.density_cont_d1_bound(x));
    CHECK(mu.density_cont_d2_bound(2.0 * x) <= mu.density_cont_d2_bound(x));
  }
}
