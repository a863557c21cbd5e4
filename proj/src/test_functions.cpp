#include "efc/test_functions.hpp"

#include <cmath>

#include "efc/errors.hpp"

namespace efc {

namespace {

// log^(m) x, or NaN when some intermediate leaves the domain
double iter_log(int m, double x) {
  for (int i = 0; i < m; ++i) {
    if (!(x > 0.0)) return std::nan("");
    x = std::log(x);
  }
  return x;
}

double loglog(double x) { return std::log(std::log(x)); }

}  // namespace

TestFunction TestFunction::iterated_log(int m, double l) {
  if (m < 0) throw DomainError("iterated log: depth must be >= 0");
  if (!(l >= 0.0)) throw DomainError("iterated log: shift must be >= 0");
  const double at1 = iter_log(m, 1.0 + l);
  if (!(at1 > 0.0))
    throw DomainError("iterated log: log^(m)(1 + l) must be positive");
  TestFunction f;
  f.family_ = TestFnFamily::IteratedLog;
  f.orientation_ = Orientation::IncreasingToInf;
  f.growth_ = m == 0 ? GrowthClass::Linear : GrowthClass::LogGrowth;
  f.m_ = m;
  f.l_ = l;
  return f;
}

TestFunction TestFunction::iterated_log(int m) {
  // smallest integer shift with log^(m)(1 + l) > 0
  if (m < 0) throw DomainError("iterated log: depth must be >= 0");
  double l = 0.0;
  while (!(iter_log(m, 1.0 + l) > 0.0)) l += 1.0;
  return iterated_log(m, l);
}

TestFunction TestFunction::one_plus_inv_loglog(double l) {
  if (!(l >= 10.0))
    throw DomainError("reciprocal loglog families require shift >= 10");
  TestFunction f;
  f.family_ = TestFnFamily::OnePlusInvLogLog;
  f.orientation_ = Orientation::Bounded;
  f.growth_ = GrowthClass::Bounded;
  f.l_ = l;
  return f;
}

TestFunction TestFunction::inv_loglog(double l) {
  if (!(l >= 10.0))
    throw DomainError("reciprocal loglog families require shift >= 10");
  TestFunction f;
  f.family_ = TestFnFamily::InvLogLog;
  f.orientation_ = Orientation::DecreasingToZero;
  f.growth_ = GrowthClass::Bounded;
  f.l_ = l;
  return f;
}

TestFunction TestFunction::one_minus_inv_loglog(double l) {
  if (!(l >= 10.0))
    throw DomainError("reciprocal loglog families require shift >= 10");
  TestFunction f;
  f.family_ = TestFnFamily::OneMinusInvLogLog;
  f.orientation_ = Orientation::Bounded;
  f.growth_ = GrowthClass::Bounded;
  f.l_ = l;
  return f;
}

TestFunction TestFunction::plain_log() {
  TestFunction f;
  f.family_ = TestFnFamily::PlainLog;
  f.orientation_ = Orientation::IncreasingToInf;
  f.growth_ = GrowthClass::LogGrowth;
  return f;
}

TestFunction TestFunction::constant(double v) {
  TestFunction f;
  f.family_ = TestFnFamily::Constant;
  f.orientation_ = Orientation::Bounded;
  f.growth_ = GrowthClass::Flat;
  f.v_ = v;
  return f;
}

double TestFunction::operator()(double n) const {
  if (!(n >= 1.0)) throw DomainError("test function: n must be >= 1");
  switch (family_) {
    case TestFnFamily::IteratedLog:
      return iter_log(m_, n + l_);
    case TestFnFamily::OnePlusInvLogLog:
      return 1.0 + 1.0 / loglog(n + l_);
    case TestFnFamily::InvLogLog:
      return 1.0 / loglog(n + l_);
    case TestFnFamily::OneMinusInvLogLog:
      return 1.0 - 1.0 / loglog(n + l_);
    case TestFnFamily::PlainLog:
      return std::log(n);
    case TestFnFamily::Constant:
      return v_;
  }
  return 0.0;
}

double TestFunction::limit() const {
  switch (family_) {
    case TestFnFamily::OnePlusInvLogLog:
      return 1.0;
    case TestFnFamily::InvLogLog:
      return 0.0;
    case TestFnFamily::OneMinusInvLogLog:
      return 1.0;
    case TestFnFamily::Constant:
      return v_;
    default:
      throw DomainError("test function diverges; no limit");
  }
}

double TestFunction::deriv_bound(double x) const {
  if (!(x >= 1.0)) throw DomainError("derivative bound: x must be >= 1");
  switch (family_) {
    case TestFnFamily::Constant:
      return 0.0;
    case TestFnFamily::IteratedLog:
      // m = 0: f' = 1. Otherwise every intermediate log exceeds 1 by the
      // shift constraint, so |f'(y)| = 1/(y * prod of logs) <= 1/y.
      return m_ == 0 ? 1.0 : 1.0 / x;
    default:
      // log y * (loglog y)^2 >= 1 for y >= 11, guaranteed by shift >= 10
      return 1.0 / x;
  }
}

double TestFunction::deriv2_bound(double x) const {
  if (!(x >= 1.0)) throw DomainError("derivative bound: x must be >= 1");
  switch (family_) {
    case TestFnFamily::Constant:
      return 0.0;
    case TestFnFamily::IteratedLog:
      if (m_ == 0) return 0.0;
      [[fallthrough]];
    default:
      // generous envelope; the numerics suite checks it against central
      // differences family by family
      return 4.0 / (x * x);
  }
}

}  // namespace efc
