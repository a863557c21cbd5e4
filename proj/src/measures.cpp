#include "efc/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "efc/errors.hpp"
#include "efc/parallel.hpp"
#include "efc/special.hpp"

namespace efc {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t hash_double(double v, std::uint64_t h) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return fnv1a(&bits, sizeof bits, h);
}

std::uint64_t hash_vec(const std::vector<double>& v, std::uint64_t h) {
  for (double x : v) h = hash_double(x, h);
  return h;
}

constexpr std::uint64_t kFnvBasis = 0xcbf29ce484222325ull;

}  // namespace

// --- CoagulationMeasure -----------------------------------------------------

CoagulationMeasure CoagulationMeasure::uniform(double scale) {
  if (!(scale > 0.0)) throw DomainError("uniform coagulation: scale must be > 0");
  CoagulationMeasure m;
  m.family_ = LambdaFamily::Uniform;
  m.p0_ = scale;
  m.mass_ = scale;
  m.key_ = hash_double(scale, fnv1a("u", 1, kFnvBasis));
  return m;
}

CoagulationMeasure CoagulationMeasure::log_power(double c, double beta) {
  if (!(c > 0.0)) throw DomainError("log-power coagulation: c must be > 0");
  if (!(beta > 1.0)) throw DomainError("log-power coagulation: beta must be > 1");
  CoagulationMeasure m;
  m.family_ = LambdaFamily::LogPower;
  m.p0_ = c;
  m.p1_ = beta;
  m.mass_ = c * std::tgamma(beta);  // integral of (log 1/x)^(beta-1) over (0,1)
  m.key_ = hash_double(beta, hash_double(c, fnv1a("l", 1, kFnvBasis)));
  return m;
}

CoagulationMeasure CoagulationMeasure::beta_density(double a, double b,
                                                    double scale) {
  if (!(a > 0.0) || !(b > 0.0))
    throw DomainError("beta coagulation: shape parameters must be > 0");
  if (!(scale > 0.0)) throw DomainError("beta coagulation: scale must be > 0");
  CoagulationMeasure m;
  m.family_ = LambdaFamily::BetaDensity;
  m.p0_ = a;
  m.p1_ = b;
  m.p2_ = scale;
  m.mass_ = scale;
  m.log_beta_fn_ = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  m.key_ = hash_double(scale,
                       hash_double(b, hash_double(a, fnv1a("b", 1, kFnvBasis))));
  return m;
}

CoagulationMeasure CoagulationMeasure::tabulated(std::vector<double> grid,
                                                 std::vector<double> values) {
  if (grid.size() < 2 || grid.size() != values.size())
    throw DomainError("tabulated coagulation: need matching grid/values, >= 2 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !(grid[i] < 1.0))
      throw DomainError("tabulated coagulation: abscissae must lie in (0, 1)");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw DomainError("tabulated coagulation: abscissae must increase strictly");
    if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
      throw DomainError("tabulated coagulation: values must be finite and >= 0");
  }
  CoagulationMeasure m;
  m.family_ = LambdaFamily::Tabulated;
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    mass += 0.5 * (values[i] + values[i + 1]) * (grid[i + 1] - grid[i]);
  m.mass_ = mass;
  m.key_ = hash_vec(values, hash_vec(grid, fnv1a("t", 1, kFnvBasis)));
  m.grid_ = std::move(grid);
  m.values_ = std::move(values);
  return m;
}

double CoagulationMeasure::density(double x) const {
  if (!(x > 0.0) || !(x < 1.0))
    throw DomainError("coagulation density: x must lie in (0, 1)");
  switch (family_) {
    case LambdaFamily::Uniform:
      return p0_;
    case LambdaFamily::LogPower:
      return p0_ * std::pow(-std::log(x), p1_ - 1.0);
    case LambdaFamily::BetaDensity:
      return p2_ * std::exp((p0_ - 1.0) * std::log(x) +
                            (p1_ - 1.0) * std::log1p(-x) - log_beta_fn_);
    case LambdaFamily::Tabulated: {
      if (x <= grid_.front() || x >= grid_.back()) {
        // hull endpoints carry their tabulated value; outside is zero
        if (x == grid_.front()) return values_.front();
        if (x == grid_.back()) return values_.back();
        return 0.0;
      }
      auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
      std::size_t i = std::size_t(it - grid_.begin()) - 1;
      double w = (x - grid_[i]) / (grid_[i + 1] - grid_[i]);
      return values_[i] + w * (values_[i + 1] - values_[i]);
    }
  }
  return 0.0;
}

double CoagulationMeasure::density_at_exp(double t) const {
  if (!(t > 0.0)) throw DomainError("density_at_exp: t must be > 0");
  switch (family_) {
    case LambdaFamily::Uniform:
      return p0_;
    case LambdaFamily::LogPower:
      return p0_ * std::pow(t, p1_ - 1.0);
    case LambdaFamily::BetaDensity:
      // x^(a-1) = e^{-t(a-1)}, 1-x = -expm1(-t); stays accurate for t near 0
      return p2_ * std::exp(-(p0_ - 1.0) * t +
                            (p1_ - 1.0) * std::log(-std::expm1(-t)) -
                            log_beta_fn_);
    case LambdaFamily::Tabulated:
      return density(std::exp(-t));
  }
  return 0.0;
}

double CoagulationMeasure::support_lo() const {
  return family_ == LambdaFamily::Tabulated ? grid_.front() : 0.0;
}

double CoagulationMeasure::support_hi() const {
  return family_ == LambdaFamily::Tabulated ? grid_.back() : 1.0;
}

#define EFC_REQUIRE_FAMILY(fam, name)                           \
  if (family_ != fam) throw DomainError(name ": wrong family"); \
  (void)0

double CoagulationMeasure::uniform_scale() const {
  EFC_REQUIRE_FAMILY(LambdaFamily::Uniform, "uniform_scale");
  return p0_;
}
double CoagulationMeasure::lp_c() const {
  EFC_REQUIRE_FAMILY(LambdaFamily::LogPower, "lp_c");
  return p0_;
}
double CoagulationMeasure::lp_beta() const {
  EFC_REQUIRE_FAMILY(LambdaFamily::LogPower, "lp_beta");
  return p1_;
}
double CoagulationMeasure::beta_a() const {
  EFC_REQUIRE_FAMILY(LambdaFamily::BetaDensity, "beta_a");
  return p0_;
}
double CoagulationMeasure::beta_b() const {
  EFC_REQUIRE_FAMILY(LambdaFamily::BetaDensity, "beta_b");
  return p1_;
}
double CoagulationMeasure::beta_scale() const {
  EFC_REQUIRE_FAMILY(LambdaFamily::BetaDensity, "beta_scale");
  return p2_;
}
const std::vector<double>& CoagulationMeasure::tab_grid() const {
  EFC_REQUIRE_FAMILY(LambdaFamily::Tabulated, "tab_grid");
  return grid_;
}
const std::vector<double>& CoagulationMeasure::tab_values() const {
  EFC_REQUIRE_FAMILY(LambdaFamily::Tabulated, "tab_values");
  return values_;
}

#undef EFC_REQUIRE_FAMILY

// --- SplittingMeasure -------------------------------------------------------

SplittingMeasure SplittingMeasure::log_power(double b, double alpha, double mu1) {
  if (!(b > 0.0)) throw DomainError("log-power splitting: b must be > 0");
  if (!(alpha > 0.0)) throw DomainError("log-power splitting: alpha must be > 0");
  if (!(mu1 >= 0.0)) throw DomainError("log-power splitting: mu1 must be >= 0");
  SplittingMeasure m;
  m.family_ = MuFamily::LogPower;
  m.b_ = b;
  m.alpha_ = alpha;
  m.mu1_ = mu1;
  m.key_ = hash_double(mu1, hash_double(alpha,
                       hash_double(b, fnv1a("m", 1, kFnvBasis))));
  return m;
}

SplittingMeasure SplittingMeasure::tabulated(std::vector<double> masses,
                                             std::optional<PowerLogTail> tail) {
  if (masses.empty())
    throw DomainError("tabulated splitting: need at least one mass");
  for (double v : masses)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw DomainError("tabulated splitting: masses must be finite and >= 0");
  if (tail) {
    if (!(tail->b > 0.0) || !std::isfinite(tail->b) || !(tail->alpha > 0.0) ||
        !std::isfinite(tail->alpha))
      throw DomainError("tabulated splitting: tail parameters invalid");
  }
  SplittingMeasure m;
  m.family_ = MuFamily::Tabulated;
  std::uint64_t h = hash_vec(masses, fnv1a("T", 1, kFnvBasis));
  if (tail) h = hash_double(tail->alpha, hash_double(tail->b, h));
  m.key_ = h;
  m.masses_ = std::move(masses);
  m.tail_ = tail;
  if (m.tail_) {
    m.b_ = m.tail_->b;
    m.alpha_ = m.tail_->alpha;
  }
  return m;
}

double SplittingMeasure::mass(std::uint64_t k) const {
  if (k == 0) throw DomainError("splitting mass: k must be >= 1");
  if (family_ == MuFamily::LogPower) {
    if (k == 1) return mu1_;
    const double lk = std::log(double(k));
    return b_ * std::pow(lk, alpha_) / (double(k) * double(k));
  }
  if (k <= masses_.size()) return masses_[k - 1];
  if (tail_) {
    const double lk = std::log(double(k));
    return tail_->b * std::pow(lk, alpha_) / (double(k) * double(k));
  }
  return 0.0;
}

bool SplittingMeasure::finite_support() const {
  return family_ == MuFamily::Tabulated && !tail_;
}

bool SplittingMeasure::has_continuation() const {
  return family_ == MuFamily::LogPower || tail_.has_value();
}

double SplittingMeasure::continuation_from() const {
  if (!has_continuation()) throw DomainError("no smooth tail continuation");
  return family_ == MuFamily::LogPower ? 2.0 : double(masses_.size() + 1);
}

double SplittingMeasure::density_cont(double x) const {
  if (!has_continuation()) return 0.0;
  const double lx = std::log(x);
  return b_ * std::pow(lx, alpha_) / (x * x);
}

double SplittingMeasure::cont_b() const {
  if (!has_continuation()) throw DomainError("no smooth tail continuation");
  return b_;
}

double SplittingMeasure::cont_alpha() const {
  if (!has_continuation()) throw DomainError("no smooth tail continuation");
  return alpha_;
}

double SplittingMeasure::density_cont_d1_bound(double x) const {
  if (!has_continuation()) return 0.0;
  const double lx = std::log(x);
  return b_ * std::pow(lx, alpha_) * (2.0 + alpha_ / lx) / (x * x * x);
}

double SplittingMeasure::density_cont_d2_bound(double x) const {
  if (!has_continuation()) return 0.0;
  const double lx = std::log(x);
  return b_ * std::pow(lx, alpha_) *
         (6.0 + 5.0 * alpha_ / lx + alpha_ * (alpha_ + 1.0) / (lx * lx)) /
         (x * x * x * x);
}

void SplittingMeasure::ensure_total() const {
  if (total_ >= 0.0) return;
  if (finite_support()) {
    double s = 0.0;
    for (double v : masses_) s += v;
    total_ = s;
    total_err_ = 0.0;
    return;
  }
  // Head: exact partial sum. Tail: closed-form integral of the smooth
  // continuation from K + 1/2 (midpoint rule over unit cells); its defect is
  // bounded by the second-derivative majorant and must sit below tol.
  const double tol = 1e-10;
  const std::uint64_t k_from = std::uint64_t(continuation_from());
  std::uint64_t K = std::max<std::uint64_t>(1 << 16, k_from - 1);
  double head = 0.0;
  for (std::uint64_t k = 1; k < k_from; ++k) head += mass(k);
  std::uint64_t summed_to = k_from - 1;
  for (;;) {
    for (std::uint64_t k = summed_to + 1; k <= K; ++k) head += mass(k);
    summed_to = K;
    const double s0 = std::log(double(K) + 0.5);
    const double tail = b_ * special::upper_gamma(alpha_ + 1.0, s0);
    // |sum_{k>K} g(k) - int_{K+1/2} g| <= (1/24) int_{K}^inf |g''|; the
    // integral is bounded by |g''(K)| * K / 3 for this decay profile.
    const double em =
        (density_cont_d2_bound(double(K)) * double(K) / 3.0 +
         density_cont_d1_bound(double(K)) / double(K)) /
        24.0 * 2.0;
    if (em <= tol * std::max(1.0, head + tail) || K >= (1ull << 26)) {
      if (em > tol * std::max(1.0, head + tail))
        throw TailNotConvergent("splitting tail: remainder bound above tolerance");
      total_ = head + tail;
      total_err_ = em;
      return;
    }
    K *= 4;
  }
}

double SplittingMeasure::total_mass() const {
  ensure_total();
  return total_;
}

double SplittingMeasure::total_mass_error() const {
  ensure_total();
  return total_err_;
}

double SplittingMeasure::tail_mass(std::uint64_t k) const {
  ensure_total();
  if (k == 0) return total_;
  if (finite_support() && k >= masses_.size()) return 0.0;
  double head = 0.0;
  for (std::uint64_t j = 1; j <= k; ++j) head += mass(j);
  double t = total_ - head;
  return t > 0.0 ? t : 0.0;
}

double SplittingMeasure::partial_first_moment(std::uint64_t n) const {
  if (n == 0) return 0.0;
  const std::uint64_t direct_to =
      finite_support() ? std::min<std::uint64_t>(n, masses_.size())
                       : std::min<std::uint64_t>(n, 10'000'000);
  double s = 0.0;
  if (family_ == MuFamily::LogPower) {
    const double b = b_, alpha = alpha_;
    s = mu1_ + chunked_sum(2, direct_to + 1, [b, alpha](std::uint64_t k) {
          return b * std::pow(std::log(double(k)), alpha) / double(k);
        });
  } else {
    for (std::uint64_t k = 1; k <= direct_to; ++k) s += double(k) * mass(k);
  }
  if (n > direct_to && has_continuation() && n > 10'000'000) {
    // integral of b (log x)^alpha / x has the exact antiderivative
    // b (log x)^(alpha+1) / (alpha+1); midpoint end corrections are
    // O((log K)^alpha / K), far below use-site tolerances at K = 1e7
    const double lo = std::log(double(direct_to) + 0.5);
    const double hi = std::log(double(n) + 0.5);
    s += b_ * (std::pow(hi, alpha_ + 1.0) - std::pow(lo, alpha_ + 1.0)) /
         (alpha_ + 1.0);
  }
  return s;
}

double SplittingMeasure::lp_b() const {
  if (family_ != MuFamily::LogPower) throw DomainError("lp_b: wrong family");
  return b_;
}
double SplittingMeasure::lp_alpha() const {
  if (family_ != MuFamily::LogPower) throw DomainError("lp_alpha: wrong family");
  return alpha_;
}
double SplittingMeasure::lp_mu1() const {
  if (family_ != MuFamily::LogPower) throw DomainError("lp_mu1: wrong family");
  return mu1_;
}

SplittingMeasure mu_truncate(const SplittingMeasure& mu, std::uint64_t m) {
  if (m == 0) throw DomainError("mu_truncate: level must be >= 1");
  std::vector<double> masses(m, 0.0);
  for (std::uint64_t k = 1; k < m; ++k) masses[k - 1] = mu.mass(k);
  masses[m - 1] = mu.tail_mass(m - 1);
  return SplittingMeasure::tabulated(std::move(masses), std::nullopt);
}

}  // namespace efc
