#include "efc/samplers.hpp"

#include <algorithm>
#include <cmath>

#include "efc/errors.hpp"
#include "efc/special.hpp"

namespace efc {

std::int64_t sample_binom_ge2(std::int64_t n, double x, Philox& rng) {
  if (n < 2) throw DomainError("conditioned binomial needs n >= 2");
  if (!(x > 0.0) || !(x < 1.0))
    throw DomainError("conditioned binomial needs x in (0, 1)");
  const double p2 = special::binom_tail_ge2(n, x);
  if (!(p2 > 0.0)) throw DomainError("conditioned binomial has no mass");
  const double target = rng.uniform01() * p2;
  const double odds = x / (1.0 - x);

  if (double(n) * x <= 30.0) {
    // inversion from the bottom; the conditioning cuts exactly k = 0, 1
    double pk = std::exp(special::log_binomial(n, 2) + 2.0 * std::log(x) +
                         double(n - 2) * std::log1p(-x));
    double cum = pk;
    std::int64_t k = 2;
    while (cum < target && k < n) {
      pk *= (double(n - k) / double(k + 1)) * odds;
      ++k;
      cum += pk;
    }
    return k;
  }

  // mass sits near the mode; enumerate outward from it so the walk stays
  // O(sigma) instead of O(n x)
  std::int64_t m = std::int64_t(double(n + 1) * x);
  m = std::clamp<std::int64_t>(m, 2, n);
  const double pm = std::exp(special::log_binomial(n, m) +
                             double(m) * std::log(x) +
                             double(n - m) * std::log1p(-x));
  double cum = pm;
  if (cum >= target) return m;
  double plo = pm, phi = pm;
  std::int64_t lo = m, hi = m;
  while (lo > 2 || hi < n) {
    if (hi < n && (lo <= 2 || phi >= plo)) {
      phi *= (double(n - hi) / double(hi + 1)) * odds;
      ++hi;
      cum += phi;
      if (cum >= target) return hi;
    } else {
      plo *= (double(lo) / double(n - lo + 1)) / odds;
      --lo;
      cum += plo;
      if (cum >= target) return lo;
    }
  }
  return m;  // rounding left target unreached; the mode is the safe answer
}

// ---------------------------------------------------------------------------
// FragSampler
// ---------------------------------------------------------------------------

FragSampler::FragSampler(const SplittingMeasure& mu, std::uint64_t head)
    : mu_(mu) {
  const double total = mu_.total_mass();
  if (!(total > 0.0)) return;  // no mass; sample() reports it

  std::uint64_t K = std::max<std::uint64_t>({head, 2, mu_.table_size()});
  if (mu_.has_continuation()) {
    A_ = mu_.cont_alpha();
    B_ = mu_.cont_b();
    // tail proposal rate 1 - A/log(K+1) must stay >= 0.1
    while (std::log(double(K) + 1.0) < A_ / 0.9 && K < (1ull << 22)) K *= 2;
    if (std::log(double(K) + 1.0) < A_ / 0.9)
      throw DomainError("splitting tail exponent too large for sampling");
  }
  if (K > (1ull << 22))
    throw DomainError("fragment alias table would exceed the supported size");
  K_ = K;

  std::vector<double> w(K_);
  double head_mass = 0.0;
  for (std::uint64_t k = 1; k <= K_; ++k) {
    w[k - 1] = mu_.mass(k);
    head_mass += w[k - 1];
  }
  const double tail = mu_.tail_mass(K_);
  p_tail_ = tail / (head_mass + tail);
  if (tail > 0.0) {
    L_ = std::log(double(K_) + 1.0);
    r_ = 1.0 - A_ / L_;
    infl_ = (1.0 + 1.0 / double(K_)) * (1.0 + 1.0 / double(K_));
  }

  prob_.assign(K_, 1.0);
  alias_.assign(K_, 0);
  if (head_mass > 0.0) {
    // Vose construction
    const double mean = head_mass / double(K_);
    std::vector<double> scaled(K_);
    std::vector<std::uint32_t> small, large;
    for (std::uint64_t i = 0; i < K_; ++i) {
      scaled[i] = w[i] / mean;
      (scaled[i] < 1.0 ? small : large).push_back(std::uint32_t(i));
    }
    while (!small.empty() && !large.empty()) {
      const auto s = small.back();
      const auto l = large.back();
      small.pop_back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
  }
}

std::uint64_t FragSampler::sample(Philox& rng) const {
  if (K_ == 0) throw DomainError("splitting measure has no mass");
  const double u0 = rng.uniform01();
  if (u0 >= p_tail_) {
    const double v = rng.uniform01() * double(K_);
    std::uint64_t j = std::uint64_t(v);
    if (j >= K_) j = K_ - 1;
    return (v - double(j) < prob_[j]) ? j + 1 : std::uint64_t(alias_[j]) + 1;
  }
  // tail: target mass B (log k)^A / k^2 on k > K. Draw x = (K+1) e^y with
  // y ~ Exp(r), accept against the inflated continuation, floor to the cell.
  for (int it = 0; it < 100000; ++it) {
    const double y = -std::log(rng.uniform01()) / r_;
    const double u2 = rng.uniform01();
    // x beyond either guard carries < 1e-14 of the tail mass
    if (y > 600.0) continue;
    const double x = (double(K_) + 1.0) * std::exp(y);
    if (x >= 9.0e18) continue;
    const std::uint64_t k = std::uint64_t(x);
    const double lx = L_ + y;  // log x
    // log1p(u) - u cancels near 0, but the acceptance error that leaves is
    // O(eps u), far below sampling resolution
    const double a1 = std::exp(A_ * (std::log1p(y / L_) - y / L_));
    const double a2 =
        mu_.mass(k) * x * x / (B_ * infl_ * std::pow(lx, A_));
    if (u2 < a1 * a2) return k;
  }
  throw Error("fragment tail rejection stalled");
}

// ---------------------------------------------------------------------------
// CoagSampler
// ---------------------------------------------------------------------------

// Envelope of f(x) min(x^-2, M) P(Bin >= 2) <= f(x) min(x^-2, M) on (0, 1),
// with M = bucket (bucket-1)/2. Pieces carry proposal masses, not exact
// envelope areas, so one uniform decides acceptance against the true target.
struct CoagSampler::Envelope {
  std::int64_t bucket = 0;
  double cap = 0.0;
  double t_star = 0.0;  // log sqrt(cap); x^-2 crosses the cap there
  double x_star = 0.0;
  bool log_power = false;
  double c = 0.0, beta = 0.0;  // log-power density c (log 1/x)^(beta-1)
  double scale = 0.0;          // uniform density
  double r_tail = 0.0;         // flat piece shifted-exp proposal rate
  std::vector<double> cum;
  std::vector<double> t_hi, t_lo;  // log-power slices in t = log 1/x
};

CoagSampler::CoagSampler(const CoagulationMeasure& lam,
                         std::int64_t table_limit, std::size_t cache_capacity)
    : lam_(lam),
      table_limit_(std::max<std::int64_t>(2, table_limit)),
      tables_(cache_capacity) {}

double CoagSampler::total_rate(std::int64_t n) const {
  if (n < 2) return 0.0;
  if (n <= table_limit_) return tables_.get(lam_, n)->total;
  {
    std::lock_guard g(lock_);
    const auto it = totals_.find(n);
    if (it != totals_.end()) return it->second;
  }
  const double v = total_coag_rate(lam_, n);
  std::lock_guard g(lock_);
  totals_.emplace(n, v);
  return v;
}

std::shared_ptr<const CoagSampler::Envelope> CoagSampler::envelope_for(
    std::int64_t n) const {
  std::int64_t b = 2;
  while (b < n) b <<= 1;
  {
    std::lock_guard g(lock_);
    const auto it = envelopes_.find(b);
    if (it != envelopes_.end()) return it->second;
  }
  auto env = std::make_shared<Envelope>();
  env->bucket = b;
  env->cap = 0.5 * double(b) * double(b - 1);
  env->t_star = 0.5 * std::log(env->cap);
  env->x_star = std::exp(-env->t_star);
  switch (lam_.family()) {
    case LambdaFamily::Uniform: {
      env->scale = lam_.uniform_scale();
      const double head = env->scale * (1.0 / env->x_star - 1.0);
      const double flat = env->scale * std::sqrt(env->cap);
      env->cum = {head, head + flat};
      break;
    }
    case LambdaFamily::LogPower: {
      env->log_power = true;
      env->c = lam_.lp_c();
      env->beta = lam_.lp_beta();
      const double r = 1.0 - (env->beta - 1.0) / env->t_star;
      if (r < 0.1)
        throw EnvelopeUnavailable(
            "log-power exponent too large for the merge envelope at this n");
      env->r_tail = r;
      // slices of width 1/4 down from t_star; within each the factor e^t is
      // frozen at the top edge and t^(beta-1) is inverted exactly
      double acc = 0.0;
      for (double hi = env->t_star; hi > 0.0;) {
        const double lo = std::max(0.0, hi - 0.25);
        acc += env->c * std::exp(hi) *
               (std::pow(hi, env->beta) - std::pow(lo, env->beta)) / env->beta;
        env->t_hi.push_back(hi);
        env->t_lo.push_back(lo);
        env->cum.push_back(acc);
        hi = lo;
      }
      acc += env->c * std::sqrt(env->cap) *
             std::pow(env->t_star, env->beta - 1.0) / r;
      env->cum.push_back(acc);
      break;
    }
    default:
      throw EnvelopeUnavailable(
          "no merge envelope for this coagulation family above the table "
          "limit");
  }
  std::lock_guard g(lock_);
  return envelopes_.emplace(b, std::move(env)).first->second;
}

std::int64_t CoagSampler::sample_rejection(std::int64_t n, Philox& rng,
                                           CoagAcceptStats* stats) const {
  const auto env = envelope_for(n);
  const double total = env->cum.back();
  const std::size_t last = env->cum.size() - 1;
  for (int it = 0; it < 1000000; ++it) {
    if (stats) ++stats->proposals;
    const double u = rng.uniform01() * total;
    std::size_t idx = std::size_t(
        std::lower_bound(env->cum.begin(), env->cum.end(), u) -
        env->cum.begin());
    if (idx > last) idx = last;
    const double v = rng.uniform01();
    double x, accept;
    if (!env->log_power) {
      if (idx == 0) {
        // density scale * x^-2 on [x_star, 1), exact inverse CDF
        x = 1.0 / (1.0 / env->x_star - v * (1.0 / env->x_star - 1.0));
        accept = special::binom_tail_ge2(n, x);
      } else {
        x = v * env->x_star;
        accept = special::binom_tail_ge2(n, x) / (x * x * env->cap);
      }
    } else if (idx < last) {
      const double hi = env->t_hi[idx], lo = env->t_lo[idx];
      const double bt = std::pow(lo, env->beta) +
                        v * (std::pow(hi, env->beta) - std::pow(lo, env->beta));
      const double t = std::pow(bt, 1.0 / env->beta);
      x = std::exp(-t);
      accept = std::exp(t - hi) * special::binom_tail_ge2(n, x);
    } else {
      const double s = -std::log(v) / env->r_tail;
      const double t = env->t_star + s;
      x = std::exp(-t);
      const double a1 = std::exp(
          (env->beta - 1.0) *
          (std::log1p(s / env->t_star) - s / env->t_star));
      // past t = 150 the binomial tail is C(n,2) x^2 to full precision and
      // x^2 exp(2t) in floats would be 0 * inf
      const double a2 =
          t > 150.0
              ? 0.5 * double(n) * double(n - 1) / env->cap
              : special::binom_tail_ge2(n, x) * std::exp(2.0 * t) / env->cap;
      accept = a1 * a2;
    }
    if (rng.uniform01() < accept) {
      if (stats) ++stats->accepts;
      x = std::min(x, 1.0 - 1e-16);
      if (double(n) * x <= 1e-12) return 2;  // P(k > 2 | k >= 2) < 1e-12
      return sample_binom_ge2(n, x, rng);
    }
  }
  throw Error("merge envelope rejection stalled");
}

std::int64_t CoagSampler::sample(std::int64_t n, Philox& rng,
                                 CoagAcceptStats* stats) const {
  if (n < 2) throw DomainError("merge needs at least two blocks");
  if (n > table_limit_) return sample_rejection(n, rng, stats);
  const auto tab = tables_.get(lam_, n);
  if (!(tab->total > 0.0)) throw DomainError("no merge rate at this n");
  if (stats) {
    ++stats->proposals;
    ++stats->accepts;
  }
  const double u = rng.uniform01() * tab->cum.back();
  std::size_t i = std::size_t(
      std::lower_bound(tab->cum.begin(), tab->cum.end(), u) -
      tab->cum.begin());
  if (i >= tab->cum.size()) i = tab->cum.size() - 1;
  return std::int64_t(i) + 2;
}

}  // namespace efc
