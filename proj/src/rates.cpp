#include "efc/rates.hpp"

#include <cmath>
#include <exception>
#include <list>
#include <mutex>
#include <unordered_map>

#include "efc/errors.hpp"
#include "efc/quadrature.hpp"
#include "efc/special.hpp"

namespace efc {

namespace {

// Everything is integrated in t = log(1/x). The cap keeps the neglected
// sliver (0, e^-tmax) below any use-site tolerance: the integrands here are
// bounded by n^2/2 times the measure density, and the log-power densities
// put mass ~ e^-T T^(beta-1) below e^-T.
double t_cap(const CoagulationMeasure& lam, std::int64_t n) {
  double tmax = 2.0 * std::log(double(std::max<std::int64_t>(n, 2))) + 40.0;
  const double lo = lam.support_lo();
  if (lo > 0.0) tmax = std::min(tmax, -std::log(lo) + 1e-12);
  return tmax;
}

std::vector<double> panels_for(const CoagulationMeasure& lam, std::int64_t n) {
  const double hi = lam.support_hi();
  const double t_lo = hi < 1.0 ? -std::log(hi) : 0.0;
  const double t_hi = t_cap(lam, n);
  std::vector<double> pts;
  pts.push_back(t_lo);
  for (double t = std::floor(t_lo) + 1.0; t < t_hi; t += 1.0)
    if (t > t_lo) pts.push_back(t);
  pts.push_back(t_hi);
  return pts;
}

quad::Options quad_opts(const RateOptions& opt) {
  quad::Options q;
  q.rel_tol = opt.rel_tol;
  q.abs_tol = 1e-280;  // pure relative control; rates can be arbitrarily small
  return q;
}

void check_nk(std::int64_t n, std::int64_t k) {
  if (n < 2) throw DomainError("merge rate: n must be >= 2");
  if (k < 2 || k > n) throw DomainError("merge rate: k must lie in [2, n]");
}

double integrate_kernel(const CoagulationMeasure& lam, std::int64_t n,
                        std::int64_t k, double log_weight,
                        const RateOptions& opt) {
  const double km2 = double(k - 2);
  const double nmk = double(n - k);
  auto f = [&](double t) {
    double e = log_weight - km2 * t - t;
    if (nmk > 0.0) e += nmk * std::log1p(-std::exp(-t));
    return std::exp(e) * lam.density_at_exp(t);
  };
  const auto pts = panels_for(lam, n);
  return quad::integrate_panels(f, pts, quad_opts(opt)).value;
}

// lambda_nk = scale B(k-2+a, n-k+b) / B(a, b); uniform is (a, b) = (1, 1),
// where the binomial weight telescopes to n / (k (k-1))
bool beta_params(const CoagulationMeasure& lam, double& a, double& b,
                 double& scale) {
  if (lam.family() == LambdaFamily::Uniform) {
    a = 1.0;
    b = 1.0;
    scale = lam.uniform_scale();
    return true;
  }
  if (lam.family() == LambdaFamily::BetaDensity) {
    a = lam.beta_a();
    b = lam.beta_b();
    scale = lam.beta_scale();
    return true;
  }
  return false;
}

double lbeta(double p, double q) {
  return std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q);
}

}  // namespace

double lambda_nk(const CoagulationMeasure& lam, std::int64_t n, std::int64_t k,
                 const RateOptions& opt) {
  check_nk(n, k);
  double a, b, scale;
  if (opt.closed_form && beta_params(lam, a, b, scale))
    return scale * std::exp(lbeta(double(k) - 2.0 + a, double(n - k) + b) -
                            lbeta(a, b));
  return integrate_kernel(lam, n, k, 0.0, opt);
}

double coag_rate_nk(const CoagulationMeasure& lam, std::int64_t n,
                    std::int64_t k, const RateOptions& opt) {
  check_nk(n, k);
  double a, b, scale;
  if (opt.closed_form && beta_params(lam, a, b, scale)) {
    if (lam.family() == LambdaFamily::Uniform)
      return scale * double(n) / (double(k) * double(k - 1));
    return scale * std::exp(special::log_binomial(n, k) +
                            lbeta(double(k) - 2.0 + a, double(n - k) + b) -
                            lbeta(a, b));
  }
  return integrate_kernel(lam, n, k, special::log_binomial(n, k), opt);
}

RateTable build_rate_table(const CoagulationMeasure& lam, std::int64_t n,
                           ExecPolicy policy, const RateOptions& opt) {
  if (n < 1) throw DomainError("rate table: n must be >= 1");
  RateTable tab;
  tab.n = n;
  if (n == 1) return tab;
  tab.per_k.assign(std::size_t(n - 1), 0.0);
  const std::int64_t cnt = n - 1;
  if (policy == ExecPolicy::Parallel) {
    // an exception may not leave the parallel region
    std::exception_ptr first;
    std::mutex first_lock;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
    for (std::int64_t i = 0; i < cnt; ++i) {
      try {
        tab.per_k[std::size_t(i)] = coag_rate_nk(lam, n, i + 2, opt);
      } catch (...) {
        std::lock_guard<std::mutex> g(first_lock);
        if (!first) first = std::current_exception();
      }
    }
    if (first) std::rethrow_exception(first);
  } else {
    for (std::int64_t i = 0; i < cnt; ++i)
      tab.per_k[std::size_t(i)] = coag_rate_nk(lam, n, i + 2, opt);
  }
  tab.cum.resize(tab.per_k.size());
  double run = 0.0, phi = 0.0;
  for (std::size_t i = 0; i < tab.per_k.size(); ++i) {
    run += tab.per_k[i];
    tab.cum[i] = run;
    phi += tab.per_k[i] * double(i + 1);  // k - 1 = i + 1
  }
  tab.total = run;
  tab.phi = phi;
  return tab;
}

double total_coag_rate(const CoagulationMeasure& lam, std::int64_t n,
                       SumMethod method, const RateOptions& opt) {
  if (n < 1) throw DomainError("total_coag_rate: n must be >= 1");
  if (n == 1) return 0.0;
  if (method == SumMethod::Auto)
    method = n <= opt.n_direct ? SumMethod::DirectSum : SumMethod::IntegralIdentity;
  if (method == SumMethod::DirectSum)
    return build_rate_table(lam, n, ExecPolicy::Parallel, opt).total;
  auto f = [&](double t) {
    return special::binom_tail_ge2(n, std::exp(-t)) * std::exp(t) *
           lam.density_at_exp(t);
  };
  return quad::integrate_panels(f, panels_for(lam, n), quad_opts(opt)).value;
}

double phi_lambda(const CoagulationMeasure& lam, std::int64_t n,
                  SumMethod method, const RateOptions& opt) {
  if (n < 1) throw DomainError("phi_lambda: n must be >= 1");
  if (n == 1) return 0.0;
  if (method == SumMethod::Auto)
    method = n <= opt.n_direct ? SumMethod::DirectSum : SumMethod::IntegralIdentity;
  if (method == SumMethod::DirectSum)
    return build_rate_table(lam, n, ExecPolicy::Parallel, opt).phi;
  auto f = [&](double t) {
    return special::binom_mean_excess(n, std::exp(-t)) * std::exp(t) *
           lam.density_at_exp(t);
  };
  return quad::integrate_panels(f, panels_for(lam, n), quad_opts(opt)).value;
}

double phi_lambda_second_moment(const CoagulationMeasure& lam, std::int64_t n,
                                const RateOptions& opt) {
  if (n < 1) throw DomainError("phi_lambda_second_moment: n must be >= 1");
  if (n == 1) return 0.0;
  return lam.total_mass() * double(n) * double(n - 1) -
         phi_lambda(lam, n, SumMethod::Auto, opt);
}

double tail_coag_rate(const CoagulationMeasure& lam, std::int64_t n,
                      double delta, const RateOptions& opt) {
  if (n < 2) throw DomainError("tail_coag_rate: n must be >= 2");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw DomainError("tail_coag_rate: delta must lie in (0, 1)");
  const std::int64_t from = std::max<std::int64_t>(
      std::int64_t(std::floor(delta * double(n))) + 1, 2);
  if (from > n) return 0.0;
  const std::int64_t cnt = n - from + 1;
  std::vector<double> part(std::size_t(cnt), 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
  for (std::int64_t i = 0; i < cnt; ++i)
    part[std::size_t(i)] = coag_rate_nk(lam, n, from + i, opt);
  double s = 0.0;
  for (double v : part) s += v;
  return s;
}

double phi_mu(const SplittingMeasure& mu, std::uint64_t n) {
  if (n == 0) throw DomainError("phi_mu: n must be >= 1");
  return double(n) * mu.partial_first_moment(n);
}

double phi_diff(const ModelSpec& spec, std::int64_t n, SumMethod method,
                const RateOptions& opt) {
  if (n < 1) throw DomainError("phi_diff: n must be >= 1");
  return phi_lambda(spec.lambda, n, method, opt) -
         phi_mu(spec.mu, std::uint64_t(n));
}

// --- RateTableCache ---------------------------------------------------------

struct RateTableCache::Impl {
  struct Key {
    std::uint64_t measure;
    std::int64_t n;
    bool operator==(const Key& o) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::size_t(k.measure * 0x9E3779B97F4A7C15ull ^
                         std::uint64_t(k.n) * 0xC2B2AE3D27D4EB4Full);
    }
  };
  std::size_t capacity;
  mutable std::mutex mu;
  std::list<Key> order;  // front = most recent
  std::unordered_map<Key, std::pair<std::shared_ptr<const RateTable>,
                                    std::list<Key>::iterator>, KeyHash>
      map;
};

RateTableCache::RateTableCache(std::size_t capacity) : impl_(new Impl) {
  impl_->capacity = std::max<std::size_t>(capacity, 1);
}

RateTableCache::~RateTableCache() = default;

std::shared_ptr<const RateTable> RateTableCache::get(
    const CoagulationMeasure& lam, std::int64_t n, ExecPolicy policy) {
  Impl::Key key{lam.key(), n};
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->map.find(key);
    if (it != impl_->map.end()) {
      impl_->order.splice(impl_->order.begin(), impl_->order, it->second.second);
      return it->second.first;
    }
  }
  // built outside the lock; a concurrent duplicate build is benign
  auto table = std::make_shared<const RateTable>(build_rate_table(lam, n, policy));
  std::lock_guard<std::mutex> lock(impl_->mu);
  auto it = impl_->map.find(key);
  if (it != impl_->map.end()) return it->second.first;
  impl_->order.push_front(key);
  impl_->map.emplace(key, std::make_pair(table, impl_->order.begin()));
  if (impl_->map.size() > impl_->capacity) {
    impl_->map.erase(impl_->order.back());
    impl_->order.pop_back();
  }
  return table;
}

std::size_t RateTableCache::size() const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  return impl_->map.size();
}

}  // namespace efc
