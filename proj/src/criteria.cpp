#include "efc/criteria.hpp"

#include <algorithm>
#include <cmath>

#include "efc/errors.hpp"

namespace efc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// 2 log 2 - 1/2
constexpr double kCriticalCoef = 0.8862943611198906;

void canonicalize(std::vector<std::int64_t>& grid, std::int64_t n_min,
                  const char* who) {
  if (grid.empty()) throw DomainError(std::string(who) + ": empty grid");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.front() < n_min)
    throw DomainError(std::string(who) + ": grid values must be >= " +
                      std::to_string(n_min));
}

std::size_t tail_lo(std::size_t len) {
  std::size_t win = std::max<std::size_t>(len / 4, std::min<std::size_t>(len, 4));
  return len - win;
}

double tail_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t len = y.size();
  std::size_t lo = tail_lo(len);
  double m = double(len - lo);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = lo; i < len; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double den = m * sxx - sx * sx;
  if (den <= 0.0) return 0.0;
  return (m * sxy - sx * sy) / den;
}

double tail_scale(const std::vector<double>& y) {
  double s = 1.0;
  for (std::size_t i = tail_lo(y.size()); i < y.size(); ++i)
    s = std::max(s, std::fabs(y[i]));
  return s;
}

// Bounded-above trend test for a ratio sequence sampled on a log-spaced grid.
// An upward tail slope alone is not disqualifying: convergence to a constant
// from below shows slope ~ 1/log^2 n, which exceeds any fixed tolerance on
// reachable grids. A slope past the tolerance is accepted only when the
// consecutive slopes over the last few points are strictly falling; a
// log-scale divergence holds them constant or growing.
bool trend_bounded(const std::vector<double>& x, const std::vector<double>& y,
                   double tol) {
  for (double v : y)
    if (!std::isfinite(v)) return false;
  if (tail_slope(x, y) <= tol * tail_scale(y)) return true;
  std::size_t len = y.size();
  std::size_t m = std::min<std::size_t>(len, 5);
  if (m < 3) return false;
  std::vector<double> s;
  for (std::size_t i = len - m; i + 1 < len; ++i)
    s.push_back((y[i + 1] - y[i]) / (x[i + 1] - x[i]));
  double smax = 0.0;
  for (double v : s) smax = std::max(smax, std::fabs(v));
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (!(s[i + 1] <= s[i] - tol * smax)) return false;
  return true;
}

void require_sorted_a(const std::vector<double>& a_list, const char* who) {
  if (a_list.empty()) throw DomainError(std::string(who) + ": empty a_list");
  if (!std::is_sorted(a_list.begin(), a_list.end()))
    throw DomainError(std::string(who) + ": a_list must be sorted");
}

}  // namespace

DriftReport check_nonexplosion(const ModelSpec& spec, const TestFunction& f,
                               std::vector<std::int64_t> grid,
                               const CriteriaOptions& opt) {
  if (f.orientation() != Orientation::IncreasingToInf)
    throw DomainError("check_nonexplosion: f must increase to infinity");
  canonicalize(grid, 1, "check_nonexplosion");
  DriftReport rep;
  rep.kind = DriftKind::NonExplosionBound;
  rep.grid = std::move(grid);
  std::vector<double> logn;
  for (std::int64_t n : rep.grid) {
    double g = f(double(n));
    if (!(g > 0.0))
      throw DomainError("check_nonexplosion: f must be positive on the grid");
    double v = gen_apply(spec, f, n, opt.gen).total;
    rep.values.push_back(v);
    rep.ratios.push_back(v / g);
    logn.push_back(std::log(double(n)));
  }
  rep.c_min = -kInf;
  for (double r : rep.ratios) rep.c_min = std::max(rep.c_min, r);
  rep.satisfied = std::isfinite(rep.c_min) &&
                  trend_bounded(logn, rep.ratios, opt.trend_tol);
  return rep;
}

DriftReport check_cdi_drift(const ModelSpec& spec, const TestFunction& f,
                            std::vector<std::int64_t> grid,
                            std::vector<double> a_list,
                            const CriteriaOptions& opt) {
  if (f.growth() != GrowthClass::Bounded && f.growth() != GrowthClass::Flat)
    throw DomainError("check_cdi_drift: f must be bounded");
  if (!spec.truncation)
    throw DomainError("check_cdi_drift: spec must carry a truncation level");
  canonicalize(grid, 1, "check_cdi_drift");
  require_sorted_a(a_list, "check_cdi_drift");
  DriftReport rep;
  rep.kind = DriftKind::CdiDrift;
  rep.grid = std::move(grid);
  rep.a_list = std::move(a_list);
  for (std::int64_t n : rep.grid) {
    double g = f(double(n));
    if (!(g > 0.0))
      throw DomainError("check_cdi_drift: f must be positive on the grid");
    double v = gen_truncated_apply(spec, f, n, opt.gen).total;
    rep.values.push_back(v);
    rep.ratios.push_back(v / g);
  }
  for (double a : rep.a_list) {
    double d = kInf;
    for (std::size_t i = 0; i < rep.grid.size(); ++i)
      if (double(rep.grid[i]) > a) d = std::min(d, rep.ratios[i]);
    if (d == kInf)
      throw DomainError("check_cdi_drift: a excludes the entire grid");
    rep.fitted.push_back(d);
  }
  bool mono = true;
  for (std::size_t i = 1; i < rep.fitted.size(); ++i)
    if (rep.fitted[i] + 1e-12 < rep.fitted[i - 1]) mono = false;
  double lift = rep.fitted.back() - rep.fitted.front();
  bool grows =
      rep.fitted.size() < 2 ||
      lift > opt.trend_tol * std::max(1.0, std::fabs(rep.fitted.back()));
  rep.satisfied =
      mono && grows && rep.fitted.back() > opt.divergence_threshold;
  return rep;
}

DriftReport check_stay_infinite(const ModelSpec& spec, const TestFunction& f,
                                std::vector<std::int64_t> grid,
                                std::vector<double> a_list,
                                const CriteriaOptions& opt) {
  if (f.orientation() != Orientation::DecreasingToZero)
    throw DomainError("check_stay_infinite: f must decrease to zero");
  canonicalize(grid, 1, "check_stay_infinite");
  require_sorted_a(a_list, "check_stay_infinite");
  DriftReport rep;
  rep.kind = DriftKind::StayInfiniteBound;
  rep.grid = std::move(grid);
  rep.a_list = std::move(a_list);
  std::vector<double> logn;
  for (std::int64_t n : rep.grid) {
    double g = f(double(n));
    if (!(g > 0.0))
      throw DomainError("check_stay_infinite: f must be positive on the grid");
    double v = gen_apply(spec, f, n, opt.gen).total;
    rep.values.push_back(v);
    rep.ratios.push_back(v / g);
    logn.push_back(std::log(double(n)));
  }
  bool finite = true;
  for (double a : rep.a_list) {
    double d = -kInf;
    for (std::size_t i = 0; i < rep.grid.size(); ++i)
      if (double(rep.grid[i]) > a) d = std::max(d, rep.ratios[i]);
    if (d == -kInf)
      throw DomainError("check_stay_infinite: a excludes the entire grid");
    if (!std::isfinite(d)) finite = false;
    rep.fitted.push_back(d);
  }
  rep.satisfied = finite && trend_bounded(logn, rep.ratios, opt.trend_tol);
  return rep;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Entrance: return "Entrance";
    case Verdict::Exit: return "Exit";
    case Verdict::ComesDown: return "ComesDown";
    case Verdict::StaysInfinite: return "StaysInfinite";
    case Verdict::Explodes: return "Explodes";
    case Verdict::NonExplosive: return "NonExplosive";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::vector<std::int64_t> default_classify_grid() {
  std::vector<std::int64_t> g;
  for (std::int64_t n = 16; n <= (std::int64_t(1) << 19); n *= 2)
    g.push_back(n);
  g.push_back(1000000);
  return g;
}

RegimeVerdict classify_regime(const ModelSpec& spec,
                              std::vector<std::int64_t> n_grid,
                              const ClassifyOptions& opt) {
  if (spec.lambda.family() != LambdaFamily::LogPower)
    throw UnsupportedFamily(
        "classify_regime: coagulation measure must be the log-power family");
  if (spec.mu.family() != MuFamily::LogPower)
    throw UnsupportedFamily(
        "classify_regime: splitting measure must be the log-power family");
  if (spec.truncation)
    throw DomainError(
        "classify_regime: classify the base model, not a truncated one");

  double c = spec.lambda.lp_c();
  double beta = spec.lambda.lp_beta();
  double b = spec.mu.lp_b();
  double alpha = spec.mu.lp_alpha();

  RegimeVerdict out;

  double ex_th = 1.0 + alpha;
  double ex_band = opt.eps_margin * ex_th;
  if (beta > ex_th + ex_band) {
    out.verdict = Verdict::Entrance;
    out.basis = "exponent comparison: coagulation index beta exceeds alpha + 1";
    out.threshold = ex_th;
    out.threshold_margin = beta - ex_th;
    return out;
  }
  if (beta < ex_th - ex_band) {
    out.verdict = Verdict::Exit;
    out.basis = "exponent comparison: coagulation index beta below alpha + 1";
    out.threshold = ex_th;
    out.threshold_margin = beta - ex_th;
    return out;
  }

  double d = c / beta;
  double d_th = b / (1.0 + alpha);
  double d_band = opt.eps_margin * d_th;
  if (d > d_th + d_band) {
    out.verdict = Verdict::Entrance;
    out.basis =
        "critical exponents: coagulation coefficient c/beta exceeds "
        "b/(alpha+1)";
    out.threshold = d_th;
    out.threshold_margin = d - d_th;
    return out;
  }
  if (d < d_th - d_band) {
    out.verdict = Verdict::Exit;
    out.basis =
        "critical exponents: coagulation coefficient c/beta below b/(alpha+1)";
    out.threshold = d_th;
    out.threshold_margin = d - d_th;
    return out;
  }

  // fully critical pair: extrapolate the centered drift ratio
  if (n_grid.empty()) n_grid = default_classify_grid();
  canonicalize(n_grid, 4, "classify_regime");
  if (n_grid.size() < 8)
    throw DomainError(
        "classify_regime: extrapolation needs at least 8 grid points");

  std::vector<double> R, x;
  for (std::int64_t n : n_grid) {
    double ln = std::log(double(n));
    double lln = std::log(ln);
    double s = alpha <= 1.0 ? double(n) * ln * lln * lln
                            : double(n) * std::pow(ln, alpha);
    double num = phi_lambda(spec.lambda, n, SumMethod::Auto, opt.rates) -
                 phi_mu(spec.mu, n);
    R.push_back(num / s);
    x.push_back(lln);
  }
  out.grid = std::move(n_grid);
  out.ratios = R;

  double t_scale = alpha <= 1.0 ? 2.0 * c / beta : kCriticalCoef * b;
  double slope = tail_slope(x, R);
  double sl_tol = opt.trend_tol * tail_scale(R);
  bool div_up = slope > sl_tol && R.back() > opt.divergence_factor * t_scale;
  bool div_dn = slope < -sl_tol && R.back() < -opt.divergence_factor * t_scale;

  // two-term fit R = L + A / loglog n on the upper half of the grid
  double L;
  {
    std::size_t lo = R.size() / 2, len = R.size();
    double m = double(len - lo);
    double su = 0.0, sy = 0.0, suu = 0.0, suy = 0.0;
    for (std::size_t i = lo; i < len; ++i) {
      double u = 1.0 / x[i];
      su += u;
      sy += R[i];
      suu += u * u;
      suy += u * R[i];
    }
    double den = m * suu - su * su;
    L = den > 0.0 ? (sy * suu - su * suy) / den : sy / m;
  }
  out.extrapolated_limit = L;

  if (alpha <= 1.0) {
    double lower = -2.0 * c / beta;
    double band = opt.eps_margin * t_scale;
    if (div_up) {
      out.verdict = Verdict::Entrance;
      out.basis =
          "centered drift ratio diverges to +infinity under "
          "n log n (loglog n)^2 scaling";
      out.threshold = 0.0;
      out.extrapolated_limit = kInf;
      out.threshold_margin = kInf;
    } else if (div_dn) {
      out.verdict = Verdict::Exit;
      out.basis =
          "centered drift ratio diverges to -infinity under "
          "n log n (loglog n)^2 scaling";
      out.threshold = lower;
      out.extrapolated_limit = -kInf;
      out.threshold_margin = -kInf;
    } else if (L > band) {
      out.verdict = Verdict::NonExplosive;
      out.basis = "extrapolated drift ratio positive";
      out.threshold = 0.0;
      out.threshold_margin = L;
    } else if (L < lower - band) {
      out.verdict = Verdict::StaysInfinite;
      out.basis = "extrapolated drift ratio below -2c/beta";
      out.threshold = lower;
      out.threshold_margin = L - lower;
    } else {
      out.verdict = Verdict::Inconclusive;
      out.basis =
          "extrapolated drift ratio within margin of the decision thresholds";
      out.threshold = std::fabs(L) <= std::fabs(L - lower) ? 0.0 : lower;
      out.threshold_margin = L - out.threshold;
    }
  } else {
    double T = kCriticalCoef * b;
    double band = opt.eps_margin * T;
    if (div_up) {
      out.verdict = Verdict::Entrance;
      out.basis =
          "centered drift ratio diverges to +infinity under n (log n)^alpha "
          "scaling";
      out.threshold = T;
      out.extrapolated_limit = kInf;
      out.threshold_margin = kInf;
    } else if (div_dn) {
      out.verdict = Verdict::Exit;
      out.basis =
          "centered drift ratio diverges to -infinity under n (log n)^alpha "
          "scaling";
      out.threshold = T;
      out.extrapolated_limit = -kInf;
      out.threshold_margin = -kInf;
    } else if (L > T + band) {
      out.verdict = Verdict::Entrance;
      out.basis = "extrapolated drift ratio above (2 log 2 - 1/2) b";
      out.threshold = T;
      out.threshold_margin = L - T;
    } else if (L < T - band) {
      out.verdict = Verdict::Exit;
      out.basis = "extrapolated drift ratio below (2 log 2 - 1/2) b";
      out.threshold = T;
      out.threshold_margin = L - T;
    } else {
      out.verdict = Verdict::Inconclusive;
      out.basis =
          "extrapolated drift ratio within margin of (2 log 2 - 1/2) b";
      out.threshold = T;
      out.threshold_margin = L - T;
    }
  }
  return out;
}

}  // namespace efc
