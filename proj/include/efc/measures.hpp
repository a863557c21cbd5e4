#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace efc {

// ---------------------------------------------------------------------------
// Coagulation side: a finite, absolutely continuous measure on [0, 1).
// ---------------------------------------------------------------------------

enum class LambdaFamily { Uniform, LogPower, BetaDensity, Tabulated };

class CoagulationMeasure {
 public:
  // density = scale on (0, 1)
  static CoagulationMeasure uniform(double scale);
  // density = c * (log 1/x)^(beta-1); requires beta > 1
  static CoagulationMeasure log_power(double c, double beta);
  // density = scale * x^(a-1) (1-x)^(b-1) / B(a, b)
  static CoagulationMeasure beta_density(double a, double b, double scale);
  // piecewise-linear density through (grid, values), zero outside the hull
  static CoagulationMeasure tabulated(std::vector<double> grid,
                                      std::vector<double> values);

  LambdaFamily family() const { return family_; }
  double total_mass() const { return mass_; }

  double density(double x) const;         // x in (0, 1)
  double density_at_exp(double t) const;  // density at x = exp(-t), t > 0

  // support hull: (0, 1) except for Tabulated, whose density vanishes
  // outside its grid
  double support_lo() const;
  double support_hi() const;

  // family parameters; DomainError when asked of the wrong family
  double uniform_scale() const;
  double lp_c() const;
  double lp_beta() const;
  double beta_a() const;
  double beta_b() const;
  double beta_scale() const;
  const std::vector<double>& tab_grid() const;
  const std::vector<double>& tab_values() const;

  // content hash, used as a cache key
  std::uint64_t key() const { return key_; }

 private:
  CoagulationMeasure() = default;
  LambdaFamily family_ = LambdaFamily::Uniform;
  double p0_ = 0.0, p1_ = 0.0, p2_ = 0.0;
  double mass_ = 0.0;
  double log_beta_fn_ = 0.0;  // log B(a, b), BetaDensity only
  std::vector<double> grid_, values_;
  std::uint64_t key_ = 0;
};

// ---------------------------------------------------------------------------
// Fragmentation side: a finite measure on {1, 2, 3, ...}.
// ---------------------------------------------------------------------------

enum class MuFamily { LogPower, Tabulated };

struct PowerLogTail {
  double b;
  double alpha;
};

class SplittingMeasure {
 public:
  // mass(k) = b (log k)^alpha / k^2 for k >= 2, plus an optional atom at 1
  static SplittingMeasure log_power(double b, double alpha, double mu1 = 0.0);
  // explicit masses on 1..K, optionally continued by a PowerLogTail beyond K
  static SplittingMeasure tabulated(std::vector<double> masses,
                                    std::optional<PowerLogTail> tail = {});

  MuFamily family() const { return family_; }
  double mass(std::uint64_t k) const;  // k >= 1

  // total mass with a certified absolute error (partial sum + closed-form
  // integral remainder; the remainder's Euler-Maclaurin defect is folded
  // into the error term)
  double total_mass() const;
  double total_mass_error() const;

  double tail_mass(std::uint64_t k) const;             // sum over {k+1, ...}
  double partial_first_moment(std::uint64_t n) const;  // sum_{k<=n} k mass(k)

  bool finite_support() const;
  std::uint64_t table_size() const { return masses_.size(); }

  // Smooth continuation b (log x)^alpha / x^2 used by tail integrals, with
  // monotone majorants of its first two derivatives. Zero for finite support.
  bool has_continuation() const;
  double continuation_from() const;  // valid for x >= this
  double density_cont(double x) const;
  double density_cont_d1_bound(double x) const;
  double density_cont_d2_bound(double x) const;
  double cont_b() const;      // continuation parameters for tail remainders
  double cont_alpha() const;

  double lp_b() const;
  double lp_alpha() const;
  double lp_mu1() const;
  const std::vector<double>& tab_masses() const { return masses_; }
  std::optional<PowerLogTail> tab_tail() const { return tail_; }

  std::uint64_t key() const { return key_; }

 private:
  SplittingMeasure() = default;
  void ensure_total() const;

  MuFamily family_ = MuFamily::LogPower;
  double b_ = 0.0, alpha_ = 0.0, mu1_ = 0.0;
  std::vector<double> masses_;  // Tabulated: index k-1
  std::optional<PowerLogTail> tail_;
  mutable double total_ = -1.0, total_err_ = 0.0;
  std::uint64_t key_ = 0;
};

// Truncation at level m: masses of 1..m-1 kept, everything from m up collapsed
// onto the single atom m. Total mass is conserved.
SplittingMeasure mu_truncate(const SplittingMeasure& mu, std::uint64_t m);

// The pair defining one block-counting chain, with an optional fragmentation
// truncation level (the effective splitting measure is then mu_truncate).
struct ModelSpec {
  CoagulationMeasure lambda;
  SplittingMeasure mu;
  std::optional<std::uint64_t> truncation;

  SplittingMeasure effective_mu() const {
    return truncation ? mu_truncate(mu, *truncation) : mu;
  }
};

}  // namespace efc
