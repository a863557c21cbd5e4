#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "efc/measures.hpp"
#include "efc/rates.hpp"
#include "efc/rng.hpp"

// Jump-size samplers for the block-counting chain. Both are exact: every
// rejection step uses the true mass (or rate) in the acceptance test, so the
// output law is the target one up to double rounding, never an envelope
// approximation.

namespace efc {

// K ~ Bin(n, x) conditioned on K >= 2, by inversion. Small n*x walks up from
// k = 2; large n*x enumerates outward from the mode so the expected step
// count stays O(sqrt(n x (1-x))).
std::int64_t sample_binom_ge2(std::int64_t n, double x, Philox& rng);

// Fragment-count sampler: Walker alias table over 1..head_size(), and beyond
// that rejection against the measure's power-log continuation. Immutable
// after construction, safe to share across threads.
class FragSampler {
 public:
  explicit FragSampler(const SplittingMeasure& mu,
                       std::uint64_t head = 1ull << 16);

  // one fragment count k >= 1; DomainError when the measure has no mass
  std::uint64_t sample(Philox& rng) const;

  std::uint64_t head_size() const { return K_; }
  double tail_prob() const { return p_tail_; }

 private:
  SplittingMeasure mu_;
  std::uint64_t K_ = 0;
  double p_tail_ = 0.0;
  // tail rejection constants: proposal x = (K+1) e^y with y ~ Exp(r_)
  double L_ = 0.0;     // log(K + 1)
  double A_ = 0.0;     // continuation exponent
  double B_ = 0.0;     // continuation coefficient
  double r_ = 0.0;
  double infl_ = 1.0;  // (1 + 1/K)^2, lifts the continuation over the cells
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

struct CoagAcceptStats {
  std::uint64_t proposals = 0;
  std::uint64_t accepts = 0;
};

// Merge-size sampler at varying n. At or below table_limit it inverts the
// per-k rate table (cached). Above, it draws the merge fraction x from
// f(x) x^-2 P(Bin(n,x) >= 2) by rejection against a piecewise envelope and
// then the merge size from the conditioned binomial; the envelope exists for
// the Uniform and LogPower coagulation families only (EnvelopeUnavailable
// otherwise). Envelopes are built per power-of-two bucket n_b >= n with cap
// M = n_b (n_b - 1) / 2 >= C(n, 2), so domination holds for every n in the
// bucket.
class CoagSampler {
 public:
  explicit CoagSampler(const CoagulationMeasure& lam,
                       std::int64_t table_limit = 512,
                       std::size_t cache_capacity = 256);

  // total merge rate at n (zero below 2); table value below the limit,
  // memoized integral above it. Thread-safe.
  double total_rate(std::int64_t n) const;

  // one merge size in [2, n]; requires n >= 2. stats, when given, counts
  // envelope proposals and acceptances (table draws count as accepted
  // proposals); keep one stats object per thread.
  std::int64_t sample(std::int64_t n, Philox& rng,
                      CoagAcceptStats* stats = nullptr) const;

  bool rejection_path(std::int64_t n) const { return n > table_limit_; }
  std::int64_t table_limit() const { return table_limit_; }

 private:
  struct Envelope;
  std::shared_ptr<const Envelope> envelope_for(std::int64_t n) const;
  std::int64_t sample_rejection(std::int64_t n, Philox& rng,
                                CoagAcceptStats* stats) const;

  CoagulationMeasure lam_;
  std::int64_t table_limit_;
  mutable RateTableCache tables_;
  mutable std::mutex lock_;
  mutable std::unordered_map<std::int64_t, double> totals_;
  mutable std::unordered_map<std::int64_t, std::shared_ptr<const Envelope>>
      envelopes_;
};

}  // namespace efc
