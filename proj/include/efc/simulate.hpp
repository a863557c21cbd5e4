#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "efc/measures.hpp"
#include "efc/rng.hpp"
#include "efc/samplers.hpp"

// Exact stochastic simulation of the block-counting chain: holding times are
// Exp(Q(n)), the side is chosen by rate share, sizes come from the exact
// samplers. Replicates get independent counter-based streams keyed by
// (seed, replicate), so results do not depend on scheduling.

namespace efc {

enum class JumpKind { Coag, Frag };

struct JumpEvent {
  double t = 0.0;  // time of the jump
  JumpKind kind = JumpKind::Coag;
  std::uint64_t k = 0;  // merged blocks (>= 2) or added fragments (>= 1)
  std::int64_t n_before = 0;
  std::int64_t n_after = 0;
};

enum class TerminalKind { TimeBudget, HitFloor, HitCeiling };

struct LevelCrossing {
  std::int64_t level = 0;
  double t_first = 0.0;
};

struct Trajectory {
  std::vector<JumpEvent> events;  // empty when recording is off
  TerminalKind terminal = TerminalKind::TimeBudget;
  double tau = 0.0;  // t_max, or the floor/ceiling hitting time
  std::int64_t n_final = 0;
  std::uint64_t n_events = 0;
  // first entrance times into [n0 2^j, inf) for n0 2^j <= n_ceiling,
  // ascending; the start state counts as crossing level n0 at t = 0
  std::vector<LevelCrossing> levels;
};

struct SimConfig {
  explicit SimConfig(ModelSpec s) : spec(std::move(s)) {}
  ModelSpec spec;
  std::int64_t n0 = 1000;
  double t_max = 10.0;
  std::int64_t n_ceiling = 1'000'000;
  std::optional<std::int64_t> a_floor;  // absorb at n <= a_floor when set
  std::uint64_t seed = 1;
  std::size_t rate_cache = 256;
};

struct ChainState {
  std::int64_t n = 0;
  double t = 0.0;
};

// Samplers and rate caches for one model; build once, run any number of
// replicates, concurrently if desired.
class SimEngine {
 public:
  explicit SimEngine(const SimConfig& cfg);

  const SimConfig& config() const { return cfg_; }
  double frag_total() const { return mu_total_; }
  double total_rate(std::int64_t n) const;  // Q(n)

  // one jump: draw the Exp(Q) holding time, advance t, pick the side by
  // rate share, apply the size. ZeroRate when Q(n) = 0 (absorbing state).
  JumpEvent step(ChainState& state, Philox& rng) const;

  Trajectory run(std::uint64_t replicate, bool record_events = true) const;

 private:
  SimConfig cfg_;
  SplittingMeasure mu_eff_;
  double mu_total_ = 0.0;
  CoagSampler coag_;
  std::optional<FragSampler> frag_;
};

Trajectory simulate_path(const SimConfig& cfg, std::uint64_t replicate = 0);

// same chain with the splitting measure truncated at m
Trajectory simulate_truncated(const SimConfig& cfg, std::uint64_t m,
                              std::uint64_t replicate = 0);

}  // namespace efc
