#include "efc/simulate.hpp"

#include <cmath>

#include "efc/errors.hpp"

namespace efc {

SimEngine::SimEngine(const SimConfig& cfg)
    : cfg_(cfg),
      mu_eff_(cfg.spec.effective_mu()),
      mu_total_(mu_eff_.total_mass()),
      coag_(cfg.spec.lambda, 512, cfg.rate_cache) {
  if (cfg_.n0 < 1) throw DomainError("start state must be at least 1");
  if (!(cfg_.t_max > 0.0)) throw DomainError("time budget must be positive");
  if (cfg_.n_ceiling <= cfg_.n0)
    throw DomainError("ceiling must exceed the start state");
  if (cfg_.n_ceiling > (std::int64_t(1) << 62))
    throw DomainError("ceiling too large");
  if (cfg_.a_floor) {
    if (*cfg_.a_floor < 1 || *cfg_.a_floor >= cfg_.n0)
      throw DomainError("floor must satisfy 1 <= a < n0");
  }
  if (mu_total_ > 0.0) frag_.emplace(mu_eff_);
}

double SimEngine::total_rate(std::int64_t n) const {
  return coag_.total_rate(n) + double(n) * mu_total_;
}

JumpEvent SimEngine::step(ChainState& state, Philox& rng) const {
  const double q = total_rate(state.n);
  if (!(q > 0.0)) throw ZeroRate("no jumps available from this state");
  state.t += -std::log(rng.uniform01()) / q;
  JumpEvent ev;
  ev.t = state.t;
  ev.n_before = state.n;
  const double frag_rate = double(state.n) * mu_total_;
  if (rng.uniform01() * q < frag_rate) {
    ev.kind = JumpKind::Frag;
    ev.k = frag_->sample(rng);
    state.n += std::int64_t(ev.k);
  } else {
    ev.kind = JumpKind::Coag;
    const std::int64_t k = coag_.sample(state.n, rng);
    ev.k = std::uint64_t(k);
    state.n -= k - 1;
  }
  ev.n_after = state.n;
  return ev;
}

Trajectory SimEngine::run(std::uint64_t replicate, bool record_events) const {
  Philox rng(cfg_.seed, replicate);
  ChainState s{cfg_.n0, 0.0};
  Trajectory out;
  out.levels.push_back({cfg_.n0, 0.0});
  std::int64_t next_level =
      cfg_.n0 <= cfg_.n_ceiling / 2 ? 2 * cfg_.n0 : 0;  // 0 = done

  for (;;) {
    const double q = total_rate(s.n);
    if (!(q > 0.0)) {
      // absorbing state; sit out the rest of the budget
      out.terminal = TerminalKind::TimeBudget;
      out.tau = cfg_.t_max;
      break;
    }
    const double dt = -std::log(rng.uniform01()) / q;
    if (s.t + dt > cfg_.t_max) {
      out.terminal = TerminalKind::TimeBudget;
      out.tau = cfg_.t_max;
      break;
    }
    s.t += dt;
    JumpEvent ev;
    ev.t = s.t;
    ev.n_before = s.n;
    const double frag_rate = double(s.n) * mu_total_;
    if (rng.uniform01() * q < frag_rate) {
      ev.kind = JumpKind::Frag;
      ev.k = frag_->sample(rng);
      s.n += std::int64_t(ev.k);
    } else {
      ev.kind = JumpKind::Coag;
      const std::int64_t k = coag_.sample(s.n, rng);
      ev.k = std::uint64_t(k);
      s.n -= k - 1;
    }
    ev.n_after = s.n;
    ++out.n_events;
    if (record_events) out.events.push_back(ev);

    while (next_level != 0 && s.n >= next_level) {
      out.levels.push_back({next_level, s.t});
      next_level = next_level <= cfg_.n_ceiling / 2 ? 2 * next_level : 0;
    }
    if (cfg_.a_floor && s.n <= *cfg_.a_floor) {
      out.terminal = TerminalKind::HitFloor;
      out.tau = s.t;
      break;
    }
    if (s.n >= cfg_.n_ceiling) {
      out.terminal = TerminalKind::HitCeiling;
      out.tau = s.t;
      break;
    }
  }
  out.n_final = s.n;
  return out;
}

Trajectory simulate_path(const SimConfig& cfg, std::uint64_t replicate) {
  return SimEngine(cfg).run(replicate);
}

Trajectory simulate_truncated(const SimConfig& cfg, std::uint64_t m,
                              std::uint64_t replicate) {
  SimConfig c = cfg;
  c.spec.truncation = m;
  return SimEngine(c).run(replicate);
}

}  // namespace efc
