#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "efc/simulate.hpp"

// Monte Carlo summaries over replicated chains, and direct numerical checks
// of the asymptotic functionals that drive the drift analysis.

namespace efc {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// 95% score interval; z is pinned so artifacts are reproducible bit for bit
WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t trials);

// nearest-rank quantile (the ceil(q len)-th smallest); +inf entries allowed,
// q in (0, 1]
double quantile_nearest(std::vector<double> values, double q);

struct McSummary {
  std::int64_t n0 = 0;
  std::uint64_t m = 0;  // truncation level; 0 = untruncated
  std::uint64_t replicates = 0;
  TerminalKind target = TerminalKind::HitFloor;
  // quantiles of the target hitting time; replicates that end any other way
  // enter as +inf
  double q10 = 0.0, median = 0.0, q90 = 0.0;
  double frac_floor = 0.0, frac_ceiling = 0.0, frac_budget = 0.0;
  WilsonInterval ci_floor, ci_ceiling, ci_budget;
  // first-crossing profile of the doubling levels n0 2^j: mean time gap
  // between consecutive crossings, averaged over replicates seeing both
  std::vector<std::int64_t> levels;
  std::vector<double> level_dt;
  double gap_ratio = 0.0;  // fitted geometric ratio of successive gaps
  bool explosion_like = false;  // gaps shrink fast and the ceiling was hit
};

// floor-hitting times from each start state in n0_list, with the floor a
// overriding base.a_floor; replicate r of cell i runs on stream i*reps + r
std::vector<McSummary> estimate_hitting_time(
    const SimConfig& base, std::int64_t a,
    const std::vector<std::int64_t>& n0_list, std::uint64_t reps);

// ceiling-hitting behavior of the base config: fractions, level profile,
// and the summability heuristic on the level gaps
McSummary estimate_explosion_proxy(const SimConfig& base, std::uint64_t reps);

// floor-hitting times across the (n0, truncation) grid; cell (i, j) runs
// replicate r on stream (i |m_grid| + j) reps + r
std::vector<McSummary> cdi_stabilization_scan(
    const SimConfig& base, std::int64_t a,
    const std::vector<std::int64_t>& n0_grid,
    const std::vector<std::uint64_t>& m_grid, std::uint64_t reps);

// ---------------------------------------------------------------------------
// asymptotic functional checks
// ---------------------------------------------------------------------------

enum class CheckKind { Limit, Bound };

struct AsymptoticsReport {
  std::string check;
  CheckKind kind = CheckKind::Limit;
  std::vector<std::int64_t> grid;
  std::vector<double> value;  // normalized so the target is O(1)
  double target = 1.0;
  double tol = 0.0;
  bool converged = false;
  std::string detail;
};

// the supported check ids
const std::vector<std::string>& asymptotic_check_ids();

std::vector<std::int64_t> default_check_grid(const std::string& check);

// evaluates one normalized functional along the grid and compares it to its
// predicted limit or bound; tol = 0 picks the check's default. Family
// requirements (log-power side measures, no truncation) are enforced with
// UnsupportedFamily.
AsymptoticsReport verify_asymptotics(const ModelSpec& spec,
                                     const std::string& check,
                                     std::vector<std::int64_t> n_grid = {},
                                     double tol = 0.0);

}  // namespace efc
