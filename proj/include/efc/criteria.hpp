#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "efc/generator.hpp"
#include "efc/measures.hpp"
#include "efc/rates.hpp"
#include "efc/test_functions.hpp"

namespace efc {

enum class DriftKind { NonExplosionBound, CdiDrift, StayInfiniteBound };

// values hold the generator applied to f along the grid and ratios divide by
// f(n), so c_min and the per-a envelopes in fitted stay recomputable from the
// stored arrays
struct DriftReport {
  DriftKind kind = DriftKind::NonExplosionBound;
  std::vector<std::int64_t> grid;
  std::vector<double> values;
  std::vector<double> ratios;
  double c_min = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> a_list;
  std::vector<double> fitted;
  bool satisfied = false;
};

struct CriteriaOptions {
  double trend_tol = 1e-3;
  double divergence_threshold = 1.0;
  GenOptions gen{};
};

DriftReport check_nonexplosion(const ModelSpec& spec, const TestFunction& f,
                               std::vector<std::int64_t> grid,
                               const CriteriaOptions& opt = {});

DriftReport check_cdi_drift(const ModelSpec& spec, const TestFunction& f,
                            std::vector<std::int64_t> grid,
                            std::vector<double> a_list,
                            const CriteriaOptions& opt = {});

DriftReport check_stay_infinite(const ModelSpec& spec, const TestFunction& f,
                                std::vector<std::int64_t> grid,
                                std::vector<double> a_list,
                                const CriteriaOptions& opt = {});

enum class Verdict {
  Entrance,
  Exit,
  ComesDown,
  StaysInfinite,
  Explodes,
  NonExplosive,
  Inconclusive
};

std::string to_string(Verdict v);

struct RegimeVerdict {
  Verdict verdict = Verdict::Inconclusive;
  std::string basis;
  double threshold = std::numeric_limits<double>::quiet_NaN();
  double extrapolated_limit = std::numeric_limits<double>::quiet_NaN();
  double threshold_margin = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::int64_t> grid;
  std::vector<double> ratios;
};

struct ClassifyOptions {
  double eps_margin = 0.1;
  double trend_tol = 1e-3;
  double divergence_factor = 10.0;
  RateOptions rates{};
};

std::vector<std::int64_t> default_classify_grid();

// decision tree: exponent comparison, then coefficient comparison on the
// critical line, then extrapolation of the centered drift ratio; hard
// verdicts only outside the eps_margin band of every threshold
RegimeVerdict classify_regime(const ModelSpec& spec,
                              std::vector<std::int64_t> n_grid = {},
                              const ClassifyOptions& opt = {});

}  // namespace efc
