#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "efc/measures.hpp"

// Run configuration: one JSON document drives every subcommand. Parsing is
// strict: unknown keys are rejected with their dotted path, family parameter
// blocks are validated against the named family, and the defaults document
// round-trips byte for byte through parse + dump.

namespace efc {

class TestFunction;

struct OutputConfig {
  std::string format = "csv";  // csv | json
  std::string path;            // empty writes to stdout
};

struct GridBlock {
  std::vector<std::int64_t> n = {4, 16, 64, 256, 1024, 4096};
};

struct SimBlock {
  std::int64_t n0 = 1000;
  double t_max = 10.0;
  std::int64_t ceiling = 1'000'000;
  std::int64_t floor = 0;  // 0 = no absorbing floor
  std::int64_t rate_cache = 256;
};

struct McBlock {
  std::uint64_t reps = 200;
  std::vector<std::int64_t> n0 = {1000};
  std::vector<std::uint64_t> m = {0};  // 0 = untruncated
  std::int64_t floor = 8;
  std::string target = "floor";  // floor | ceiling
};

struct ClassifyBlock {
  double eps_margin = 0.1;
  double trend_tol = 1e-3;
  double divergence_factor = 10.0;
};

struct LyapunovBlock {
  std::string fn = "one_plus_inv_loglog";
  double shift = 10.0;
  int depth = 1;  // iterated_log only
};

struct VerifyBlock {
  std::string check = "split-tail-log";
  double tol = 0.0;  // 0 = the check's pinned default
};

struct RunConfig {
  CoagulationMeasure lambda = CoagulationMeasure::log_power(1.0, 3.0);
  SplittingMeasure mu = SplittingMeasure::log_power(1.0, 1.0);
  std::uint64_t truncation = 0;  // 0 = untruncated
  std::uint64_t seed = 1;
  OutputConfig output;
  GridBlock grid;
  SimBlock sim;
  McBlock mc;
  ClassifyBlock classify;
  LyapunovBlock lyapunov;
  VerifyBlock verify;

  ModelSpec model() const {
    return {lambda, mu,
            truncation ? std::optional<std::uint64_t>(truncation)
                       : std::nullopt};
  }
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string dump_config(const RunConfig& cfg);
std::string print_defaults();

// resolves the named test function; unknown names throw ConfigError
TestFunction lyapunov_fn(const LyapunovBlock& ly);

// artifact number formatting: 17 significant digits so reruns diff clean
std::string fmt17(double v);

}  // namespace efc
