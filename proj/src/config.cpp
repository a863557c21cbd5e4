#include "efc/config.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "efc/errors.hpp"
#include "efc/experiments.hpp"
#include "efc/test_functions.hpp"
#include "json.hpp"

namespace efc {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& key, const std::string& reason) {
  throw ConfigError(key, reason);
}

std::string join(const std::string& path, const char* k) {
  return path.empty() ? std::string(k) : path + "." + k;
}

const json& need_object(const json& j, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  return j;
}

void check_keys(const json& o, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : o.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) bad(join(path, item.key().c_str()), "unknown key");
  }
}

double get_num(const json& o, const std::string& path, const char* k,
               double dflt) {
  auto it = o.find(k);
  if (it == o.end()) return dflt;
  if (!it->is_number()) bad(join(path, k), "expected a number");
  return it->get<double>();
}

double get_pos(const json& o, const std::string& path, const char* k,
               double dflt) {
  const double v = get_num(o, path, k, dflt);
  if (!(v > 0.0)) bad(join(path, k), "must be > 0");
  return v;
}

std::int64_t get_int(const json& o, const std::string& path, const char* k,
                     std::int64_t dflt) {
  auto it = o.find(k);
  if (it == o.end()) return dflt;
  if (!it->is_number_integer() && !it->is_number_unsigned())
    bad(join(path, k), "expected an integer");
  return it->get<std::int64_t>();
}

std::uint64_t get_uint(const json& o, const std::string& path, const char* k,
                       std::uint64_t dflt) {
  auto it = o.find(k);
  if (it == o.end()) return dflt;
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer() && it->get<std::int64_t>() >= 0)
    return std::uint64_t(it->get<std::int64_t>());
  bad(join(path, k), "expected an unsigned integer");
}

std::string get_str(const json& o, const std::string& path, const char* k,
                    const std::string& dflt) {
  auto it = o.find(k);
  if (it == o.end()) return dflt;
  if (!it->is_string()) bad(join(path, k), "expected a string");
  return it->get<std::string>();
}

std::vector<double> get_num_array(const json& o, const std::string& path,
                                  const char* k) {
  auto it = o.find(k);
  if (it == o.end()) bad(join(path, k), "required for this family");
  if (!it->is_array()) bad(join(path, k), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : *it) {
    if (!e.is_number()) bad(join(path, k), "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::int64_t> get_int_array(const json& o, const std::string& path,
                                        const char* k,
                                        std::vector<std::int64_t> dflt) {
  auto it = o.find(k);
  if (it == o.end()) return dflt;
  if (!it->is_array()) bad(join(path, k), "expected an array of integers");
  std::vector<std::int64_t> out;
  for (const auto& e : *it) {
    if (!e.is_number_integer() && !e.is_number_unsigned())
      bad(join(path, k), "expected an array of integers");
    out.push_back(e.get<std::int64_t>());
  }
  if (out.empty()) bad(join(path, k), "must not be empty");
  return out;
}

std::vector<std::uint64_t> get_uint_array(const json& o,
                                          const std::string& path,
                                          const char* k,
                                          std::vector<std::uint64_t> dflt) {
  auto it = o.find(k);
  if (it == o.end()) return dflt;
  if (!it->is_array()) bad(join(path, k), "expected an array of integers");
  std::vector<std::uint64_t> out;
  for (const auto& e : *it) {
    if (e.is_number_unsigned())
      out.push_back(e.get<std::uint64_t>());
    else if (e.is_number_integer() && e.get<std::int64_t>() >= 0)
      out.push_back(std::uint64_t(e.get<std::int64_t>()));
    else
      bad(join(path, k), "expected an array of unsigned integers");
  }
  if (out.empty()) bad(join(path, k), "must not be empty");
  return out;
}

CoagulationMeasure parse_lambda(const json& o) {
  const std::string path = "lambda";
  const std::string family = get_str(o, path, "family", "logpower");
  try {
    if (family == "uniform") {
      check_keys(o, path, {"family", "scale"});
      return CoagulationMeasure::uniform(get_pos(o, path, "scale", 1.0));
    }
    if (family == "logpower") {
      check_keys(o, path, {"family", "c", "beta"});
      const double c = get_pos(o, path, "c", 1.0);
      const double beta = get_num(o, path, "beta", 3.0);
      if (!(beta > 1.0)) bad(join(path, "beta"), "the merge family needs beta > 1");
      return CoagulationMeasure::log_power(c, beta);
    }
    if (family == "beta") {
      check_keys(o, path, {"family", "a", "b", "scale"});
      return CoagulationMeasure::beta_density(get_pos(o, path, "a", 2.0),
                                              get_pos(o, path, "b", 2.0),
                                              get_pos(o, path, "scale", 1.0));
    }
    if (family == "tabulated") {
      check_keys(o, path, {"family", "grid", "values"});
      return CoagulationMeasure::tabulated(get_num_array(o, path, "grid"),
                                           get_num_array(o, path, "values"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    bad(path, e.what());
  }
  bad(join(path, "family"),
      "expected one of: uniform, logpower, beta, tabulated");
}

SplittingMeasure parse_mu(const json& o, std::uint64_t& truncation) {
  const std::string path = "mu";
  const std::string family = get_str(o, path, "family", "logpower");
  truncation = get_uint(o, path, "truncation", 0);
  try {
    if (family == "logpower") {
      check_keys(o, path, {"family", "b", "alpha", "mu1", "truncation"});
      const double mu1 = get_num(o, path, "mu1", 0.0);
      if (mu1 < 0.0) bad(join(path, "mu1"), "must be >= 0");
      return SplittingMeasure::log_power(get_pos(o, path, "b", 1.0),
                                         get_pos(o, path, "alpha", 1.0), mu1);
    }
    if (family == "tabulated") {
      check_keys(o, path,
                 {"family", "masses", "tail_b", "tail_alpha", "truncation"});
      const auto masses = get_num_array(o, path, "masses");
      const bool has_b = o.contains("tail_b");
      const bool has_a = o.contains("tail_alpha");
      if (has_b != has_a)
        bad(join(path, has_b ? "tail_alpha" : "tail_b"),
            "tail_b and tail_alpha come together");
      std::optional<PowerLogTail> tail;
      if (has_b)
        tail = PowerLogTail{get_pos(o, path, "tail_b", 1.0),
                            get_pos(o, path, "tail_alpha", 1.0)};
      return SplittingMeasure::tabulated(masses, tail);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    bad(path, e.what());
  }
  bad(join(path, "family"), "expected one of: logpower, tabulated");
}

json lambda_json(const CoagulationMeasure& lam) {
  json o;
  switch (lam.family()) {
    case LambdaFamily::Uniform:
      o["family"] = "uniform";
      o["scale"] = lam.uniform_scale();
      break;
    case LambdaFamily::LogPower:
      o["family"] = "logpower";
      o["c"] = lam.lp_c();
      o["beta"] = lam.lp_beta();
      break;
    case LambdaFamily::BetaDensity:
      o["family"] = "beta";
      o["a"] = lam.beta_a();
      o["b"] = lam.beta_b();
      o["scale"] = lam.beta_scale();
      break;
    case LambdaFamily::Tabulated:
      o["family"] = "tabulated";
      o["grid"] = lam.tab_grid();
      o["values"] = lam.tab_values();
      break;
  }
  return o;
}

json mu_json(const SplittingMeasure& mu, std::uint64_t truncation) {
  json o;
  if (mu.family() == MuFamily::LogPower) {
    o["family"] = "logpower";
    o["b"] = mu.cont_b();
    o["alpha"] = mu.cont_alpha();
    o["mu1"] = mu.mass(1);
  } else {
    o["family"] = "tabulated";
    std::vector<double> masses;
    for (std::uint64_t k = 1; k <= mu.table_size(); ++k)
      masses.push_back(mu.mass(k));
    o["masses"] = masses;
    if (mu.has_continuation()) {
      o["tail_b"] = mu.cont_b();
      o["tail_alpha"] = mu.cont_alpha();
    }
  }
  o["truncation"] = truncation;
  return o;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    bad("document", e.what());
  }
  need_object(doc, "document");
  check_keys(doc, "", {"schema", "lambda", "mu", "seed", "output", "grid",
                       "sim", "mc", "classify", "lyapunov", "verify"});
  if (doc.contains("schema") && get_int(doc, "", "schema", 1) != 1)
    bad("schema", "this build reads schema 1");

  RunConfig cfg;
  if (doc.contains("lambda"))
    cfg.lambda = parse_lambda(need_object(doc["lambda"], "lambda"));
  if (doc.contains("mu"))
    cfg.mu = parse_mu(need_object(doc["mu"], "mu"), cfg.truncation);
  cfg.seed = get_uint(doc, "", "seed", 1);

  if (doc.contains("output")) {
    const auto& o = need_object(doc["output"], "output");
    check_keys(o, "output", {"format", "path"});
    cfg.output.format = get_str(o, "output", "format", "csv");
    if (cfg.output.format != "csv" && cfg.output.format != "json")
      bad("output.format", "expected csv or json");
    cfg.output.path = get_str(o, "output", "path", "");
  }
  if (doc.contains("grid")) {
    const auto& o = need_object(doc["grid"], "grid");
    check_keys(o, "grid", {"n"});
    cfg.grid.n = get_int_array(o, "grid", "n", cfg.grid.n);
    for (const auto n : cfg.grid.n)
      if (n < 1) bad("grid.n", "entries must be >= 1");
  }
  if (doc.contains("sim")) {
    const auto& o = need_object(doc["sim"], "sim");
    check_keys(o, "sim", {"n0", "t_max", "ceiling", "floor", "rate_cache"});
    cfg.sim.n0 = get_int(o, "sim", "n0", cfg.sim.n0);
    if (cfg.sim.n0 < 1) bad("sim.n0", "must be >= 1");
    cfg.sim.t_max = get_pos(o, "sim", "t_max", cfg.sim.t_max);
    cfg.sim.ceiling = get_int(o, "sim", "ceiling", cfg.sim.ceiling);
    if (cfg.sim.ceiling < 2) bad("sim.ceiling", "must be >= 2");
    cfg.sim.floor = get_int(o, "sim", "floor", cfg.sim.floor);
    if (cfg.sim.floor < 0) bad("sim.floor", "must be >= 0");
    cfg.sim.rate_cache = get_int(o, "sim", "rate_cache", cfg.sim.rate_cache);
    if (cfg.sim.rate_cache < 1) bad("sim.rate_cache", "must be >= 1");
  }
  if (doc.contains("mc")) {
    const auto& o = need_object(doc["mc"], "mc");
    check_keys(o, "mc", {"reps", "n0", "m", "floor", "target"});
    cfg.mc.reps = get_uint(o, "mc", "reps", cfg.mc.reps);
    if (cfg.mc.reps < 1) bad("mc.reps", "must be >= 1");
    cfg.mc.n0 = get_int_array(o, "mc", "n0", cfg.mc.n0);
    for (const auto n : cfg.mc.n0)
      if (n < 1) bad("mc.n0", "entries must be >= 1");
    cfg.mc.m = get_uint_array(o, "mc", "m", cfg.mc.m);
    cfg.mc.floor = get_int(o, "mc", "floor", cfg.mc.floor);
    if (cfg.mc.floor < 1) bad("mc.floor", "must be >= 1");
    cfg.mc.target = get_str(o, "mc", "target", cfg.mc.target);
    if (cfg.mc.target != "floor" && cfg.mc.target != "ceiling")
      bad("mc.target", "expected floor or ceiling");
  }
  if (doc.contains("classify")) {
    const auto& o = need_object(doc["classify"], "classify");
    check_keys(o, "classify", {"eps_margin", "trend_tol", "divergence_factor"});
    cfg.classify.eps_margin =
        get_num(o, "classify", "eps_margin", cfg.classify.eps_margin);
    if (cfg.classify.eps_margin < 0.0) bad("classify.eps_margin", "must be >= 0");
    cfg.classify.trend_tol =
        get_num(o, "classify", "trend_tol", cfg.classify.trend_tol);
    if (cfg.classify.trend_tol < 0.0) bad("classify.trend_tol", "must be >= 0");
    cfg.classify.divergence_factor = get_pos(o, "classify", "divergence_factor",
                                             cfg.classify.divergence_factor);
  }
  if (doc.contains("lyapunov")) {
    const auto& o = need_object(doc["lyapunov"], "lyapunov");
    check_keys(o, "lyapunov", {"fn", "shift", "depth"});
    cfg.lyapunov.fn = get_str(o, "lyapunov", "fn", cfg.lyapunov.fn);
    cfg.lyapunov.shift = get_num(o, "lyapunov", "shift", cfg.lyapunov.shift);
    cfg.lyapunov.depth =
        int(get_int(o, "lyapunov", "depth", cfg.lyapunov.depth));
    if (cfg.lyapunov.depth < 0) bad("lyapunov.depth", "must be >= 0");
  }
  if (doc.contains("verify")) {
    const auto& o = need_object(doc["verify"], "verify");
    check_keys(o, "verify", {"check", "tol"});
    cfg.verify.check = get_str(o, "verify", "check", cfg.verify.check);
    cfg.verify.tol = get_num(o, "verify", "tol", cfg.verify.tol);
    if (cfg.verify.tol < 0.0) bad("verify.tol", "must be >= 0");
  }

  // construct the test function once so bad names or shifts fail at parse
  // time with the offending key
  try {
    lyapunov_fn(cfg.lyapunov);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    bad("lyapunov", e.what());
  }
  bool known_check = false;
  for (const auto& id : asymptotic_check_ids())
    known_check = known_check || id == cfg.verify.check;
  if (!known_check) bad("verify.check", "no such check");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad(path, "cannot read file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

TestFunction lyapunov_fn(const LyapunovBlock& ly) {
  if (ly.fn == "iterated_log")
    return TestFunction::iterated_log(ly.depth, ly.shift);
  if (ly.fn == "one_plus_inv_loglog")
    return TestFunction::one_plus_inv_loglog(ly.shift);
  if (ly.fn == "inv_loglog") return TestFunction::inv_loglog(ly.shift);
  if (ly.fn == "one_minus_inv_loglog")
    return TestFunction::one_minus_inv_loglog(ly.shift);
  if (ly.fn == "plain_log") return TestFunction::plain_log();
  if (ly.fn == "constant") return TestFunction::constant(ly.shift);
  bad("lyapunov.fn",
      "expected one of: iterated_log, one_plus_inv_loglog, inv_loglog, "
      "one_minus_inv_loglog, plain_log, constant");
}

std::string dump_config(const RunConfig& cfg) {
  json doc;
  doc["schema"] = 1;
  doc["lambda"] = lambda_json(cfg.lambda);
  doc["mu"] = mu_json(cfg.mu, cfg.truncation);
  doc["seed"] = cfg.seed;
  doc["output"] = {{"format", cfg.output.format}, {"path", cfg.output.path}};
  doc["grid"] = {{"n", cfg.grid.n}};
  doc["sim"] = {{"n0", cfg.sim.n0},
                {"t_max", cfg.sim.t_max},
                {"ceiling", cfg.sim.ceiling},
                {"floor", cfg.sim.floor},
                {"rate_cache", cfg.sim.rate_cache}};
  doc["mc"] = {{"reps", cfg.mc.reps},
               {"n0", cfg.mc.n0},
               {"m", cfg.mc.m},
               {"floor", cfg.mc.floor},
               {"target", cfg.mc.target}};
  doc["classify"] = {{"eps_margin", cfg.classify.eps_margin},
                     {"trend_tol", cfg.classify.trend_tol},
                     {"divergence_factor", cfg.classify.divergence_factor}};
  doc["lyapunov"] = {{"fn", cfg.lyapunov.fn},
                     {"shift", cfg.lyapunov.shift},
                     {"depth", cfg.lyapunov.depth}};
  doc["verify"] = {{"check", cfg.verify.check}, {"tol", cfg.verify.tol}};
  return doc.dump(2) + "\n";
}

std::string print_defaults() { return dump_config(RunConfig{}); }

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace efc
