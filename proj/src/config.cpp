#include "vwlab/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "vwlab/field_io.hpp"
#include "vwlab/oracle.hpp"

namespace vw {

namespace {

using nlohmann::json;

constexpr std::uint64_t kTauStream = 1;
constexpr std::uint64_t kInitStream = 2;

void require_object(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void take(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

StepRule parse_step_rule(const std::string& s) {
  if (s == "fixed") return StepRule::fixed;
  if (s == "adaptive-two-point") return StepRule::adaptive_two_point;
  if (s == "gauss-newton") return StepRule::gauss_newton;
  throw ConfigError("solver.step_rule: unknown rule '" + s + "'");
}

const char* step_rule_name(StepRule r) {
  switch (r) {
    case StepRule::fixed: return "fixed";
    case StepRule::adaptive_two_point: return "adaptive-two-point";
    case StepRule::gauss_newton: return "gauss-newton";
  }
  return "unknown";
}

ProbeMethod parse_method(const std::string& s) {
  if (s == "auto") return ProbeMethod::automatic;
  if (s == "dense") return ProbeMethod::dense;
  if (s == "iterative") return ProbeMethod::iterative;
  throw ConfigError("probe.method: unknown method '" + s + "'");
}

const char* method_name(ProbeMethod m) {
  switch (m) {
    case ProbeMethod::automatic: return "auto";
    case ProbeMethod::dense: return "dense";
    case ProbeMethod::iterative: return "iterative";
  }
  return "unknown";
}

}  // namespace

void RunConfig::validate() const {
  make_grid();
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (tau.kind == TauSpec::Kind::random && !(tau.amplitude >= 0.0)) throw ConfigError("tau.amplitude must be >= 0");
  if (init.kind == InitSpec::Kind::random && !(init.amplitude >= 0.0))
    throw ConfigError("init.amplitude must be >= 0");
  if (init.kind == InitSpec::Kind::file && init.path.empty()) throw ConfigError("init.path is required for kind 'file'");
  if (probe.k < 1) throw ConfigError("probe.k must be at least 1");
  if (!(probe.rel_tol > 0.0)) throw ConfigError("probe.rel_tol must be positive");
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
}

Grid RunConfig::make_grid() const {
  try {
    return Grid(grid, h);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  require_object(j, "config", {"grid", "h", "seed", "trials", "tau", "init", "solver", "probe", "output"});
  RunConfig c;
  take(j, "grid", c.grid, "config");
  take(j, "h", c.h, "config");
  take(j, "seed", c.seed, "config");
  take(j, "trials", c.trials, "config");

  if (j.contains("tau")) {
    const json& t = j["tau"];
    require_object(t, "tau", {"kind", "scale", "amplitude", "seed"});
    std::string kind = "zero";
    take(t, "kind", kind, "tau");
    if (kind == "zero") c.tau.kind = TauSpec::Kind::zero;
    else if (kind == "identity") c.tau.kind = TauSpec::Kind::identity;
    else if (kind == "random") c.tau.kind = TauSpec::Kind::random;
    else throw ConfigError("tau.kind: unknown kind '" + kind + "'");
    take(t, "scale", c.tau.scale, "tau");
    take(t, "amplitude", c.tau.amplitude, "tau");
    c.tau.seed_given = t.contains("seed");
    take(t, "seed", c.tau.seed, "tau");
  }
  if (j.contains("init")) {
    const json& t = j["init"];
    require_object(t, "init", {"kind", "amplitude", "seed", "path"});
    std::string kind = "zero";
    take(t, "kind", kind, "init");
    if (kind == "zero") c.init.kind = InitSpec::Kind::zero;
    else if (kind == "random") c.init.kind = InitSpec::Kind::random;
    else if (kind == "file") c.init.kind = InitSpec::Kind::file;
    else throw ConfigError("init.kind: unknown kind '" + kind + "'");
    take(t, "amplitude", c.init.amplitude, "init");
    c.init.seed_given = t.contains("seed");
    take(t, "seed", c.init.seed, "init");
    take(t, "path", c.init.path, "init");
  }
  if (j.contains("solver")) {
    const json& t = j["solver"];
    require_object(t, "solver",
                   {"max_iters", "grad_tol", "residual_tol", "step_rule", "fixed_step", "damping", "cg_iters"});
    take(t, "max_iters", c.solver.max_iters, "solver");
    take(t, "grad_tol", c.solver.grad_tol, "solver");
    take(t, "residual_tol", c.solver.residual_tol, "solver");
    take(t, "fixed_step", c.solver.fixed_step, "solver");
    take(t, "damping", c.solver.damping, "solver");
    take(t, "cg_iters", c.solver.cg_iters, "solver");
    if (t.contains("step_rule")) {
      std::string rule;
      take(t, "step_rule", rule, "solver");
      c.solver.step_rule = parse_step_rule(rule);
    }
  }
  if (j.contains("probe")) {
    const json& t = j["probe"];
    require_object(t, "probe", {"k", "rel_tol", "method"});
    take(t, "k", c.probe.k, "probe");
    take(t, "rel_tol", c.probe.rel_tol, "probe");
    if (t.contains("method")) {
      std::string m;
      take(t, "method", m, "probe");
      c.probe.method = parse_method(m);
    }
  }
  if (j.contains("output")) {
    const json& t = j["output"];
    require_object(t, "output", {"config", "history", "report"});
    take(t, "config", c.output.config, "output");
    take(t, "history", c.output.history, "output");
    take(t, "report", c.output.report, "output");
  }
  c.solver.seed = c.seed;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_json(const RunConfig& c) {
  json j;
  j["grid"] = c.grid;
  j["h"] = c.h;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  const char* tau_kinds[] = {"zero", "identity", "random"};
  j["tau"] = {{"kind", tau_kinds[static_cast<int>(c.tau.kind)]}, {"scale", c.tau.scale}, {"amplitude", c.tau.amplitude}};
  if (c.tau.seed_given) j["tau"]["seed"] = c.tau.seed;
  const char* init_kinds[] = {"zero", "random", "file"};
  j["init"] = {{"kind", init_kinds[static_cast<int>(c.init.kind)]}, {"amplitude", c.init.amplitude}};
  if (c.init.seed_given) j["init"]["seed"] = c.init.seed;
  if (!c.init.path.empty()) j["init"]["path"] = c.init.path;
  j["solver"] = {{"max_iters", c.solver.max_iters},       {"grad_tol", c.solver.grad_tol},
                 {"residual_tol", c.solver.residual_tol}, {"step_rule", step_rule_name(c.solver.step_rule)},
                 {"fixed_step", c.solver.fixed_step},     {"damping", c.solver.damping},
                 {"cg_iters", c.solver.cg_iters}};
  j["probe"] = {{"k", c.probe.k}, {"rel_tol", c.probe.rel_tol}, {"method", method_name(c.probe.method)}};
  j["output"] = {{"config", c.output.config}, {"history", c.output.history}, {"report", c.output.report}};
  return j.dump();
}

TauField make_tau(const RunConfig& c) { return make_tau(c, c.make_grid()); }

TauField make_tau(const RunConfig& c, const Grid& g) {
  switch (c.tau.kind) {
    case TauSpec::Kind::zero: return TauField(g);
    case TauSpec::Kind::identity: {
      TauMat m;
      for (int i = 0; i < 3; ++i) m(i, i) = c.tau.scale;
      return TauField(g, m);
    }
    case TauSpec::Kind::random: {
      Rng rng = c.tau.seed_given ? Rng(c.tau.seed) : Rng(c.seed).split(kTauStream);
      return random_tau_field(g, rng, c.tau.amplitude);
    }
  }
  return TauField(g);
}

Configuration make_init(const RunConfig& c) {
  const Grid g = c.make_grid();
  switch (c.init.kind) {
    case InitSpec::Kind::zero: return Configuration(g);
    case InitSpec::Kind::random: {
      Rng rng = c.init.seed_given ? Rng(c.init.seed) : Rng(c.seed).split(kInitStream);
      return random_configuration(g, rng, c.init.amplitude);
    }
    case InitSpec::Kind::file: {
      FieldFile f = read_vwf1(c.init.path);
      if (!(f.cfg.grid() == g)) throw ConfigError("init.path: file grid differs from configured grid");
      return std::move(f.cfg);
    }
  }
  return Configuration(g);
}

}  // namespace vw
