#include "vwlab/vwlab.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "json.hpp"
#include "vwlab/config.hpp"
#include "vwlab/field_io.hpp"
#include "vwlab/solver.hpp"
#include "vwlab/suites.hpp"

struct vwlab_config {
  vw::RunConfig cfg;
};

struct vwlab_state {
  vw::TauField tau;
  vw::Configuration cfg;
};

namespace {

using nlohmann::json;

thread_local std::string last_error;

vwlab_status fail(vwlab_status s, const std::string& what) {
  last_error = what;
  return s;
}

template <class F>
vwlab_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const vw::ConfigError& e) {
    return fail(VWLAB_ERR_CONFIG, e.what());
  } catch (const vw::FormatError& e) {
    return fail(VWLAB_ERR_FORMAT, e.what());
  } catch (const vw::IoError& e) {
    return fail(VWLAB_ERR_IO, e.what());
  } catch (const vw::GridMismatch& e) {
    return fail(VWLAB_ERR_GRID, e.what());
  } catch (const vw::DivergenceError& e) {
    return fail(VWLAB_ERR_DIVERGENCE, e.what());
  } catch (const vw::ConvergenceError& e) {
    return fail(VWLAB_ERR_CONVERGENCE, e.what());
  } catch (const vw::ResourceError& e) {
    return fail(VWLAB_ERR_RESOURCE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(VWLAB_ERR_RESOURCE, "out of memory");
  } catch (const std::invalid_argument& e) {
    return fail(VWLAB_ERR_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(VWLAB_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(VWLAB_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

vw::LineSink sink(vwlab_line_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](const std::string& line) { fn(line.c_str(), user); };
}

std::string* output_slot(vw::RunConfig& c, const char* which) {
  if (!which) return nullptr;
  const std::string w = which;
  if (w == "config") return &c.output.config;
  if (w == "history") return &c.output.history;
  if (w == "report") return &c.output.report;
  return nullptr;
}

// Non-finite values have no JSON spelling; they are written as null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

extern "C" {

const char* vwlab_version(void) { return "1.0.0"; }

const char* vwlab_last_error(void) { return last_error.c_str(); }

const char* vwlab_status_name(vwlab_status status) {
  switch (status) {
    case VWLAB_OK: return "ok";
    case VWLAB_ERR_ARGUMENT: return "argument";
    case VWLAB_ERR_CONFIG: return "config";
    case VWLAB_ERR_FORMAT: return "format";
    case VWLAB_ERR_IO: return "io";
    case VWLAB_ERR_GRID: return "grid";
    case VWLAB_ERR_DIVERGENCE: return "divergence";
    case VWLAB_ERR_CONVERGENCE: return "convergence";
    case VWLAB_ERR_RESOURCE: return "resource";
    case VWLAB_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void vwlab_string_free(char* s) { std::free(s); }

vwlab_status vwlab_set_threads(int threads) {
  return guarded([&] {
    if (threads < 1) return fail(VWLAB_ERR_ARGUMENT, "threads must be at least 1");
    vw::set_threads(threads);
    return VWLAB_OK;
  });
}

vwlab_status vwlab_config_default(vwlab_config** out) {
  return guarded([&] {
    if (!out) return fail(VWLAB_ERR_ARGUMENT, "null output handle");
    *out = new vwlab_config{};
    return VWLAB_OK;
  });
}

vwlab_status vwlab_config_parse(const char* text, vwlab_config** out) {
  return guarded([&] {
    if (!text || !out) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    *out = new vwlab_config{vw::parse_run_config(text)};
    return VWLAB_OK;
  });
}

vwlab_status vwlab_config_load(const char* path, vwlab_config** out) {
  return guarded([&] {
    if (!path || !out) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    *out = new vwlab_config{vw::load_run_config(path)};
    return VWLAB_OK;
  });
}

vwlab_status vwlab_config_set_grid(vwlab_config* cfg, const int dims[4]) {
  return guarded([&] {
    if (!cfg || !dims) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    vw::RunConfig next = cfg->cfg;
    next.grid = {dims[0], dims[1], dims[2], dims[3]};
    next.validate();
    cfg->cfg = next;
    return VWLAB_OK;
  });
}

vwlab_status vwlab_config_set_seed(vwlab_config* cfg, uint64_t seed) {
  return guarded([&] {
    if (!cfg) return fail(VWLAB_ERR_ARGUMENT, "null config");
    cfg->cfg.seed = seed;
    cfg->cfg.solver.seed = seed;
    return VWLAB_OK;
  });
}

vwlab_status vwlab_config_set_output(vwlab_config* cfg, const char* which, const char* path) {
  return guarded([&] {
    if (!cfg || !path) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    std::string* slot = output_slot(cfg->cfg, which);
    if (!slot) return fail(VWLAB_ERR_ARGUMENT, "unknown output slot");
    *slot = path;
    return VWLAB_OK;
  });
}

vwlab_status vwlab_config_get_output(const vwlab_config* cfg, const char* which, const char** path) {
  return guarded([&] {
    if (!cfg || !path) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    std::string* slot = output_slot(const_cast<vw::RunConfig&>(cfg->cfg), which);
    if (!slot) return fail(VWLAB_ERR_ARGUMENT, "unknown output slot");
    *path = slot->c_str();
    return VWLAB_OK;
  });
}

vwlab_status vwlab_config_to_json(const vwlab_config* cfg, char** out) {
  return guarded([&] {
    if (!cfg || !out) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    *out = dup(vw::to_json(cfg->cfg));
    return VWLAB_OK;
  });
}

void vwlab_config_free(vwlab_config* cfg) { delete cfg; }

vwlab_status vwlab_state_create(const vwlab_config* cfg, vwlab_state** out) {
  return guarded([&] {
    if (!cfg || !out) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    *out = new vwlab_state{vw::make_tau(cfg->cfg), vw::make_init(cfg->cfg)};
    return VWLAB_OK;
  });
}

vwlab_status vwlab_state_read(const char* path, const vwlab_config* cfg, vwlab_state** out) {
  return guarded([&] {
    if (!path || !out) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    vw::FieldFile f = vw::read_vwf1(std::string(path));
    const vw::RunConfig defaults;
    vw::TauField tau = f.tau ? std::move(*f.tau) : vw::make_tau(cfg ? cfg->cfg : defaults, f.cfg.grid());
    *out = new vwlab_state{std::move(tau), std::move(f.cfg)};
    return VWLAB_OK;
  });
}

vwlab_status vwlab_state_write(const vwlab_state* state, const char* path, int include_tau) {
  return guarded([&] {
    if (!state || !path) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    vw::write_vwf1(std::string(path), state->cfg, include_tau ? &state->tau : nullptr);
    return VWLAB_OK;
  });
}

vwlab_status vwlab_state_sites(const vwlab_state* state, size_t* sites) {
  return guarded([&] {
    if (!state || !sites) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    *sites = state->cfg.grid().sites();
    return VWLAB_OK;
  });
}

vwlab_status vwlab_state_residual_norm(const vwlab_state* state, double* out) {
  return guarded([&] {
    if (!state || !out) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    *out = vw::norm(vw::eval_F(state->tau, state->cfg));
    return VWLAB_OK;
  });
}

void vwlab_state_free(vwlab_state* state) { delete state; }

vwlab_status vwlab_verify_lemma(int samples, uint64_t seed, int exact, const char* fault, vwlab_line_fn on_failure,
                                void* user, int* passed) {
  return guarded([&] {
    if (!passed) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    vw::LemmaSuiteOptions o;
    o.samples = samples;
    o.seed = seed;
    o.exact = exact != 0;
    o.fault = fault ? fault : "";
    *passed = vw::run_lemma_suite(o, sink(on_failure, user)).passed();
    return VWLAB_OK;
  });
}

vwlab_status vwlab_check_ops(const vwlab_config* cfg, const char* fault, vwlab_line_fn on_failure, void* user,
                             int* passed) {
  return guarded([&] {
    if (!cfg || !passed) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    vw::OpsSuiteOptions o;
    o.dims = cfg->cfg.grid;
    o.h = cfg->cfg.h;
    o.seed = cfg->cfg.seed;
    o.trials = cfg->cfg.trials;
    o.fault = fault ? fault : "";
    *passed = vw::run_ops_suite(o, sink(on_failure, user)).passed();
    return VWLAB_OK;
  });
}

vwlab_status vwlab_solve(const vwlab_config* cfg, vwlab_state* state, vwlab_line_fn on_record, void* user,
                         int* converged, char** summary_json) {
  return guarded([&] {
    if (!cfg || !state || !converged) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    vw::SolveCallback cb;
    if (on_record)
      cb = [&](const vw::SolveRecord& r) {
        const json line = {{"iter", r.iter}, {"energy", num(r.energy)}, {"grad_norm", num(r.grad_norm)}};
        on_record(line.dump().c_str(), user);
      };
    vw::SolveResult res = vw::minimize_residual(state->tau, state->cfg, cfg->cfg.solver, cb);
    state->cfg = std::move(res.cfg);
    *converged = res.converged();
    if (summary_json) {
      const json s = {{"converged", res.converged()},
                      {"reason", vw::to_string(res.reason)},
                      {"iterations", res.history.empty() ? 0 : res.history.back().iter},
                      {"energy", num(res.history.empty() ? 0.0 : res.history.back().energy)},
                      {"residual_norm", num(res.residual_norm)}};
      *summary_json = dup(s.dump());
    }
    return VWLAB_OK;
  });
}

vwlab_status vwlab_probe(const vwlab_config* cfg, const vwlab_state* state, int k, char** report_json) {
  return guarded([&] {
    if (!cfg || !state || !report_json) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    vw::ProbeOptions o;
    o.k = k > 0 ? k : cfg->cfg.probe.k;
    o.rel_tol = cfg->cfg.probe.rel_tol;
    o.method = cfg->cfg.probe.method;
    o.seed = cfg->cfg.seed;
    const vw::ProbeReport r = vw::probe_sigma_min(state->tau, state->cfg, o);
    const vw::Grid& g = state->cfg.grid();
    json j;
    j["grid"] = g.dims();
    j["h"] = g.h();
    j["dimension"] = r.dimension;
    j["method"] = r.method;
    j["iterations"] = r.iterations;
    j["residual"] = num(r.residual);
    j["sigma_min"] = num(r.sigma_min);
    j["k_smallest"] = json::array();
    for (double s : r.k_smallest) j["k_smallest"].push_back(num(s));
    j["rank_histogram"] = r.rank_histogram;
    j["x3_fraction"] = r.x3_fraction;
    j["min_sigma3"] = num(r.min_sigma3);
    j["param_rank_histogram"] = r.param_rank_histogram;
    j["param_surjective_fraction"] =
        static_cast<double>(r.param_rank_histogram[9]) / static_cast<double>(g.sites());
    *report_json = dup(j.dump());
    return VWLAB_OK;
  });
}

vwlab_status vwlab_stratify(const vwlab_config* cfg, const vwlab_state* state, char** report_json) {
  return guarded([&] {
    if (!cfg || !state || !report_json) return fail(VWLAB_ERR_ARGUMENT, "null argument");
    const vw::Stratification st = vw::stratify(state->cfg, cfg->cfg.probe.rel_tol);
    std::array<std::size_t, 10> param{};
    for (int r : vw::probe_param_surjectivity(state->cfg, cfg->cfg.probe.rel_tol)) ++param[r];
    json j;
    j["grid"] = state->cfg.grid().dims();
    j["rank_histogram"] = st.rank_histogram;
    j["x3_fraction"] = st.x3_fraction;
    j["min_sigma3"] = num(st.min_sigma3);
    j["param_rank_histogram"] = param;
    *report_json = dup(j.dump());
    return VWLAB_OK;
  });
}

}  // extern "C"
