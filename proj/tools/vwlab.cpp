// Command-line driver. stdout carries only JSON/JSONL; diagnostics go to stderr.
// Exit codes: 0 pass, 1 property or convergence failure, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vwlab/vwlab.h"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

int exit_code(vwlab_status s) {
  switch (s) {
    case VWLAB_OK: return kPass;
    case VWLAB_ERR_ARGUMENT:
    case VWLAB_ERR_CONFIG:
    case VWLAB_ERR_FORMAT:
    case VWLAB_ERR_IO:
    case VWLAB_ERR_GRID: return kUsage;
    default: return kFail;
  }
}

int report(vwlab_status s) {
  std::cerr << "vwlab: " << vwlab_status_name(s) << " error: " << vwlab_last_error() << "\n";
  return exit_code(s);
}

struct ConfigDeleter {
  void operator()(vwlab_config* c) const { vwlab_config_free(c); }
};
struct StateDeleter {
  void operator()(vwlab_state* s) const { vwlab_state_free(s); }
};
struct StringDeleter {
  void operator()(char* s) const { vwlab_string_free(s); }
};
using ConfigPtr = std::unique_ptr<vwlab_config, ConfigDeleter>;
using StatePtr = std::unique_ptr<vwlab_state, StateDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

struct Common {
  std::string config;
  std::string grid;
  std::optional<std::uint64_t> seed;
};

bool parse_grid(const std::string& text, int dims[4]) {
  std::stringstream ss(text);
  std::string part;
  int n = 0;
  while (std::getline(ss, part, 'x')) {
    if (n == 4 || part.empty() || part.find_first_not_of("0123456789") != std::string::npos || part.size() > 6)
      return false;
    dims[n++] = std::stoi(part);
  }
  return n == 4;
}

// Loads the configuration and applies --grid and --seed overrides.
vwlab_status load_config(const Common& c, ConfigPtr& out) {
  vwlab_config* raw = nullptr;
  vwlab_status s = c.config.empty() ? vwlab_config_default(&raw) : vwlab_config_load(c.config.c_str(), &raw);
  if (s != VWLAB_OK) return s;
  out.reset(raw);
  if (!c.grid.empty()) {
    int dims[4];
    if (!parse_grid(c.grid, dims)) {
      std::cerr << "vwlab: --grid expects n1xn2xn3xn4\n";
      return VWLAB_ERR_ARGUMENT;
    }
    if ((s = vwlab_config_set_grid(out.get(), dims)) != VWLAB_OK) return s;
  }
  if (c.seed) return vwlab_config_set_seed(out.get(), *c.seed);
  return VWLAB_OK;
}

void print_line(const char* line, void*) { std::printf("%s\n", line); }

struct HistorySink {
  std::ofstream file;
};

void history_line(const char* line, void* user) {
  std::printf("%s\n", line);
  auto* h = static_cast<HistorySink*>(user);
  if (h->file.is_open()) h->file << line << "\n";
}

bool write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text << "\n";
  return static_cast<bool>(out);
}

void add_common(CLI::App* cmd, Common& c, bool with_config) {
  if (with_config) cmd->add_option("--config", c.config, "RunConfig JSON file")->check(CLI::ExistingFile);
  cmd->add_option("--grid", c.grid, "grid dims n1xn2xn3xn4");
  cmd->add_option("--seed", c.seed, "random seed");
}

int run_verify_lemma(int samples, std::uint64_t seed, bool exact, const std::string& fault) {
  if (samples < 1) {
    std::cerr << "vwlab: --samples must be at least 1\n";
    return kUsage;
  }
  int passed = 0;
  const vwlab_status s =
      vwlab_verify_lemma(samples, seed, exact, fault.empty() ? nullptr : fault.c_str(), print_line, nullptr, &passed);
  if (s != VWLAB_OK) return report(s);
  std::cerr << "verify-lemma: " << (passed ? "all checks passed" : "failures found") << "\n";
  return passed ? kPass : kFail;
}

int run_check_ops(const Common& c, const std::string& fault) {
  ConfigPtr cfg;
  if (vwlab_status s = load_config(c, cfg); s != VWLAB_OK) return report(s);
  int passed = 0;
  const vwlab_status s =
      vwlab_check_ops(cfg.get(), fault.empty() ? nullptr : fault.c_str(), print_line, nullptr, &passed);
  if (s != VWLAB_OK) return report(s);
  std::cerr << "check-ops: " << (passed ? "all checks passed" : "failures found") << "\n";
  return passed ? kPass : kFail;
}

int run_solve(const Common& c, const std::string& out_path) {
  ConfigPtr cfg;
  if (vwlab_status s = load_config(c, cfg); s != VWLAB_OK) return report(s);
  vwlab_state* raw = nullptr;
  if (vwlab_status s = vwlab_state_create(cfg.get(), &raw); s != VWLAB_OK) return report(s);
  StatePtr state(raw);

  const char* history = "";
  vwlab_config_get_output(cfg.get(), "history", &history);
  HistorySink sink;
  if (*history) {
    sink.file.open(history);
    if (!sink.file) {
      std::cerr << "vwlab: cannot open history file " << history << "\n";
      return kUsage;
    }
  }
  int converged = 0;
  char* summary = nullptr;
  const vwlab_status s = vwlab_solve(cfg.get(), state.get(), history_line, &sink, &converged, &summary);
  StringPtr summary_owner(summary);
  if (s != VWLAB_OK) return report(s);
  std::printf("%s\n", summary);

  std::string target = out_path;
  if (target.empty()) {
    const char* configured = "";
    vwlab_config_get_output(cfg.get(), "config", &configured);
    target = configured;
  }
  if (!target.empty())
    if (vwlab_status w = vwlab_state_write(state.get(), target.c_str(), 1); w != VWLAB_OK) return report(w);
  std::cerr << "solve: " << (converged ? "converged" : "did not reach residual_tol") << "\n";
  return converged ? kPass : kFail;
}

// probe and stratify share input handling: a VWF1 file, or fields from the config.
int run_report(const Common& c, const std::string& input, const std::string& out_path, bool probe, int k) {
  ConfigPtr cfg;
  if (vwlab_status s = load_config(c, cfg); s != VWLAB_OK) return report(s);
  vwlab_state* raw = nullptr;
  vwlab_status s = input.empty() ? vwlab_state_create(cfg.get(), &raw) : vwlab_state_read(input.c_str(), cfg.get(), &raw);
  if (s != VWLAB_OK) return report(s);
  StatePtr state(raw);
  char* json = nullptr;
  s = probe ? vwlab_probe(cfg.get(), state.get(), k, &json) : vwlab_stratify(cfg.get(), state.get(), &json);
  StringPtr json_owner(json);
  if (s != VWLAB_OK) return report(s);
  std::printf("%s\n", json);

  std::string target = out_path;
  if (target.empty()) {
    const char* configured = "";
    vwlab_config_get_output(cfg.get(), "report", &configured);
    target = configured;
  }
  if (!target.empty() && !write_text(target, json)) {
    std::cerr << "vwlab: cannot write report " << target << "\n";
    return kUsage;
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice workbench for the perturbed Vafa-Witten equations"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap")->check(CLI::PositiveNumber);

  int samples = 1000;
  std::uint64_t lemma_seed = 0;
  bool exact = false;
  std::string fault;
  auto* lemma = app.add_subcommand("verify-lemma", "check the pointwise determinant identity and kernel structure");
  lemma->add_option("--samples", samples, "number of sampled tuples");
  lemma->add_option("--seed", lemma_seed, "random seed");
  lemma->add_flag("--exact", exact, "exact rational determinants");
  lemma->add_option("--fault", fault)->group("");

  Common ops_common;
  std::string ops_fault;
  auto* ops = app.add_subcommand("check-ops", "run the lattice operator property suites");
  add_common(ops, ops_common, true);
  ops->add_option("--fault", ops_fault)->group("");

  Common solve_common;
  std::string solve_out;
  auto* solve = app.add_subcommand("solve", "minimize the residual from the configured start");
  add_common(solve, solve_common, true);
  solve->add_option("--out", solve_out, "VWF1 path for the final configuration");

  Common probe_common;
  std::string probe_input, probe_out;
  int k = 0;
  auto* probe = app.add_subcommand("probe", "smallest singular values of the deformation operator");
  add_common(probe, probe_common, true);
  probe->add_option("--input", probe_input, "VWF1 input");
  probe->add_option("--k", k, "number of singular values")->check(CLI::PositiveNumber);
  probe->add_option("--out", probe_out, "path for the JSON report");

  Common strat_common;
  std::string strat_input, strat_out;
  auto* strat = app.add_subcommand("stratify", "pointwise rank statistics of B");
  add_common(strat, strat_common, true);
  strat->add_option("--input", strat_input, "VWF1 input");
  strat->add_option("--out", strat_out, "path for the JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return kUsage;
  }

  if (threads > 0)
    if (vwlab_status s = vwlab_set_threads(threads); s != VWLAB_OK) return report(s);

  if (lemma->parsed()) return run_verify_lemma(samples, lemma_seed, exact, fault);
  if (ops->parsed()) return run_check_ops(ops_common, ops_fault);
  if (solve->parsed()) return run_solve(solve_common, solve_out);
  if (probe->parsed()) return run_report(probe_common, probe_input, probe_out, true, k);
  if (strat->parsed()) return run_report(strat_common, strat_input, strat_out, false, 0);
  return kUsage;
}
