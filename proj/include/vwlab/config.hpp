#pragma once

// Run configuration: one JSON document, unknown keys rejected at every level.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "vwlab/solver.hpp"

namespace vw {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TauSpec {
  enum class Kind { zero, identity, random } kind = Kind::zero;
  double scale = 1.0;
  double amplitude = 1.0;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

struct InitSpec {
  enum class Kind { zero, random, file } kind = Kind::zero;
  double amplitude = 1e-3;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string path;
};

struct ProbeSpec {
  int k = 6;
  double rel_tol = kDefaultRankTol;
  ProbeMethod method = ProbeMethod::automatic;
};

struct OutputSpec {
  std::string config;
  std::string history;
  std::string report;
};

struct RunConfig {
  std::array<int, 4> grid{3, 3, 3, 3};
  double h = 1.0;
  std::uint64_t seed = 0;
  /// Random trials per property in check-ops.
  int trials = 5;
  TauSpec tau;
  InitSpec init;
  SolveOptions solver;
  ProbeSpec probe;
  OutputSpec output;

  /// Throws ConfigError when the grid or any option is out of range.
  void validate() const;
  Grid make_grid() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string to_json(const RunConfig& cfg);

/// Fields built from the specs; random draws come from streams split off seed.
TauField make_tau(const RunConfig& cfg);
/// Same spec on another grid, for inputs read from files.
TauField make_tau(const RunConfig& cfg, const Grid& grid);
Configuration make_init(const RunConfig& cfg);

}  // namespace vw
