#pragma once

// Residual minimization, smallest singular values of the deformation operator
// and rank stratification of B.

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vwlab/vwmap.hpp"

namespace vw {

enum class StepRule { fixed, adaptive_two_point, gauss_newton };

struct SolveOptions {
  int max_iters = 20000;
  double grad_tol = 1e-14;
  double residual_tol = 1e-8;
  StepRule step_rule = StepRule::gauss_newton;
  /// Step length for the fixed rule and the first adaptive iteration.
  double fixed_step = 0.05;
  /// Initial damping and inner CG budget for the gauss_newton rule.
  double damping = 1e-3;
  int cg_iters = 400;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SolveRecord {
  int iter = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
};

enum class StopReason { residual_tol, grad_tol, max_iters, line_search };

const char* to_string(StopReason r);

struct SolveResult {
  Configuration cfg;
  std::vector<SolveRecord> history;
  StopReason reason = StopReason::max_iters;
  double residual_norm = 0.0;
  bool converged() const { return reason == StopReason::residual_tol; }
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int iter, const std::string& what) : std::runtime_error(what), iter_(iter) {}
  int iteration() const { return iter_; }

 private:
  int iter_;
};

/// E = 1/2 |F|^2 and its gradient over (a, b, c), computed as dF^*(F).
struct EnergyGradient {
  double energy;
  TangentVec grad;
};
EnergyGradient energy_gradient(const TauField& tau, const Configuration& cfg);

using SolveCallback = std::function<void(const SolveRecord&)>;

/// Descent on E; every accepted step lowers E. fixed and adaptive_two_point are
/// gradient steps with Armijo backtracking (the latter seeded by the
/// Barzilai-Borwein step). gauss_newton takes damped steps
/// (J^T J + lambda) d = -J^T F solved matrix-free by CG, J = dF over (a, b, c).
SolveResult minimize_residual(const TauField& tau, const Configuration& init, const SolveOptions& opts,
                              const SolveCallback& on_record = {});

struct Stratification {
  std::array<std::size_t, 4> rank_histogram{};
  double x3_fraction = 0.0;
  double min_sigma3 = 0.0;
  std::vector<int> ranks;
};

/// Per-site rank of B with one threshold, rel_tol times the largest sigma_1 over
/// the field.
Stratification stratify(const Configuration& cfg, double rel_tol = kDefaultRankTol);

/// Per-site rank of the 9x9 map dtau -> dtau B.
std::vector<int> probe_param_surjectivity(const Configuration& cfg, double rel_tol = kDefaultRankTol);

enum class ProbeMethod { automatic, dense, iterative };

struct ProbeOptions {
  int k = 6;
  double rel_tol = kDefaultRankTol;
  std::uint64_t seed = 0;
  ProbeMethod method = ProbeMethod::automatic;
  std::size_t dense_limit = 4000;
  int max_iters = 500;
  double tol = 1e-13;
};

struct ProbeReport {
  double sigma_min = 0.0;
  std::vector<double> k_smallest;
  std::array<std::size_t, 4> rank_histogram{};
  double x3_fraction = 0.0;
  double min_sigma3 = 0.0;
  /// Count of sites by rank of dtau -> dtau B (0..9).
  std::array<std::size_t, 10> param_rank_histogram{};
  std::string method;
  int iterations = 0;
  double residual = 0.0;
  std::size_t dimension = 0;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(double residual, const std::string& what) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// k smallest singular values of assemble_D(tau, cfg), ascending. Dense SVD up to
/// dense_limit, otherwise shifted inverse subspace iteration on D^T D.
ProbeReport probe_sigma_min(const TauField& tau, const Configuration& cfg, const ProbeOptions& opts = {});

}  // namespace vw
