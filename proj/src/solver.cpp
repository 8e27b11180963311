#include "vwlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "vwlab/oracle.hpp"

namespace vw {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

double energy_of(const TauField& tau, const Configuration& cfg) {
  const Residual F = eval_F(tau, cfg);
  return 0.5 * inner(F, F);
}

// Difference x - y over (a, b, c).
TangentVec difference(const Configuration& x, const Configuration& y) {
  return TangentVec(std::nullopt, x.A - y.A, x.B - y.B, x.C - y.C);
}

TangentVec difference(const TangentVec& x, const TangentVec& y) {
  return TangentVec(std::nullopt, x.a - y.a, x.b - y.b, x.c - y.c);
}

TangentVec scaled_sum(const TangentVec& x, double s, const TangentVec& y) {
  return TangentVec(std::nullopt, x.a + s * y.a, x.b + s * y.b, x.c + s * y.c);
}

// CG for (J^T J + lambda) d = rhs, starting from d = 0.
TangentVec damped_normal_solve(const TauField& tau, const Configuration& x, double lambda,
                               const TangentVec& rhs, int max_iters) {
  const Grid& g = x.grid();
  auto op = [&](const TangentVec& v) {
    TangentVec out = apply_dF_star(tau, x, apply_dF(tau, x, v));
    out.dtau.reset();
    return scaled_sum(out, lambda, v);
  };
  TangentVec d(g), r = rhs, p = rhs;
  double rr = inner(r, r);
  const double stop = 1e-24 * rr;
  for (int it = 0; it < max_iters && rr > stop; ++it) {
    const TangentVec Ap = op(p);
    const double pAp = inner(p, Ap);
    if (!(pAp > 0.0)) break;
    const double a = rr / pAp;
    d = scaled_sum(d, a, p);
    r = scaled_sum(r, -a, Ap);
    const double rr_next = inner(r, r);
    p = scaled_sum(r, rr_next / rr, p);
    rr = rr_next;
  }
  return d;
}

int rank_of(const Eigen::VectorXd& sv, double rel_tol) {
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return r;
}

}  // namespace

void SolveOptions::validate() const {
  if (max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");
  if (!(grad_tol > 0.0) || !(residual_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (!(fixed_step > 0.0)) throw std::invalid_argument("fixed_step must be positive");
  if (!(damping > 0.0)) throw std::invalid_argument("damping must be positive");
  if (cg_iters < 1) throw std::invalid_argument("cg_iters must be positive");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::residual_tol: return "residual_tol";
    case StopReason::grad_tol: return "grad_tol";
    case StopReason::max_iters: return "max_iters";
    case StopReason::line_search: return "line_search";
  }
  return "unknown";
}

EnergyGradient energy_gradient(const TauField& tau, const Configuration& cfg) {
  const Residual F = eval_F(tau, cfg);
  TangentVec g = apply_dF_star(tau, cfg, F);
  g.dtau.reset();
  return {0.5 * inner(F, F), std::move(g)};
}

SolveResult minimize_residual(const TauField& tau, const Configuration& init, const SolveOptions& opts,
                              const SolveCallback& on_record) {
  opts.validate();
  init.check_consistent();
  if (!(tau.grid() == init.grid())) throw GridMismatch("minimize_residual: tau and configuration grids differ");

  SolveResult out{init, {}, StopReason::max_iters, 0.0};
  Configuration& x = out.cfg;
  EnergyGradient eg = energy_gradient(tau, x);
  double alpha = opts.fixed_step;
  double lambda = opts.damping;

  for (int iter = 0;; ++iter) {
    const double gnorm = std::sqrt(inner(eg.grad, eg.grad));
    if (!std::isfinite(eg.energy) || !std::isfinite(gnorm))
      throw DivergenceError(iter, "minimize_residual: non-finite energy at iteration " + std::to_string(iter));
    const SolveRecord rec{iter, eg.energy, gnorm};
    out.history.push_back(rec);
    if (on_record) on_record(rec);
    out.residual_norm = std::sqrt(2.0 * eg.energy);

    if (out.residual_norm <= opts.residual_tol) {
      out.reason = StopReason::residual_tol;
      break;
    }
    if (gnorm <= opts.grad_tol) {
      out.reason = StopReason::grad_tol;
      break;
    }
    if (iter >= opts.max_iters) {
      out.reason = StopReason::max_iters;
      break;
    }

    bool accepted = false;
    Configuration trial = x;
    if (opts.step_rule == StepRule::gauss_newton) {
      TangentVec rhs = eg.grad;
      rhs.a *= -1.0;
      rhs.b *= -1.0;
      rhs.c *= -1.0;
      for (int bt = 0; bt < kMaxBacktracks && !accepted; ++bt) {
        const TangentVec d = damped_normal_solve(tau, x, lambda, rhs, opts.cg_iters);
        trial = x;
        trial.add_scaled(1.0, d);
        const double e = energy_of(tau, trial);
        if (std::isfinite(e) && e < eg.energy) {
          accepted = true;
          lambda = std::max(lambda / 3.0, 1e-12);
        } else {
          lambda *= 4.0;
        }
      }
      if (!accepted) {
        out.reason = StopReason::line_search;
        break;
      }
      eg = energy_gradient(tau, trial);
      x = std::move(trial);
      continue;
    }

    if (opts.step_rule == StepRule::fixed) alpha = opts.fixed_step;
    const double g2 = gnorm * gnorm;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      trial = x;
      trial.add_scaled(-alpha, eg.grad);
      const double e = energy_of(tau, trial);
      if (std::isfinite(e) && e <= eg.energy - kArmijo * alpha * g2) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.reason = StopReason::line_search;
      break;
    }

    EnergyGradient next = energy_gradient(tau, trial);
    if (opts.step_rule == StepRule::adaptive_two_point) {
      const TangentVec s = difference(trial, x);
      const TangentVec y = difference(next.grad, eg.grad);
      const double sy = inner(s, y);
      alpha = sy > 0.0 ? inner(s, s) / sy : 2.0 * alpha;
    }
    x = std::move(trial);
    eg = std::move(next);
  }
  return out;
}

Stratification stratify(const Configuration& cfg, double rel_tol) {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("stratify: rel_tol must be positive");
  const std::size_t n = cfg.B.sites();
  std::vector<Eigen::Vector3d> sv(n);
  double top = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    sv[s] = to_matrix(cfg.B[s]).jacobiSvd().singularValues();
    top = std::max(top, sv[s](0));
  }
  Stratification out;
  out.ranks.resize(n);
  out.min_sigma3 = n ? std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    int r = 0;
    if (top > 0.0)
      for (int i = 0; i < 3; ++i)
        if (sv[s](i) > rel_tol * top) ++r;
    out.ranks[s] = r;
    ++out.rank_histogram[r];
    out.min_sigma3 = std::min(out.min_sigma3, sv[s](2));
  }
  out.x3_fraction = n ? static_cast<double>(out.rank_histogram[3]) / static_cast<double>(n) : 0.0;
  return out;
}

std::vector<int> probe_param_surjectivity(const Configuration& cfg, double rel_tol) {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("probe_param_surjectivity: rel_tol must be positive");
  const Grid& g = cfg.grid();
  std::vector<int> out(g.sites());
  for (std::size_t s = 0; s < g.sites(); ++s) {
    // Column (alpha, beta) is the image of the elementary perturbation E_{alpha beta}.
    Eigen::Matrix<double, 9, 9> M;
    for (int alpha = 0; alpha < 3; ++alpha)
      for (int beta = 0; beta < 3; ++beta) {
        TauMat E;
        E(alpha, beta) = 1.0;
        AdSelfDual img;
        for (int a = 0; a < 3; ++a)
          for (int al = 0; al < 3; ++al)
            for (int be = 0; be < 3; ++be) img(a, al) += E(al, be) * cfg.B[s](a, be);
        for (int i = 0; i < 9; ++i) M(i, 3 * alpha + beta) = img.v[i];
      }
    out[s] = rank_of(M.jacobiSvd().singularValues(), rel_tol);
  }
  return out;
}

namespace {

struct Spectrum {
  std::vector<double> sigma;
  std::string method;
  int iterations = 0;
  double residual = 0.0;
};

Spectrum dense_spectrum(const DeformationOperator& D, int k) {
  const Eigen::MatrixXd M = D.materialize_dense(std::max<std::size_t>(D.rows(), 1));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
  const Eigen::VectorXd sv = svd.singularValues();  // descending
  Spectrum out;
  out.method = "dense";
  for (int i = 0; i < k && i < sv.size(); ++i) out.sigma.push_back(sv(sv.size() - 1 - i));
  return out;
}

Spectrum iterative_spectrum(const DeformationOperator& D, const ProbeOptions& opts) {
  const Eigen::SparseMatrix<double> S = D.materialize(std::numeric_limits<std::size_t>::max());
  const Eigen::SparseMatrix<double> St = S.transpose();
  Eigen::SparseMatrix<double> N = St * S;
  N.makeCompressed();

  // Gershgorin bound on |D|^2 sets the scale of the shift and the residual test.
  double scale = 0.0;
  for (int j = 0; j < N.outerSize(); ++j) {
    double col = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(N, j); it; ++it) col += std::abs(it.value());
    scale = std::max(scale, col);
  }
  if (scale == 0.0) scale = 1.0;
  const double shift = 1e-10 * scale;
  Eigen::SparseMatrix<double> Ns = N;
  for (int j = 0; j < Ns.cols(); ++j) Ns.coeffRef(j, j) += shift;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Ns);
  if (solver.info() != Eigen::Success) throw ConvergenceError(0.0, "probe: factorization of D^T D failed");

  const Eigen::Index n = S.cols();
  const int k = static_cast<int>(std::min<Eigen::Index>(opts.k, n));
  const Eigen::Index p = std::min<Eigen::Index>(n, std::max(2 * k, k + 8));
  Rng rng(opts.seed);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = rng.uniform(-1.0, 1.0);

  Spectrum out;
  out.method = "iterative";
  double worst = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iters; ++it) {
    X = solver.solve(X);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);

    // Rayleigh-Ritz through the SVD of D X.
    const Eigen::MatrixXd Y = S * X;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Y, Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    X = X * svd.matrixV();

    worst = 0.0;
    std::vector<double> sigma(k);
    for (int i = 0; i < k; ++i) {
      const Eigen::Index col = p - 1 - i;
      const double s = sv(col);
      const Eigen::VectorXd r = St * (S * X.col(col)) - s * s * X.col(col);
      worst = std::max(worst, r.norm());
      sigma[i] = s;
    }
    out.sigma = sigma;
    out.iterations = it;
    out.residual = worst / scale;
    if (out.residual <= opts.tol) return out;
  }
  throw ConvergenceError(out.residual, "probe: subspace iteration did not converge, residual " +
                                           std::to_string(out.residual));
}

}  // namespace

ProbeReport probe_sigma_min(const TauField& tau, const Configuration& cfg, const ProbeOptions& opts) {
  if (opts.k < 1) throw std::invalid_argument("probe: k must be at least 1");
  const DeformationOperator D = assemble_D(tau, cfg);
  const bool dense = opts.method == ProbeMethod::dense ||
                     (opts.method == ProbeMethod::automatic && D.rows() <= opts.dense_limit);
  const Spectrum sp = dense ? dense_spectrum(D, opts.k) : iterative_spectrum(D, opts);

  ProbeReport rep;
  rep.k_smallest = sp.sigma;
  std::sort(rep.k_smallest.begin(), rep.k_smallest.end());
  rep.sigma_min = rep.k_smallest.front();
  rep.method = sp.method;
  rep.iterations = sp.iterations;
  rep.residual = sp.residual;
  rep.dimension = D.rows();

  const Stratification st = stratify(cfg, opts.rel_tol);
  rep.rank_histogram = st.rank_histogram;
  rep.x3_fraction = st.x3_fraction;
  rep.min_sigma3 = st.min_sigma3;
  for (int r : probe_param_surjectivity(cfg, opts.rel_tol)) ++rep.param_rank_histogram[r];
  return rep;
}

}  // namespace vw
