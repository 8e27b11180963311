#include "vwlab/vwmap.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <vector>

namespace vw {

namespace {

template <class Out, class Fn>
Field<Out> per_site(const Grid& g, Fn&& fn) {
  Field<Out> out(g);
  parallel_for(g.sites(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) out[s] = fn(s);
  });
  return out;
}

TauMat tau_of_pair(const AdSelfDual& psi, const AdSelfDual& B) {
  TauMat t;
  for (int alpha = 0; alpha < 3; ++alpha)
    for (int beta = 0; beta < 3; ++beta)
      for (int a = 0; a < 3; ++a) t(alpha, beta) += psi(a, alpha) * B(a, beta);
  return t;
}

AdSelfDual tau_times(const TauMat& tau, const AdSelfDual& B) {
  AdSelfDual out;
  for (int a = 0; a < 3; ++a)
    for (int alpha = 0; alpha < 3; ++alpha)
      for (int beta = 0; beta < 3; ++beta) out(a, alpha) += tau(alpha, beta) * B(a, beta);
  return out;
}

AdSelfDual tau_transpose_times(const TauMat& tau, const AdSelfDual& psi) {
  AdSelfDual out;
  for (int a = 0; a < 3; ++a)
    for (int beta = 0; beta < 3; ++beta)
      for (int alpha = 0; alpha < 3; ++alpha) out(a, beta) += tau(alpha, beta) * psi(a, alpha);
  return out;
}

void copy_in(std::span<double> dst, const double* src) {
  std::copy(src, src + dst.size(), dst.begin());
}

}  // namespace

Configuration::Configuration(OneFormField a, SelfDualField b, LieField c)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)) {
  check_consistent();
}

void Configuration::check_consistent() const {
  require_same_grid(B, A.grid());
  require_same_grid(C, A.grid());
}

void Configuration::add_scaled(double s, const TangentVec& v) {
  A.axpy(s, v.a);
  B.axpy(s, v.b);
  C.axpy(s, v.c);
}

TangentVec::TangentVec(std::optional<TauField> dt, OneFormField a_, SelfDualField b_, LieField c_)
    : dtau(std::move(dt)), a(std::move(a_)), b(std::move(b_)), c(std::move(c_)) {
  check_consistent();
}

void TangentVec::check_consistent() const {
  require_same_grid(b, a.grid());
  require_same_grid(c, a.grid());
  if (dtau) require_same_grid(*dtau, a.grid());
}

double inner(const TangentVec& x, const TangentVec& y) {
  double r = inner(x.a, y.a) + inner(x.b, y.b) + inner(x.c, y.c);
  if (x.dtau && y.dtau) r += inner(*x.dtau, *y.dtau);
  return r;
}

SelfDualField tau_apply(const TauField& tau, const SelfDualField& B) {
  require_same_grid(B, tau.grid());
  return per_site<AdSelfDual>(tau.grid(), [&](std::size_t s) { return tau_times(tau[s], B[s]); });
}

SelfDualField tau_transpose_apply(const TauField& tau, const SelfDualField& psi) {
  require_same_grid(psi, tau.grid());
  return per_site<AdSelfDual>(tau.grid(),
                              [&](std::size_t s) { return tau_transpose_times(tau[s], psi[s]); });
}

Residual eval_F(const TauField& tau, const Configuration& cfg) {
  cfg.check_consistent();
  require_same_grid(tau, cfg.grid());
  const auto& [A, B, C] = cfg;
  OneFormField one = cov_dstar_sd(A, B);
  one += cov_d0(A, C);
  SelfDualField sd = curvature_plus(A);
  sd += per_site<AdSelfDual>(cfg.grid(), [&](std::size_t s) {
    return 0.125 * sd_dot_sd(B[s], B[s]) + 0.5 * sd_bracket(B[s], C[s]) + tau_times(tau[s], B[s]);
  });
  return Residual(std::move(one), std::move(sd));
}

Residual apply_dF(const TauField& tau, const Configuration& cfg, const TangentVec& v) {
  cfg.check_consistent();
  v.check_consistent();
  require_same_grid(tau, cfg.grid());
  require_same_grid(v.a, cfg.grid());
  const auto& [A, B, C] = cfg;
  OneFormField one = cov_dstar_sd(A, v.b);
  one += cov_d0(A, v.c);
  one += per_site<AdOneForm>(cfg.grid(), [&](std::size_t s) {
    return 0.5 * sd_dot_one(B[s], v.a[s]) - one_bracket(C[s], v.a[s]);
  });
  SelfDualField sd = cov_d_plus(A, v.a);
  sd += per_site<AdSelfDual>(cfg.grid(), [&](std::size_t s) {
    AdSelfDual r = 0.25 * sd_dot_sd(B[s], v.b[s]) + 0.5 * sd_bracket(v.b[s], C[s]) +
                   0.5 * sd_bracket(B[s], v.c[s]) + tau_times(tau[s], v.b[s]);
    if (v.dtau) r += tau_times((*v.dtau)[s], B[s]);
    return r;
  });
  return Residual(std::move(one), std::move(sd));
}

TangentVec apply_d0(const Configuration& cfg, const LieField& xi) {
  cfg.check_consistent();
  require_same_grid(xi, cfg.grid());
  const auto& [A, B, C] = cfg;
  return TangentVec(std::nullopt, cov_d0(A, xi),
                    per_site<AdSelfDual>(cfg.grid(), [&](std::size_t s) { return sd_bracket(B[s], xi[s]); }),
                    per_site<LieVec>(cfg.grid(), [&](std::size_t s) { return lie_bracket(C[s], xi[s]); }));
}

LieField apply_d0_star(const Configuration& cfg, const TangentVec& v) {
  cfg.check_consistent();
  v.check_consistent();
  require_same_grid(v.a, cfg.grid());
  const auto& [A, B, C] = cfg;
  LieField out = cov_d0_star(A, v.a);
  out += per_site<LieVec>(cfg.grid(), [&](std::size_t s) {
    return sd_pair_to_g(v.b[s], B[s]) + lie_bracket(v.c[s], C[s]);
  });
  return out;
}

PointwiseAdjoint pointwise_adjoint(const TauMat& tau, const AdSelfDual& B, const LieVec& C,
                                   const AdOneForm& phi, const AdSelfDual& psi) {
  PointwiseAdjoint p;
  p.a = 0.5 * sd_dot_one(B, phi) + one_bracket(C, phi);
  p.b = 0.25 * sd_dot_sd(B, psi) - 0.5 * sd_bracket(psi, C) + tau_transpose_times(tau, psi);
  p.c = 0.5 * sd_pair_to_g(psi, B);
  p.dtau = tau_of_pair(psi, B);
  return p;
}

TangentVec apply_dF_star(const TauField& tau, const Configuration& cfg, const CotangentVec& w) {
  cfg.check_consistent();
  require_same_grid(tau, cfg.grid());
  require_same_grid(w.one_form, cfg.grid());
  require_same_grid(w.sd_form, cfg.grid());
  const auto& [A, B, C] = cfg;
  const auto& phi = w.one_form;
  const auto& psi = w.sd_form;
  const Grid& g = cfg.grid();

  TangentVec out(g);
  out.dtau = TauField(g);
  out.a = cov_dstar_sd(A, psi);
  out.b = cov_d_plus(A, phi);
  out.c = cov_d0_star(A, phi);
  parallel_for(g.sites(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto p = pointwise_adjoint(tau[s], B[s], C[s], phi[s], psi[s]);
      out.a[s] += p.a;
      out.b[s] += p.b;
      out.c[s] += p.c;
      (*out.dtau)[s] = p.dtau;
    }
  });
  return out;
}

Configuration constant_gauge_rotate(const Eigen::Matrix3d& R, const Configuration& cfg) {
  require_special_orthogonal(R);
  return Configuration(rotate(R, cfg.A), rotate(R, cfg.B), rotate(R, cfg.C));
}

DeformationOperator::DeformationOperator(TauField tau, Configuration cfg)
    : tau_(std::move(tau)), cfg_(std::move(cfg)), sites_(cfg_.grid().sites()) {
  cfg_.check_consistent();
  require_same_grid(tau_, cfg_.grid());
}

TangentVec DeformationOperator::unpack_domain(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != cols())
    throw std::invalid_argument("deformation operator: vector length mismatch");
  TangentVec v(grid());
  const double* p = x.data();
  copy_in(v.a.flat(), p);
  copy_in(v.b.flat(), p + 12 * sites_);
  copy_in(v.c.flat(), p + 21 * sites_);
  return v;
}

Eigen::VectorXd DeformationOperator::pack_domain(const TangentVec& v) const {
  Eigen::VectorXd x(cols());
  std::copy(v.a.flat().begin(), v.a.flat().end(), x.data());
  std::copy(v.b.flat().begin(), v.b.flat().end(), x.data() + 12 * sites_);
  std::copy(v.c.flat().begin(), v.c.flat().end(), x.data() + 21 * sites_);
  return x;
}

Eigen::VectorXd DeformationOperator::pack_codomain(const Residual& r, const LieField& gauge) const {
  Eigen::VectorXd y(rows());
  std::copy(r.one_form.flat().begin(), r.one_form.flat().end(), y.data());
  std::copy(r.sd_form.flat().begin(), r.sd_form.flat().end(), y.data() + 12 * sites_);
  std::copy(gauge.flat().begin(), gauge.flat().end(), y.data() + 21 * sites_);
  return y;
}

Eigen::VectorXd DeformationOperator::apply(const Eigen::VectorXd& x) const {
  const TangentVec v = unpack_domain(x);
  return pack_codomain(apply_dF(tau_, cfg_, v), apply_d0_star(cfg_, v));
}

Eigen::VectorXd DeformationOperator::apply_transpose(const Eigen::VectorXd& y) const {
  if (static_cast<std::size_t>(y.size()) != rows())
    throw std::invalid_argument("deformation operator: vector length mismatch");
  const Grid& g = grid();
  Residual w(g);
  LieField zeta(g);
  copy_in(w.one_form.flat(), y.data());
  copy_in(w.sd_form.flat(), y.data() + 12 * sites_);
  copy_in(zeta.flat(), y.data() + 21 * sites_);
  TangentVec out = apply_dF_star(tau_, cfg_, w);
  out.dtau.reset();
  const TangentVec gauge = apply_d0(cfg_, zeta);
  out.a += gauge.a;
  out.b += gauge.b;
  out.c += gauge.c;
  return pack_domain(out);
}

Eigen::SparseMatrix<double> DeformationOperator::materialize(std::size_t max_dim) const {
  if (cols() > max_dim)
    throw ResourceError("deformation operator of dimension " + std::to_string(cols()) +
                        " exceeds materialization limit " + std::to_string(max_dim));
  const Grid& g = grid();
  // Column j at site s only reaches rows at s and its nearest neighbours. Sites whose
  // stencils are disjoint get the same colour and are probed in one apply.
  auto stencil = [&](std::size_t s) {
    std::array<std::size_t, 9> out{s};
    for (int k = 0; k < 4; ++k) {
      out[1 + 2 * k] = g.neighbor(s, k, +1);
      out[2 + 2 * k] = g.neighbor(s, k, -1);
    }
    return out;
  };
  std::vector<int> colour(sites_, -1);
  int colours = 0;
  for (std::size_t s = 0; s < sites_; ++s) {
    std::vector<bool> taken(static_cast<std::size_t>(colours) + 1, false);
    for (std::size_t r : stencil(s))
      for (std::size_t t : stencil(r))
        if (colour[t] >= 0) taken[static_cast<std::size_t>(colour[t])] = true;
    int c = 0;
    while (taken[static_cast<std::size_t>(c)]) ++c;
    colour[s] = c;
    colours = std::max(colours, c + 1);
  }

  const std::array<std::size_t, 3> offset{0, 12 * sites_, 21 * sites_};
  const std::array<std::size_t, 3> width{12, 9, 3};
  auto site_of_row = [&](std::size_t i) {
    const int b = i >= offset[2] ? 2 : (i >= offset[1] ? 1 : 0);
    return (i - offset[b]) / width[b];
  };

  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols()));
  for (int c = 0; c < colours; ++c)
    for (int b = 0; b < 3; ++b)
      for (std::size_t comp = 0; comp < width[b]; ++comp) {
        for (std::size_t s = 0; s < sites_; ++s)
          if (colour[s] == c) x(static_cast<Eigen::Index>(offset[b] + width[b] * s + comp)) = 1.0;
        const Eigen::VectorXd y = apply(x);
        x.setZero();
        for (Eigen::Index i = 0; i < y.size(); ++i) {
          if (y(i) == 0.0) continue;
          for (std::size_t s : stencil(site_of_row(static_cast<std::size_t>(i))))
            if (colour[s] == c) {
              entries.emplace_back(i, static_cast<Eigen::Index>(offset[b] + width[b] * s + comp), y(i));
              break;
            }
        }
      }
  Eigen::SparseMatrix<double> M(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  M.setFromTriplets(entries.begin(), entries.end());
  return M;
}

Eigen::MatrixXd DeformationOperator::materialize_dense(std::size_t max_dim) const {
  if (cols() > max_dim)
    throw ResourceError("deformation operator of dimension " + std::to_string(cols()) +
                        " exceeds dense limit " + std::to_string(max_dim));
  return Eigen::MatrixXd(materialize(max_dim));
}

DeformationOperator assemble_D(const TauField& tau, const Configuration& cfg) {
  return DeformationOperator(tau, cfg);
}

}  // namespace vw
