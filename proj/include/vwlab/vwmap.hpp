#pragma once

// The perturbed Vafa-Witten map on the lattice
//
//   F(tau, A, B, C) = ( d_A^* B + d_A C,
//                       F_A^+ + 1/8 [B . B] + 1/2 [B, C] + tau B ),
//
// its linearization, the linearized gauge action and their exact transposes.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "vwlab/lattice.hpp"

namespace vw {

struct TangentVec;

struct Configuration {
  OneFormField A;
  SelfDualField B;
  LieField C;

  explicit Configuration(const Grid& g) : A(g), B(g), C(g) {}
  Configuration(OneFormField a, SelfDualField b, LieField c);

  const Grid& grid() const { return A.grid(); }
  void check_consistent() const;

  /// this += s * v over (a, b, c); the delta-tau part of v is ignored.
  void add_scaled(double s, const TangentVec& v);
};

/// Tangent vector (delta tau, a, b, c); an empty dtau means fixed tau.
struct TangentVec {
  std::optional<TauField> dtau;
  OneFormField a;
  SelfDualField b;
  LieField c;

  explicit TangentVec(const Grid& g) : a(g), b(g), c(g) {}
  TangentVec(std::optional<TauField> dt, OneFormField a_, SelfDualField b_, LieField c_);

  const Grid& grid() const { return a.grid(); }
  void check_consistent() const;
};

/// (phi, psi) paired against the image of dF.
using CotangentVec = Residual;

/// Inner product over (a, b, c) and, when both carry one, over dtau.
double inner(const TangentVec& x, const TangentVec& y);

/// (tau B)(a, alpha) = sum_beta tau(alpha, beta) B(a, beta), per site.
SelfDualField tau_apply(const TauField& tau, const SelfDualField& B);
/// (tau^t psi)(a, beta) = sum_alpha tau(alpha, beta) psi(a, alpha), per site.
SelfDualField tau_transpose_apply(const TauField& tau, const SelfDualField& psi);

Residual eval_F(const TauField& tau, const Configuration& cfg);

/// dF at (tau, cfg) applied to v:
///   ( d_A^* b + d_A c + 1/2 [B . a] - [C, a],
///     d_A^+ a + 1/4 [B . b] + 1/2 [b, C] + 1/2 [B, c] + tau b + (dtau) B ).
/// The 1/2 [B . a] term is the derivative of the lattice d_A^* B in A.
Residual apply_dF(const TauField& tau, const Configuration& cfg, const TangentVec& v);

/// xi -> (0, d_A xi, [B, xi], [C, xi]).
TangentVec apply_d0(const Configuration& cfg, const LieField& xi);
/// Exact transpose of apply_d0: d_A^* a + [b . B] + [c, C].
LieField apply_d0_star(const Configuration& cfg, const TangentVec& v);

/// Exact transpose of apply_dF. The result always carries a dtau block,
/// dtau(alpha, beta) = sum_a psi(a, alpha) B(a, beta).
TangentVec apply_dF_star(const TauField& tau, const Configuration& cfg, const CotangentVec& w);

/// Constant gauge rotation of the Lie index of (A, B, C); tau is untouched.
Configuration constant_gauge_rotate(const Eigen::Matrix3d& R, const Configuration& cfg);

/// Pointwise pieces of apply_dF_star, exposed for cross-checks against the
/// adjoint system written in terms of brackets.
struct PointwiseAdjoint {
  AdOneForm a;  // 1/2 [B . phi] + [C, phi]
  AdSelfDual b;  // 1/4 [B . psi] - 1/2 [psi, C] + tau^t psi
  LieVec c;      // 1/2 [psi . B]
  TauMat dtau;   // psi B^t in (alpha, beta)
};
PointwiseAdjoint pointwise_adjoint(const TauMat& tau, const AdSelfDual& B, const LieVec& C,
                                   const AdOneForm& phi, const AdSelfDual& psi);

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Square first-order operator
///   D(a, b, c) = ( dF(0, a, b, c), d0^*(a, b, c) )
/// acting on vectors of length 24 * sites. Layout of both domain and codomain is
/// block-major: 12*sites one-form entries, 9*sites self-dual entries, 3*sites
/// Lie entries.
class DeformationOperator {
 public:
  DeformationOperator(TauField tau, Configuration cfg);

  std::size_t rows() const { return 24 * sites_; }
  std::size_t cols() const { return 24 * sites_; }
  const Grid& grid() const { return cfg_.grid(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const;

  /// Column-by-column materialization. Throws ResourceError when the dimension
  /// exceeds max_dim.
  Eigen::SparseMatrix<double> materialize(std::size_t max_dim = kDefaultMaxDim) const;
  Eigen::MatrixXd materialize_dense(std::size_t max_dim = kDefaultMaxDenseDim) const;

  static constexpr std::size_t kDefaultMaxDim = 40000;
  static constexpr std::size_t kDefaultMaxDenseDim = 8000;

  TangentVec unpack_domain(const Eigen::VectorXd& x) const;
  Eigen::VectorXd pack_domain(const TangentVec& v) const;
  Eigen::VectorXd pack_codomain(const Residual& r, const LieField& gauge) const;

 private:
  TauField tau_;
  Configuration cfg_;
  std::size_t sites_;
};

DeformationOperator assemble_D(const TauField& tau, const Configuration& cfg);

}  // namespace vw
