#include "vwlab/algebra.hpp"

#include <stdexcept>

namespace vw {

namespace {

// (alpha, k, l) with k < l and (w_alpha)_{kl} = sign.
struct OmegaEntry {
  int k, l, sign;
};

constexpr OmegaEntry kOmega[3][2] = {
    {{0, 1, +1}, {2, 3, +1}},  // e1^e2 + e3^e4
    {{0, 2, +1}, {1, 3, -1}},  // e1^e3 + e4^e2
    {{0, 3, +1}, {1, 2, +1}},  // e1^e4 + e2^e3
};

int rank_from_singular_values(const Eigen::VectorXd& s, double rel_tol) {
  if (s.size() == 0 || !(s(0) > 0.0)) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

}  // namespace

int omega(int alpha, int k, int l) {
  for (const auto& e : kOmega[alpha]) {
    if (e.k == k && e.l == l) return e.sign;
    if (e.k == l && e.l == k) return -e.sign;
  }
  return 0;
}

Eigen::Matrix3d to_matrix(const AdSelfDual& B) {
  Eigen::Matrix3d M;
  for (int a = 0; a < 3; ++a)
    for (int alpha = 0; alpha < 3; ++alpha) M(a, alpha) = B(a, alpha);
  return M;
}

AdSelfDual from_matrix(const Eigen::Matrix3d& M) {
  AdSelfDual B;
  for (int a = 0; a < 3; ++a)
    for (int alpha = 0; alpha < 3; ++alpha) B(a, alpha) = M(a, alpha);
  return B;
}

Eigen::Matrix<double, 12, 12> to_matrix(const Mat12& M) {
  Eigen::Matrix<double, 12, 12> out;
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 12; ++c) out(r, c) = M[r][c];
  return out;
}

SignedSvd signed_svd3(const Eigen::Matrix3d& M) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SignedSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  if (out.U.determinant() < 0) {
    out.U.col(2) *= -1.0;
    out.D(2) *= -1.0;
  }
  if (out.V.determinant() < 0) {
    out.V.col(2) *= -1.0;
    out.D(2) *= -1.0;
  }
  return out;
}

int sd_rank(const AdSelfDual& B, double rel_tol) {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("sd_rank: rel_tol must be positive");
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(to_matrix(B));
  return rank_from_singular_values(svd.singularValues(), rel_tol);
}

int centralizer_dim(const AdSelfDual& B, double rel_tol) {
  // Rows 3*alpha + a of the map xi -> ([B_1, xi], [B_2, xi], [B_3, xi]).
  Eigen::Matrix<double, 9, 3> stacked;
  for (int j = 0; j < 3; ++j) {
    LieVec unit;
    unit[j] = 1.0;
    for (int alpha = 0; alpha < 3; ++alpha) {
      const auto t = lie_bracket(form_component(B, alpha), unit);
      for (int a = 0; a < 3; ++a) stacked(3 * alpha + a, j) = t[a];
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  return 3 - rank_from_singular_values(svd.singularValues(), rel_tol);
}

}  // namespace vw
