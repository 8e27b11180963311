#pragma once

// Pointwise algebra of su(2) (x) Lambda^{2,+} R^4.
//
// Conventions used throughout the library:
//   * su(2) is represented by coefficients in a basis eta_1, eta_2, eta_3 with
//     [eta_i, eta_j] = 2 eps_ijk eta_k, so the bracket is twice the cross product.
//   * Self-dual forms are spanned by
//       w1 = e1^e2 + e3^e4,  w2 = e1^e3 + e4^e2,  w3 = e1^e4 + e2^e3.
//   * Coefficient inner products are Euclidean in the (a, alpha, k) indices.
//   * Indices are 0-based in code: Lie index a, form index alpha, direction k.

#include <array>
#include <cstddef>

#include <Eigen/Dense>

namespace vw {

/// Fixed-size coefficient block. The tag keeps the four pointwise types apart.
template <class Tag, class T, int Rows, int Cols>
struct Block {
  static constexpr int rows = Rows;
  static constexpr int cols = Cols;
  static constexpr int size = Rows * Cols;

  std::array<T, size> v{};

  T& operator[](int i) { return v[i]; }
  const T& operator[](int i) const { return v[i]; }
  T& operator()(int r, int c) { return v[r * Cols + c]; }
  const T& operator()(int r, int c) const { return v[r * Cols + c]; }

  Block& operator+=(const Block& o) {
    for (int i = 0; i < size; ++i) v[i] += o.v[i];
    return *this;
  }
  Block& operator-=(const Block& o) {
    for (int i = 0; i < size; ++i) v[i] -= o.v[i];
    return *this;
  }
  Block& operator*=(const T& s) {
    for (int i = 0; i < size; ++i) v[i] *= s;
    return *this;
  }
  friend Block operator+(Block a, const Block& b) { return a += b; }
  friend Block operator-(Block a, const Block& b) { return a -= b; }
  friend Block operator*(const T& s, Block a) { return a *= s; }
  friend Block operator*(Block a, const T& s) { return a *= s; }
  friend Block operator-(Block a) {
    for (auto& x : a.v) x = -x;
    return a;
  }
  friend bool operator==(const Block& a, const Block& b) { return a.v == b.v; }
};

struct LieTag;
struct SelfDualTag;
struct OneFormTag;
struct TauTag;

/// su(2) element, coefficients c[a] of eta_a.
template <class T> using BasicLieVec = Block<LieTag, T, 1, 3>;
/// ad-valued self-dual 2-form, B(a, alpha) is the coefficient of eta_a (x) w_alpha.
template <class T> using BasicAdSelfDual = Block<SelfDualTag, T, 3, 3>;
/// ad-valued 1-form, phi(k, a) is the coefficient of eta_a (x) e^k.
template <class T> using BasicAdOneForm = Block<OneFormTag, T, 4, 3>;
/// Endomorphism of Lambda^{2,+}, tau(alpha, beta).
template <class T> using BasicTauMat = Block<TauTag, T, 3, 3>;

using LieVec = BasicLieVec<double>;
using AdSelfDual = BasicAdSelfDual<double>;
using AdOneForm = BasicAdOneForm<double>;
using TauMat = BasicTauMat<double>;

/// 12x12 matrix; unknowns ordered phi_11, phi_12, ..., phi_43 and equations
/// ordered (e1 eta1, e1 eta2, ..., e4 eta3), i.e. index 3*k + a on both sides.
template <class T> using BasicMat12 = std::array<std::array<T, 12>, 12>;
using Mat12 = BasicMat12<double>;

/// Entries (w_alpha)_{kl} of the self-dual basis, all in {-1, 0, 1}.
int omega(int alpha, int k, int l);

/// Levi-Civita symbol on {0,1,2}.
constexpr int levi_civita(int i, int j, int k) {
  return (i - j) * (j - k) * (k - i) / 2;
}

template <class T>
BasicLieVec<T> lie_bracket(const BasicLieVec<T>& x, const BasicLieVec<T>& y) {
  BasicLieVec<T> r;
  r[0] = T(2) * (x[1] * y[2] - x[2] * y[1]);
  r[1] = T(2) * (x[2] * y[0] - x[0] * y[2]);
  r[2] = T(2) * (x[0] * y[1] - x[1] * y[0]);
  return r;
}

template <class T>
BasicLieVec<T> form_component(const BasicAdSelfDual<T>& B, int alpha) {
  return {{B(0, alpha), B(1, alpha), B(2, alpha)}};
}

template <class T>
BasicLieVec<T> direction_component(const BasicAdOneForm<T>& phi, int k) {
  return {{phi(k, 0), phi(k, 1), phi(k, 2)}};
}

/// The Lie-valued 2-form component B_{kl} = sum_alpha B(., alpha) (w_alpha)_{kl}.
template <class T>
BasicLieVec<T> two_form_entry(const BasicAdSelfDual<T>& B, int k, int l) {
  BasicLieVec<T> r;
  for (int alpha = 0; alpha < 3; ++alpha) {
    const int w = omega(alpha, k, l);
    if (w == 0) continue;
    for (int a = 0; a < 3; ++a) r[a] += T(w) * B(a, alpha);
  }
  return r;
}

/// [B . phi]_l = sum_k [B_{kl}, phi_k].
template <class T>
BasicAdOneForm<T> sd_dot_one(const BasicAdSelfDual<T>& B, const BasicAdOneForm<T>& phi) {
  BasicAdOneForm<T> out;
  for (int l = 0; l < 4; ++l) {
    for (int k = 0; k < 4; ++k) {
      if (k == l) continue;
      const auto t = lie_bracket(two_form_entry(B, k, l), direction_component(phi, k));
      for (int a = 0; a < 3; ++a) out(l, a) += t[a];
    }
  }
  return out;
}

/// [B . b]_gamma = 2 sum_{alpha,beta} eps_{alpha beta gamma} [B_alpha, b_beta].
template <class T>
BasicAdSelfDual<T> sd_dot_sd(const BasicAdSelfDual<T>& B, const BasicAdSelfDual<T>& b) {
  BasicAdSelfDual<T> out;
  for (int alpha = 0; alpha < 3; ++alpha) {
    for (int beta = 0; beta < 3; ++beta) {
      if (alpha == beta) continue;
      const int gamma = 3 - alpha - beta;
      const int eps = levi_civita(alpha, beta, gamma);
      const auto t = lie_bracket(form_component(B, alpha), form_component(b, beta));
      for (int a = 0; a < 3; ++a) out(a, gamma) += T(2 * eps) * t[a];
    }
  }
  return out;
}

/// [b . B] into the Lie algebra: sum_alpha [b_alpha, B_alpha].
template <class T>
BasicLieVec<T> sd_pair_to_g(const BasicAdSelfDual<T>& b, const BasicAdSelfDual<T>& B) {
  BasicLieVec<T> out;
  for (int alpha = 0; alpha < 3; ++alpha)
    out += lie_bracket(form_component(b, alpha), form_component(B, alpha));
  return out;
}

/// [B, C] with components [B_alpha, C].
template <class T>
BasicAdSelfDual<T> sd_bracket(const BasicAdSelfDual<T>& B, const BasicLieVec<T>& C) {
  BasicAdSelfDual<T> out;
  for (int alpha = 0; alpha < 3; ++alpha) {
    const auto t = lie_bracket(form_component(B, alpha), C);
    for (int a = 0; a < 3; ++a) out(a, alpha) = t[a];
  }
  return out;
}

/// [C, phi] with components [C, phi_k].
template <class T>
BasicAdOneForm<T> one_bracket(const BasicLieVec<T>& C, const BasicAdOneForm<T>& phi) {
  BasicAdOneForm<T> out;
  for (int k = 0; k < 4; ++k) {
    const auto t = lie_bracket(C, direction_component(phi, k));
    for (int a = 0; a < 3; ++a) out(k, a) = t[a];
  }
  return out;
}

/// L_{B,C}(phi) = [B . phi] + [C, phi].
template <class T>
BasicAdOneForm<T> apply_lbc(const BasicAdSelfDual<T>& B, const BasicLieVec<T>& C,
                            const BasicAdOneForm<T>& phi) {
  return sd_dot_one(B, phi) + one_bracket(C, phi);
}

/// Coefficient matrix of the 12 linear equations L_{B,C}(phi) = 0 with the
/// common factor 2 of every entry removed, so that entries are +-B_alpha,
/// +-C_a or 0 for diagonal B. L_{B,C} itself is 2 * assemble_lbc(B, C).
template <class T>
BasicMat12<T> assemble_lbc(const BasicAdSelfDual<T>& B, const BasicLieVec<T>& C) {
  BasicMat12<T> M{};
  for (int col = 0; col < 12; ++col) {
    BasicAdOneForm<T> unit;
    unit[col] = T(1);
    const auto image = apply_lbc(B, C, unit);
    for (int row = 0; row < 12; ++row) M[row][col] = image[row] / T(2);
  }
  return M;
}

/// Closed form of det assemble_lbc(diag(B1,B2,B3), C).
template <class T>
T det_lbc_formula(const T& B1, const T& B2, const T& B3, const T& C1, const T& C2,
                  const T& C3) {
  const T b1 = B1 * B1, b2 = B2 * B2, b3 = B3 * B3;
  const T s = b1 * b2 * b3 + C1 * C1 * b2 * b3 + b1 * C2 * C2 * b3 + b1 * b2 * C3 * C3;
  return T(16) * s * s;
}

template <class T>
BasicAdSelfDual<T> diagonal_sd(const T& B1, const T& B2, const T& B3) {
  BasicAdSelfDual<T> B;
  B(0, 0) = B1;
  B(1, 1) = B2;
  B(2, 2) = B3;
  return B;
}

Eigen::Matrix3d to_matrix(const AdSelfDual& B);
AdSelfDual from_matrix(const Eigen::Matrix3d& M);
Eigen::Matrix<double, 12, 12> to_matrix(const Mat12& M);

/// M = U diag(D) V^T with U, V in SO(3) and D1 >= D2 >= |D3|; any reflection
/// is absorbed into the sign of D3.
struct SignedSvd {
  Eigen::Matrix3d U;
  Eigen::Vector3d D;
  Eigen::Matrix3d V;
};
SignedSvd signed_svd3(const Eigen::Matrix3d& M);

inline constexpr double kDefaultRankTol = 1e-8;

/// Number of singular values of the 3x3 coefficient matrix above rel_tol * sigma_1.
int sd_rank(const AdSelfDual& B, double rel_tol = kDefaultRankTol);

/// dim { xi : [B_alpha, xi] = 0 for all alpha }.
int centralizer_dim(const AdSelfDual& B, double rel_tol = kDefaultRankTol);

}  // namespace vw
