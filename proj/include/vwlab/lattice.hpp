#pragma once

// Periodic flat 4-torus, lattice fields and the covariant difference operators.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "vwlab/algebra.hpp"

namespace vw {

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kMaxSites = std::size_t{1} << 26;

/// Periodic grid with n_i >= 3 sites per direction, at most kMaxSites sites, and uniform spacing h.
/// Site index is ((i1*n2 + i2)*n3 + i3)*n4 + i4.
class Grid {
 public:
  Grid(std::array<int, 4> dims, double h);

  const std::array<int, 4>& dims() const { return dims_; }
  double h() const { return h_; }
  std::size_t sites() const { return sites_; }

  std::size_t index(const std::array<int, 4>& coord) const;
  std::array<int, 4> coord(std::size_t site) const;
  /// Neighbour of site in direction k (0-based) with step +1 or -1, periodic.
  std::size_t neighbor(std::size_t site, int k, int step) const {
    return (*(step > 0 ? plus_ : minus_))[4 * site + k];
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.dims_ == b.dims_ && a.h_ == b.h_;
  }

 private:
  std::array<int, 4> dims_;
  double h_;
  std::size_t sites_;
  // Shared so that copying a grid (every field holds one) stays cheap.
  std::shared_ptr<const std::vector<std::size_t>> plus_;
  std::shared_ptr<const std::vector<std::size_t>> minus_;
};

/// Number of worker threads used by per-site loops. Results do not depend on it.
void set_threads(int n);
int threads();

/// Runs body(begin, end) over a partition of [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Sum of values in a fixed pairwise tree; bitwise reproducible.
double pairwise_sum(std::span<const double> values);

/// One V per site.
template <class V>
class Field {
  static_assert(std::is_same_v<typename std::remove_cv_t<decltype(V{}.v)>::value_type, double>);
  static_assert(sizeof(V) == V::size * sizeof(double));

 public:
  static constexpr int components = V::size;

  explicit Field(const Grid& grid) : grid_(grid), data_(grid.sites()) {}
  Field(const Grid& grid, const V& value) : grid_(grid), data_(grid.sites(), value) {}

  const Grid& grid() const { return grid_; }
  std::size_t sites() const { return data_.size(); }

  V& operator[](std::size_t site) { return data_[site]; }
  const V& operator[](std::size_t site) const { return data_[site]; }

  std::span<double> flat() {
    return {reinterpret_cast<double*>(data_.data()), data_.size() * V::size};
  }
  std::span<const double> flat() const {
    return {reinterpret_cast<const double*>(data_.data()), data_.size() * V::size};
  }

  Field& operator+=(const Field& o) {
    check_same(o);
    for (std::size_t s = 0; s < data_.size(); ++s) data_[s] += o.data_[s];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    for (std::size_t s = 0; s < data_.size(); ++s) data_[s] -= o.data_[s];
    return *this;
  }
  Field& operator*=(double c) {
    for (auto& x : data_) x *= c;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double c, Field a) { return a *= c; }
  friend bool operator==(const Field& a, const Field& b) {
    return a.grid_ == b.grid_ && a.data_ == b.data_;
  }

  /// this += c * o
  void axpy(double c, const Field& o) {
    check_same(o);
    auto x = flat();
    auto y = o.flat();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += c * y[i];
  }

  void check_same(const Field& o) const {
    if (!(grid_ == o.grid_)) throw GridMismatch("field grids differ");
  }

 private:
  Grid grid_;
  std::vector<V> data_;
};

using LieField = Field<LieVec>;
using OneFormField = Field<AdOneForm>;
using SelfDualField = Field<AdSelfDual>;
using TauField = Field<TauMat>;

/// Pair (ad-valued 1-form, ad-valued self-dual form), the codomain of the map.
struct Residual {
  OneFormField one_form;
  SelfDualField sd_form;

  explicit Residual(const Grid& g) : one_form(g), sd_form(g) {}
  Residual(OneFormField one, SelfDualField sd);

  const Grid& grid() const { return one_form.grid(); }

  Residual& operator+=(const Residual& o);
  Residual& operator-=(const Residual& o);
  Residual& operator*=(double c);
  friend Residual operator+(Residual a, const Residual& b) { return a += b; }
  friend Residual operator-(Residual a, const Residual& b) { return a -= b; }
  friend Residual operator*(double c, Residual a) { return a *= c; }
};

template <class V>
void require_same_grid(const Field<V>& f, const Grid& g) {
  if (!(f.grid() == g)) throw GridMismatch("field grids differ");
}

/// Central difference (f(x+e_k) - f(x-e_k)) / (2h), k in 0..3.
template <class V>
Field<V> partial(const Field<V>& f, int k) {
  if (k < 0 || k > 3) throw std::out_of_range("partial: direction must be in 0..3");
  const Grid& g = f.grid();
  Field<V> out(g);
  const double scale = 1.0 / (2.0 * g.h());
  parallel_for(g.sites(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s)
      out[s] = scale * (f[g.neighbor(s, k, +1)] - f[g.neighbor(s, k, -1)]);
  });
  return out;
}

/// (d_A xi)_k = partial_k xi + [A_k, xi].
OneFormField cov_d0(const OneFormField& A, const LieField& xi);
/// Exact transpose of xi -> cov_d0(A, xi).
LieField cov_d0_star(const OneFormField& A, const OneFormField& a);
/// Self-dual part of d_A a: G_kl = d_k a_l - d_l a_k + [A_k, a_l] - [A_l, a_k],
/// projected as G+_1 = (G12 + G34)/2, G+_2 = (G13 + G42)/2, G+_3 = (G14 + G23)/2.
SelfDualField cov_d_plus(const OneFormField& A, const OneFormField& a);
/// Self-dual part of the lattice curvature d_k A_l - d_l A_k + [A_k, A_l].
SelfDualField curvature_plus(const OneFormField& A);
/// Exact transpose of a -> cov_d_plus(A, a):
///   (d_A^* B)_l = 1/2 sum_k ( -partial_k B_{kl} + [B_{kl}, A_k] ).
OneFormField cov_dstar_sd(const OneFormField& A, const SelfDualField& B);

/// h^4 * sum over sites and components, reduced in a fixed pairwise order.
template <class V>
double inner(const Field<V>& x, const Field<V>& y) {
  x.check_same(y);
  const auto a = x.flat();
  const auto b = y.flat();
  std::vector<double> per_site(x.sites());
  parallel_for(x.sites(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      double acc = 0.0;
      for (int i = 0; i < V::size; ++i) acc += a[s * V::size + i] * b[s * V::size + i];
      per_site[s] = acc;
    }
  });
  const double h = x.grid().h();
  return h * h * h * h * pairwise_sum(per_site);
}

double inner(const Residual& x, const Residual& y);

template <class V>
double norm(const Field<V>& x) {
  return std::sqrt(inner(x, x));
}
double norm(const Residual& x);

/// Rotation of the Lie index by a constant R in SO(3).
void require_special_orthogonal(const Eigen::Matrix3d& R, double tol = 1e-12);
LieVec rotate(const Eigen::Matrix3d& R, const LieVec& x);
AdSelfDual rotate(const Eigen::Matrix3d& R, const AdSelfDual& B);
AdOneForm rotate(const Eigen::Matrix3d& R, const AdOneForm& phi);

template <class V>
Field<V> rotate(const Eigen::Matrix3d& R, const Field<V>& f) {
  Field<V> out(f.grid());
  for (std::size_t s = 0; s < f.sites(); ++s) out[s] = rotate(R, f[s]);
  return out;
}

Residual rotate(const Eigen::Matrix3d& R, const Residual& r);

}  // namespace vw
