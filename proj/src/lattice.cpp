#include "vwlab/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace vw {

namespace {

std::atomic<int> g_threads{1};

// Pairs (k, l), k < l, and the sign of (w_alpha)_{kl}; two per alpha.
struct Plane {
  int k, l, sign;
};
constexpr Plane kPlanes[3][2] = {
    {{0, 1, +1}, {2, 3, +1}},
    {{0, 2, +1}, {1, 3, -1}},
    {{0, 3, +1}, {1, 2, +1}},
};

LieVec row(const AdOneForm& a, int k) { return direction_component(a, k); }

void add_row(AdOneForm& out, int l, const LieVec& x) {
  for (int c = 0; c < 3; ++c) out(l, c) += x[c];
}

// Self-dual projection of an antisymmetric Lie-valued 2-form given by G(k, l), k < l.
template <class G>
AdSelfDual project_plus(const G& entry) {
  AdSelfDual out;
  for (int alpha = 0; alpha < 3; ++alpha) {
    LieVec sum;
    for (const auto& p : kPlanes[alpha]) {
      const LieVec g = entry(p.k, p.l);
      if (p.sign > 0)
        sum += g;
      else
        sum -= g;
    }
    for (int a = 0; a < 3; ++a) out(a, alpha) = 0.5 * sum[a];
  }
  return out;
}

}  // namespace

Grid::Grid(std::array<int, 4> dims, double h) : dims_(dims), h_(h), sites_(1) {
  for (int n : dims_) {
    if (n < 3) throw std::invalid_argument("grid: every dimension must be >= 3");
    if (static_cast<std::size_t>(n) > kMaxSites / sites_) throw std::invalid_argument("grid: too many sites");
    sites_ *= static_cast<std::size_t>(n);
  }
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid: h must be positive");
  std::vector<std::size_t> plus(4 * sites_), minus(4 * sites_);
  for (std::size_t s = 0; s < sites_; ++s) {
    const auto c = coord(s);
    for (int k = 0; k < 4; ++k) {
      auto up = c, down = c;
      up[k] = (c[k] + 1) % dims_[k];
      down[k] = (c[k] + dims_[k] - 1) % dims_[k];
      plus[4 * s + k] = index(up);
      minus[4 * s + k] = index(down);
    }
  }
  plus_ = std::make_shared<const std::vector<std::size_t>>(std::move(plus));
  minus_ = std::make_shared<const std::vector<std::size_t>>(std::move(minus));
}

std::size_t Grid::index(const std::array<int, 4>& c) const {
  std::size_t s = 0;
  for (int k = 0; k < 4; ++k) s = s * static_cast<std::size_t>(dims_[k]) + static_cast<std::size_t>(c[k]);
  return s;
}

std::array<int, 4> Grid::coord(std::size_t site) const {
  std::array<int, 4> c{};
  for (int k = 3; k >= 0; --k) {
    c[k] = static_cast<int>(site % static_cast<std::size_t>(dims_[k]));
    site /= static_cast<std::size_t>(dims_[k]);
  }
  return c;
}

void set_threads(int n) { g_threads = std::max(1, n); }
int threads() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::min<int>(g_threads, static_cast<int>(std::max<std::size_t>(n / 64, 1))));
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Residual::Residual(OneFormField one, SelfDualField sd) : one_form(std::move(one)), sd_form(std::move(sd)) {
  if (!(one_form.grid() == sd_form.grid())) throw GridMismatch("residual components on different grids");
}

Residual& Residual::operator+=(const Residual& o) {
  one_form += o.one_form;
  sd_form += o.sd_form;
  return *this;
}

Residual& Residual::operator-=(const Residual& o) {
  one_form -= o.one_form;
  sd_form -= o.sd_form;
  return *this;
}

Residual& Residual::operator*=(double c) {
  one_form *= c;
  sd_form *= c;
  return *this;
}

double inner(const Residual& x, const Residual& y) {
  return inner(x.one_form, y.one_form) + inner(x.sd_form, y.sd_form);
}

double norm(const Residual& x) { return std::sqrt(inner(x, x)); }

OneFormField cov_d0(const OneFormField& A, const LieField& xi) {
  require_same_grid(xi, A.grid());
  const Grid& g = A.grid();
  const double scale = 1.0 / (2.0 * g.h());
  OneFormField out(g);
  parallel_for(g.sites(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      AdOneForm v;
      for (int k = 0; k < 4; ++k) {
        const LieVec d = scale * (xi[g.neighbor(s, k, +1)] - xi[g.neighbor(s, k, -1)]);
        add_row(v, k, d + lie_bracket(row(A[s], k), xi[s]));
      }
      out[s] = v;
    }
  });
  return out;
}

LieField cov_d0_star(const OneFormField& A, const OneFormField& a) {
  require_same_grid(a, A.grid());
  const Grid& g = A.grid();
  const double scale = 1.0 / (2.0 * g.h());
  LieField out(g);
  parallel_for(g.sites(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      LieVec v;
      for (int k = 0; k < 4; ++k) {
        v -= scale * (row(a[g.neighbor(s, k, +1)], k) - row(a[g.neighbor(s, k, -1)], k));
        v += lie_bracket(row(a[s], k), row(A[s], k));
      }
      out[s] = v;
    }
  });
  return out;
}

SelfDualField cov_d_plus(const OneFormField& A, const OneFormField& a) {
  require_same_grid(a, A.grid());
  const Grid& g = A.grid();
  const double scale = 1.0 / (2.0 * g.h());
  SelfDualField out(g);
  parallel_for(g.sites(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      auto d = [&](int k, int l) {  // partial_k a_l
        return scale * (row(a[g.neighbor(s, k, +1)], l) - row(a[g.neighbor(s, k, -1)], l));
      };
      out[s] = project_plus([&](int k, int l) {
        return d(k, l) - d(l, k) + lie_bracket(row(A[s], k), row(a[s], l)) -
               lie_bracket(row(A[s], l), row(a[s], k));
      });
    }
  });
  return out;
}

SelfDualField curvature_plus(const OneFormField& A) {
  const Grid& g = A.grid();
  const double scale = 1.0 / (2.0 * g.h());
  SelfDualField out(g);
  parallel_for(g.sites(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      auto d = [&](int k, int l) {
        return scale * (row(A[g.neighbor(s, k, +1)], l) - row(A[g.neighbor(s, k, -1)], l));
      };
      out[s] = project_plus([&](int k, int l) {
        return d(k, l) - d(l, k) + lie_bracket(row(A[s], k), row(A[s], l));
      });
    }
  });
  return out;
}

OneFormField cov_dstar_sd(const OneFormField& A, const SelfDualField& B) {
  require_same_grid(B, A.grid());
  const Grid& g = A.grid();
  const double scale = 1.0 / (2.0 * g.h());
  OneFormField out(g);
  parallel_for(g.sites(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      AdOneForm v;
      for (int l = 0; l < 4; ++l) {
        LieVec acc;
        for (int k = 0; k < 4; ++k) {
          if (k == l) continue;
          const LieVec diff = two_form_entry(B[g.neighbor(s, k, +1)], k, l) -
                              two_form_entry(B[g.neighbor(s, k, -1)], k, l);
          acc -= scale * diff;
          acc += lie_bracket(two_form_entry(B[s], k, l), row(A[s], k));
        }
        add_row(v, l, 0.5 * acc);
      }
      out[s] = v;
    }
  });
  return out;
}

void require_special_orthogonal(const Eigen::Matrix3d& R, double tol) {
  const double orth = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(orth <= tol) || !(std::abs(R.determinant() - 1.0) <= tol))
    throw std::invalid_argument("rotation is not special orthogonal");
}

LieVec rotate(const Eigen::Matrix3d& R, const LieVec& x) {
  LieVec out;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) out[a] += R(a, b) * x[b];
  return out;
}

AdSelfDual rotate(const Eigen::Matrix3d& R, const AdSelfDual& B) {
  AdSelfDual out;
  for (int alpha = 0; alpha < 3; ++alpha) {
    const auto r = rotate(R, form_component(B, alpha));
    for (int a = 0; a < 3; ++a) out(a, alpha) = r[a];
  }
  return out;
}

AdOneForm rotate(const Eigen::Matrix3d& R, const AdOneForm& phi) {
  AdOneForm out;
  for (int k = 0; k < 4; ++k) {
    const auto r = rotate(R, row(phi, k));
    for (int a = 0; a < 3; ++a) out(k, a) = r[a];
  }
  return out;
}

Residual rotate(const Eigen::Matrix3d& R, const Residual& r) {
  return Residual(rotate(R, r.one_form), rotate(R, r.sd_form));
}

}  // namespace vw
