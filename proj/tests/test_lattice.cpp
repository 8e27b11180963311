#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "vwlab/lattice.hpp"
#include "vwlab/oracle.hpp"

using namespace vw;

namespace {

template <class V>
double max_abs(const Field<V>& f) {
  double m = 0.0;
  for (double v : f.flat()) m = std::max(m, std::abs(v));
  return m;
}

// Cyclic shift by one site in direction k.
template <class V>
Field<V> shift(const Field<V>& f, int k) {
  Field<V> out(f.grid());
  for (std::size_t s = 0; s < f.sites(); ++s) out[f.grid().neighbor(s, k, +1)] = f[s];
  return out;
}

}  // namespace

TEST_CASE("grid indexing and validation") {
  const Grid g({3, 4, 5, 6}, 0.5);
  CHECK(g.sites() == 360);
  CHECK(g.index({1, 2, 3, 4}) == ((1 * 4 + 2) * 5 + 3) * 6 + 4);
  for (std::size_t s = 0; s < g.sites(); ++s) {
    CHECK(g.index(g.coord(s)) == s);
    for (int k = 0; k < 4; ++k) CHECK(g.neighbor(g.neighbor(s, k, +1), k, -1) == s);
  }
  CHECK(g.coord(g.neighbor(g.index({2, 0, 0, 0}), 0, +1))[0] == 0);
  CHECK_THROWS_AS(Grid({2, 3, 3, 3}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid({3, 3, 3, 3}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid({4096, 4096, 4096, 4096}, 1.0), std::invalid_argument);
}

TEST_CASE("partial: constants, commutation, second-order accuracy") {
  Rng rng(1);
  const Grid g({5, 5, 5, 5}, 0.3);
  CHECK(max_abs(partial(LieField(g, LieVec{{1, 2, 3}}), 2)) == 0.0);

  const LieField f = random_lie_field(g, rng);
  CHECK(max_abs(partial(partial(f, 0), 1) - partial(partial(f, 1), 0)) < 1e-13);
  CHECK_THROWS_AS(partial(f, 4), std::out_of_range);

  // sin(2 pi i1 / n1): error against (2 pi / (n1 h)) cos(.) falls like h^2.
  auto error_at = [](int n) {
    const Grid gn({n, 3, 3, 3}, 1.0 / n);
    LieField s(gn);
    for (std::size_t site = 0; site < gn.sites(); ++site)
      s[site][0] = std::sin(2 * std::numbers::pi * gn.coord(site)[0] / n);
    const LieField d = partial(s, 0);
    double err = 0.0;
    for (std::size_t site = 0; site < gn.sites(); ++site) {
      const double exact = 2 * std::numbers::pi * std::cos(2 * std::numbers::pi * gn.coord(site)[0] / n);
      err = std::max(err, std::abs(d[site][0] - exact));
    }
    return err;
  };
  const double rate = std::log2(error_at(16) / error_at(32));
  CHECK(rate == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("cov_d0") {
  Rng rng(2);
  const Grid g({3, 3, 3, 3}, 1.0);
  const LieVec xi0{{0.3, -1.2, 0.7}};
  CHECK(max_abs(cov_d0(OneFormField(g), LieField(g, xi0))) == 0.0);

  const AdOneForm A0 = random_one_form(rng);
  const OneFormField d = cov_d0(OneFormField(g, A0), LieField(g, xi0));
  for (std::size_t s = 0; s < g.sites(); ++s)
    for (int k = 0; k < 4; ++k) {
      const LieVec expect = lie_bracket(direction_component(A0, k), xi0);
      for (int a = 0; a < 3; ++a) CHECK(d[s](k, a) == expect[a]);
    }

  const OneFormField A = random_field<AdOneForm>(g, [&] { return random_one_form(rng); });
  const LieField x = random_lie_field(g, rng), y = random_lie_field(g, rng);
  CHECK(max_abs(cov_d0(A, x + y) - cov_d0(A, x) - cov_d0(A, y)) < 1e-14);
  CHECK_THROWS_AS(cov_d0(A, LieField(Grid({3, 3, 3, 4}, 1.0))), GridMismatch);
}

TEST_CASE("cov_d_plus: d+ d = 0 and a hand-evaluated component") {
  Rng rng(3);
  const Grid g({4, 3, 5, 3}, 0.25);
  // Dyadic values keep every intermediate exact.
  LieField xi(g);
  for (std::size_t s = 0; s < g.sites(); ++s)
    for (int a = 0; a < 3; ++a) xi[s][a] = static_cast<double>(rng.integer(-1024, 1024)) / 1024.0;
  const OneFormField zero(g);
  CHECK(max_abs(cov_d_plus(zero, cov_d0(zero, xi))) == 0.0);
  CHECK(max_abs(cov_d_plus(zero, cov_d0(zero, random_lie_field(g, rng)))) < 1e-12);

  // a_2 = f(x1) eta_1 only: G_12 = d_1 f eta_1 is the sole nonzero entry, and G_12
  // enters w1 alone (w2 pairs G_13 with G_42).
  const Grid g1({5, 3, 3, 3}, 0.5);
  OneFormField a(g1);
  auto f = [](int i) { return 0.1 * i * i; };
  for (std::size_t s = 0; s < g1.sites(); ++s) a[s](1, 0) = f(g1.coord(s)[0]);
  const SelfDualField G = cov_d_plus(OneFormField(g1), a);
  for (std::size_t s = 0; s < g1.sites(); ++s) {
    const int i = g1.coord(s)[0];
    const double d1f = (f((i + 1) % 5) - f((i + 4) % 5)) / (2 * 0.5);
    CHECK(G[s](0, 0) == doctest::Approx(0.5 * d1f));
    for (int alpha = 1; alpha < 3; ++alpha) CHECK(G[s](0, alpha) == 0.0);
    CHECK(G[s](1, 0) == 0.0);
    CHECK(G[s](2, 0) == 0.0);
  }
}

TEST_CASE("curvature_plus") {
  const Grid g({3, 3, 3, 3}, 1.0);
  CHECK(max_abs(curvature_plus(OneFormField(g))) == 0.0);

  AdOneForm A0;
  A0(0, 0) = 1.0;  // A_1 = eta_1
  A0(1, 1) = 1.0;  // A_2 = eta_2
  const SelfDualField F = curvature_plus(OneFormField(g, A0));
  AdSelfDual expect;
  expect(2, 0) = 1.0;  // F_12 = 2 eta_3, projected with 1/2 onto w1
  for (std::size_t s = 0; s < g.sites(); ++s) CHECK(F[s] == expect);

  Rng rng(4);
  const Grid g5({5, 5, 5, 5}, 0.7);
  const OneFormField A = random_field<AdOneForm>(g5, [&] { return random_one_form(rng); });
  const OneFormField a = random_field<AdOneForm>(g5, [&] { return random_one_form(rng); });
  const double t = 0.5;
  SelfDualField fd = curvature_plus(A + t * a) - curvature_plus(A - t * a);
  fd *= 1.0 / (2 * t);
  CHECK(max_abs(fd - cov_d_plus(A, a)) < 1e-12);
}

TEST_CASE("transposes of the difference operators") {
  Rng rng(5);
  for (const auto& dims : {std::array<int, 4>{3, 3, 3, 3}, std::array<int, 4>{5, 4, 3, 5}}) {
    const Grid g(dims, 0.8);
    for (int trial = 0; trial < 10; ++trial) {
      const OneFormField A = random_field<AdOneForm>(g, [&] { return random_one_form(rng); });
      const OneFormField a = random_field<AdOneForm>(g, [&] { return random_one_form(rng); });
      const SelfDualField B = random_field<AdSelfDual>(g, [&] { return random_sd(rng); });
      const LieField xi = random_lie_field(g, rng);

      const double l1 = inner(cov_d_plus(A, a), B), r1 = inner(a, cov_dstar_sd(A, B));
      CHECK(std::abs(l1 - r1) <= 1e-12 * (std::abs(l1) + norm(cov_d_plus(A, a)) * norm(B)));
      const double l2 = inner(cov_d0(A, xi), a), r2 = inner(xi, cov_d0_star(A, a));
      CHECK(std::abs(l2 - r2) <= 1e-12 * (std::abs(l2) + norm(cov_d0(A, xi)) * norm(a)));
    }
  }
}

TEST_CASE("cov_dstar_sd at A = 0 is the divergence stencil") {
  Rng rng(6);
  const Grid g({3, 4, 3, 5}, 0.5);
  const SelfDualField B = random_field<AdSelfDual>(g, [&] { return random_sd(rng); });
  const OneFormField out = cov_dstar_sd(OneFormField(g), B);
  // (d^* B)_l = -1/2 sum_k sum_alpha w_alpha(k,l) partial_k B_alpha
  std::array<SelfDualField, 4> dB{partial(B, 0), partial(B, 1), partial(B, 2), partial(B, 3)};
  for (std::size_t s = 0; s < g.sites(); ++s)
    for (int l = 0; l < 4; ++l)
      for (int a = 0; a < 3; ++a) {
        double expect = 0.0;
        for (int k = 0; k < 4; ++k)
          for (int alpha = 0; alpha < 3; ++alpha) expect -= 0.5 * omega(alpha, k, l) * dB[k][s](a, alpha);
        CHECK(out[s](l, a) == doctest::Approx(expect).epsilon(1e-13));
      }
  CHECK(max_abs(cov_dstar_sd(OneFormField(g), SelfDualField(g))) == 0.0);
  CHECK(max_abs(cov_dstar_sd(OneFormField(g), SelfDualField(g, random_sd(rng)))) == 0.0);
}

TEST_CASE("inner product") {
  const Grid g({3, 3, 3, 3}, 1.0);
  LieField x(g);
  x[17][1] = 1.0;
  CHECK(inner(x, x) == 1.0);
  CHECK(inner(LieField(g), LieField(g)) == 0.0);

  Rng rng(7);
  const Grid g2({3, 3, 3, 3}, 0.5);
  const LieField y = random_lie_field(g2, rng), z = random_lie_field(g2, rng);
  CHECK(inner(y, y) > 0.0);
  CHECK(inner(2.0 * y, z) == 2.0 * inner(y, z));
  CHECK(inner(y, z) == inner(z, y));

  const double before = inner(y, z);
  set_threads(3);
  CHECK(inner(y, z) == before);
  set_threads(1);
  CHECK_THROWS_AS(inner(y, LieField(g)), GridMismatch);
}

TEST_CASE("operators commute with cyclic shifts") {
  Rng rng(8);
  const Grid g({3, 4, 5, 3}, 0.9);
  const OneFormField A = random_field<AdOneForm>(g, [&] { return random_one_form(rng); });
  const OneFormField a = random_field<AdOneForm>(g, [&] { return random_one_form(rng); });
  const SelfDualField B = random_field<AdSelfDual>(g, [&] { return random_sd(rng); });
  const LieField xi = random_lie_field(g, rng);
  for (int k = 0; k < 4; ++k) {
    CHECK(cov_d0(shift(A, k), shift(xi, k)) == shift(cov_d0(A, xi), k));
    CHECK(cov_d_plus(shift(A, k), shift(a, k)) == shift(cov_d_plus(A, a), k));
    CHECK(curvature_plus(shift(A, k)) == shift(curvature_plus(A), k));
    CHECK(cov_dstar_sd(shift(A, k), shift(B, k)) == shift(cov_dstar_sd(A, B), k));
    CHECK(cov_d0_star(shift(A, k), shift(a, k)) == shift(cov_d0_star(A, a), k));
  }
}

TEST_CASE("rotations") {
  Rng rng(9);
  const Eigen::Matrix3d R = random_rotation(rng);
  CHECK_NOTHROW(require_special_orthogonal(R));
  CHECK_THROWS_AS(require_special_orthogonal(-R), std::invalid_argument);
  CHECK_THROWS_AS(require_special_orthogonal(2.0 * R), std::invalid_argument);
  const LieVec x = random_lievec(rng), y = random_lievec(rng);
  const LieVec lhs = rotate(R, lie_bracket(x, y));
  const LieVec rhs = lie_bracket(rotate(R, x), rotate(R, y));
  for (int a = 0; a < 3; ++a) CHECK(lhs[a] == doctest::Approx(rhs[a]).epsilon(1e-14));
}
