#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "vwlab/oracle.hpp"
#include "vwlab/vwmap.hpp"

using namespace vw;

namespace {

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double max_abs(const Residual& r) { return std::max(max_abs(r.one_form.flat()), max_abs(r.sd_form.flat())); }

TauField identity_tau(const Grid& g) {
  TauMat I;
  for (int i = 0; i < 3; ++i) I(i, i) = 1.0;
  return TauField(g, I);
}

// Second evaluation path for eval_F: every term computed straight from neighbour
// lookups at a single site, without the field operators.
Residual eval_F_direct(const TauField& tau, const Configuration& cfg) {
  const Grid& g = cfg.grid();
  const double inv2h = 1.0 / (2.0 * g.h());
  Residual out(g);
  for (std::size_t s = 0; s < g.sites(); ++s) {
    auto Ak = [&](std::size_t site, int k) { return direction_component(cfg.A[site], k); };
    auto dA = [&](int k, int l) {  // partial_k A_l
      return inv2h * (Ak(g.neighbor(s, k, +1), l) - Ak(g.neighbor(s, k, -1), l));
    };
    // curvature F_kl and its self-dual part
    AdSelfDual Fp;
    for (int alpha = 0; alpha < 3; ++alpha)
      for (int k = 0; k < 4; ++k)
        for (int l = k + 1; l < 4; ++l) {
          const int w = omega(alpha, k, l);
          if (!w) continue;
          const LieVec Fkl = dA(k, l) - dA(l, k) + lie_bracket(Ak(s, k), Ak(s, l));
          for (int a = 0; a < 3; ++a) Fp(a, alpha) += 0.5 * w * Fkl[a];
        }
    // 1/8 [B.B] written out with the Levi-Civita symbol
    AdSelfDual BB;
    for (int al = 0; al < 3; ++al)
      for (int be = 0; be < 3; ++be)
        for (int ga = 0; ga < 3; ++ga) {
          const int e = levi_civita(al, be, ga);
          if (!e) continue;
          const LieVec t = lie_bracket(form_component(cfg.B[s], al), form_component(cfg.B[s], be));
          for (int a = 0; a < 3; ++a) BB(a, ga) += 2.0 * e * t[a];
        }
    AdSelfDual BC, tB;
    for (int al = 0; al < 3; ++al) {
      const LieVec t = lie_bracket(form_component(cfg.B[s], al), cfg.C[s]);
      for (int a = 0; a < 3; ++a) {
        BC(a, al) = t[a];
        for (int be = 0; be < 3; ++be) tB(a, al) += tau[s](al, be) * cfg.B[s](a, be);
      }
    }
    out.sd_form[s] = Fp + 0.125 * BB + 0.5 * BC + tB;

    // d_A^* B: 1/2 sum_k (-partial_k B_kl + [B_kl, A_k]);  d_A C = partial_k C + [A_k, C]
    for (int l = 0; l < 4; ++l) {
      LieVec acc;
      for (int k = 0; k < 4; ++k) {
        if (k == l) continue;
        acc -= inv2h * (two_form_entry(cfg.B[g.neighbor(s, k, +1)], k, l) -
                        two_form_entry(cfg.B[g.neighbor(s, k, -1)], k, l));
        acc += lie_bracket(two_form_entry(cfg.B[s], k, l), Ak(s, k));
      }
      const LieVec dC = inv2h * (cfg.C[g.neighbor(s, l, +1)] - cfg.C[g.neighbor(s, l, -1)]) +
                        lie_bracket(Ak(s, l), cfg.C[s]);
      const LieVec total = 0.5 * acc + dC;
      for (int a = 0; a < 3; ++a) out.one_form[s](l, a) = total[a];
    }
  }
  return out;
}

double rel_gap(double lhs, double rhs, double scale) {
  return std::abs(lhs - rhs) / std::max(scale, 1e-300);
}

}  // namespace

TEST_CASE("tau_apply") {
  Rng rng(1);
  const Grid g({3, 3, 3, 3}, 1.0);
  const SelfDualField B = random_field<AdSelfDual>(g, [&] { return random_sd(rng); });
  CHECK(tau_apply(identity_tau(g), B) == B);
  CHECK(tau_apply(TauField(g), B) == SelfDualField(g));

  TauMat d;
  d(0, 0) = 2;
  d(1, 1) = 3;
  d(2, 2) = 5;
  AdSelfDual b;
  b(0, 1) = 1.0;  // eta_1 (x) w_2
  const SelfDualField out = tau_apply(TauField(g, d), SelfDualField(g, b));
  CHECK(out[0] == 3.0 * b);
}

TEST_CASE("eval_F") {
  Rng rng(2);
  const Grid g({3, 4, 3, 5}, 0.6);
  const TauField tau = random_tau_field(g, rng);
  CHECK(max_abs(eval_F(tau, Configuration(g))) == 0.0);

  Configuration cfg = random_configuration(g, rng);
  Configuration noB(cfg.A, SelfDualField(g), cfg.C);
  const Residual r0 = eval_F(tau, noB);
  CHECK(r0.one_form == cov_d0(cfg.A, cfg.C));
  CHECK(r0.sd_form == curvature_plus(cfg.A));

  for (int trial = 0; trial < 5; ++trial) {
    const Configuration c = random_configuration(g, rng);
    const TauField t = random_tau_field(g, rng);
    CHECK(max_abs(eval_F(t, c) - eval_F_direct(t, c)) < 1e-13);
  }
  CHECK_THROWS_AS(eval_F(TauField(Grid({3, 3, 3, 3}, 0.6)), cfg), GridMismatch);
}

TEST_CASE("apply_dF is the derivative of eval_F") {
  Rng rng(3);
  for (const auto& dims : {std::array<int, 4>{3, 3, 3, 3}, std::array<int, 4>{4, 3, 5, 3}}) {
    const Grid g(dims, 0.7);
    for (int trial = 0; trial < 5; ++trial) {
      const TauField tau = random_tau_field(g, rng);
      const Configuration cfg = random_configuration(g, rng);
      const TangentVec v = random_tangent(g, rng, true);

      auto F = [&](std::span<const double> x) {
        auto [t, c] = unflatten_point(g, x);
        return flatten(eval_F(t, c));
      };
      const auto fd = fd_directional(F, flatten(tau, cfg), flatten(v), 0.5);
      const auto exact = flatten(apply_dF(tau, cfg, v));
      double diff = 0.0;
      for (std::size_t i = 0; i < fd.size(); ++i) diff = std::max(diff, std::abs(fd[i] - exact[i]));
      CHECK(diff <= 1e-9 * max_abs(exact));
    }
  }
}

TEST_CASE("apply_dF special cases") {
  Rng rng(4);
  const Grid g({3, 3, 3, 3}, 1.0);
  const TauField tau = random_tau_field(g, rng);
  const Configuration cfg = random_configuration(g, rng);
  CHECK(max_abs(apply_dF(tau, cfg, TangentVec(g))) == 0.0);

  const TangentVec v = random_tangent(g, rng, false);
  const Residual flat = apply_dF(TauField(g), Configuration(g), v);
  CHECK(flat.one_form == cov_dstar_sd(OneFormField(g), v.b) + cov_d0(OneFormField(g), v.c));
  CHECK(flat.sd_form == cov_d_plus(OneFormField(g), v.a));
}

TEST_CASE("apply_d0") {
  Rng rng(5);
  const Grid g({3, 3, 3, 3}, 1.0);
  const Configuration cfg = random_configuration(g, rng);
  const TangentVec zero = apply_d0(cfg, LieField(g));
  CHECK(max_abs(zero.a.flat()) == 0.0);
  CHECK(max_abs(zero.b.flat()) == 0.0);
  CHECK(max_abs(zero.c.flat()) == 0.0);
  CHECK_FALSE(zero.dtau.has_value());

  const TangentVec flat = apply_d0(Configuration(g), LieField(g, LieVec{{1, 2, 3}}));
  CHECK(max_abs(flat.a.flat()) == 0.0);

  Configuration single(g);
  AdSelfDual B;
  B(0, 0) = 1.0;
  single.B = SelfDualField(g, B);
  const TangentVec r = apply_d0(single, LieField(g, LieVec{{0, 1, 0}}));
  AdSelfDual expect;
  expect(2, 0) = 2.0;
  CHECK(r.b[5] == expect);
}

TEST_CASE("adjoint identities") {
  Rng rng(6);
  for (const auto& dims : {std::array<int, 4>{3, 3, 3, 3}, std::array<int, 4>{5, 5, 5, 5}}) {
    const Grid g(dims, 0.4);
    for (int trial = 0; trial < 3; ++trial) {
      const TauField tau = random_tau_field(g, rng);
      const Configuration cfg = random_configuration(g, rng);
      const LieField xi = random_lie_field(g, rng);
      const TangentVec v = random_tangent(g, rng, true);
      const Residual w = random_residual(g, rng);

      const TangentVec d0 = apply_d0(cfg, xi);
      const double l0 = inner(d0, v);
      const double r0 = inner(xi, apply_d0_star(cfg, v));
      CHECK(rel_gap(l0, r0, std::sqrt(inner(d0, d0) * inner(v, v))) <= 1e-12);

      const Residual dF = apply_dF(tau, cfg, v);
      const TangentVec dFs = apply_dF_star(tau, cfg, w);
      const double l1 = inner(dF, w);
      const double r1 = inner(v, dFs);
      CHECK(rel_gap(l1, r1, norm(dF) * norm(w)) <= 1e-12);
    }
  }
}

TEST_CASE("apply_dF_star pointwise parts") {
  Rng rng(7);
  const Grid g({3, 3, 3, 3}, 1.0);
  SUBCASE("zero input") {
    const TangentVec out = apply_dF_star(random_tau_field(g, rng), random_configuration(g, rng), Residual(g));
    CHECK(max_abs(out.a.flat()) == 0.0);
    CHECK(max_abs(out.dtau->flat()) == 0.0);
  }
  SUBCASE("tau block is tau^t psi, bit for bit") {
    const TauField tau = random_tau_field(g, rng);
    Configuration cfg(g);
    cfg.A = random_field<AdOneForm>(g, [&] { return random_one_form(rng); });
    Residual w(g);
    w.sd_form = random_field<AdSelfDual>(g, [&] { return random_sd(rng); });
    const TangentVec out = apply_dF_star(tau, cfg, w);
    CHECK(out.b == tau_transpose_apply(tau, w.sd_form));
  }
  SUBCASE("rank-3 constant B gives a nonzero dtau block") {
    Configuration cfg(g);
    cfg.B = SelfDualField(g, random_sd_of_rank(rng, 3));
    Residual w(g);
    w.sd_form = SelfDualField(g, random_sd(rng));
    const TangentVec out = apply_dF_star(TauField(g), cfg, w);
    CHECK(max_abs(out.dtau->flat()) > 0.1 * max_abs(w.sd_form.flat()) * 0.1);
  }
  SUBCASE("bracket terms against the adjoint system") {
    // Constant fields remove every difference term, leaving the algebraic part.
    const TauMat tau = random_tau(rng);
    const AdSelfDual B = random_sd(rng), psi = random_sd(rng);
    const LieVec C = random_lievec(rng);
    const AdOneForm phi = random_one_form(rng);
    Configuration cfg(g);
    cfg.B = SelfDualField(g, B);
    cfg.C = LieField(g, C);
    Residual w(g);
    w.one_form = OneFormField(g, phi);
    w.sd_form = SelfDualField(g, psi);
    const TangentVec out = apply_dF_star(TauField(g, tau), cfg, w);
    const auto p = pointwise_adjoint(tau, B, C, phi, psi);
    CHECK(out.a[0] == p.a);
    CHECK(out.b[0] == p.b);
    CHECK(out.c[0] == p.c);

    // -[phi, C] appears with the displayed sign; [phi . B] enters as +1/2 [B . phi].
    CHECK(max_abs((one_bracket(C, phi) - (-1.0) * one_bracket(C, phi) * -1.0).v) == 0.0);
    const AdOneForm phi_C = -1.0 * one_bracket(C, phi);  // [phi, C]
    CHECK(max_abs((p.a - 0.5 * sd_dot_one(B, phi) + phi_C).v) < 1e-14);
    // 1/4 [psi . B] - 1/2 [psi, C] + tau^t psi: matches the displayed second equation.
    CHECK(max_abs((p.b - 0.25 * sd_dot_sd(psi, B) + 0.5 * sd_bracket(psi, C) -
                   tau_transpose_apply(TauField(g, tau), SelfDualField(g, psi))[0]).v) < 1e-14);
    // 1/2 [psi . B] into the Lie algebra: matches the displayed third equation.
    CHECK(max_abs((p.c - 0.5 * sd_pair_to_g(psi, B)).v) == 0.0);
  }
}

TEST_CASE("dtau block pairs with (dtau) B") {
  Rng rng(8);
  const Grid g({3, 3, 3, 3}, 0.8);
  const Configuration cfg = random_configuration(g, rng);
  const Residual w = random_residual(g, rng);
  const TangentVec out = apply_dF_star(TauField(g), cfg, w);
  for (int trial = 0; trial < 5; ++trial) {
    const TauField dt = random_tau_field(g, rng);
    const double lhs = inner(tau_apply(dt, cfg.B), w.sd_form);
    const double rhs = inner(dt, *out.dtau);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("constant gauge rotations") {
  Rng rng(9);
  const Grid g({3, 3, 3, 3}, 0.5);
  const Configuration cfg = random_configuration(g, rng);
  const TauField tau = random_tau_field(g, rng);
  CHECK(constant_gauge_rotate(Eigen::Matrix3d::Identity(), cfg).B == cfg.B);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Matrix3d R = random_rotation(rng);
    const Configuration back = constant_gauge_rotate(R.transpose(), constant_gauge_rotate(R, cfg));
    CHECK(max_abs((back.A - cfg.A).flat()) < 1e-14);
    const Residual lhs = eval_F(tau, constant_gauge_rotate(R, cfg));
    const Residual rhs = rotate(R, eval_F(tau, cfg));
    CHECK(max_abs(lhs - rhs) <= 1e-12 * max_abs(rhs));
  }
  CHECK_THROWS_AS(constant_gauge_rotate(2.0 * Eigen::Matrix3d::Identity(), cfg), std::invalid_argument);
}

TEST_CASE("gauge compatibility at the flat configuration") {
  Rng rng(10);
  const Grid g({3, 4, 3, 5}, 0.5);
  LieField xi(g);
  for (std::size_t s = 0; s < g.sites(); ++s)
    for (int a = 0; a < 3; ++a) xi[s][a] = static_cast<double>(rng.integer(-4096, 4096)) / 4096.0;
  const Residual r = apply_dF(random_tau_field(g, rng), Configuration(g), apply_d0(Configuration(g), xi));
  CHECK(max_abs(r) == 0.0);
}

TEST_CASE("deformation operator") {
  Rng rng(11);
  for (int n : {3, 4, 5}) {
    const Grid g({n, n, n, n}, 1.0);
    const auto D = assemble_D(TauField(g), Configuration(g));
    CHECK(D.rows() == D.cols());
    CHECK(D.rows() == 24 * g.sites());
  }
  const Grid g({3, 3, 3, 3}, 0.9);
  CHECK(assemble_D(TauField(g), Configuration(g)).rows() == 1944);

  const TauField tau = random_tau_field(g, rng);
  const Configuration cfg = random_configuration(g, rng);
  const auto D = assemble_D(tau, cfg);
  const Eigen::SparseMatrix<double> M = D.materialize();
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd x(D.cols()), y(D.rows());
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (auto& v : y) v = rng.uniform(-1, 1);
    CHECK((M * x - D.apply(x)).norm() <= 1e-12 * (M * x).norm());
    CHECK((M.transpose() * y - D.apply_transpose(y)).norm() <= 1e-12 * (M.transpose() * y).norm());
    CHECK(std::abs(y.dot(D.apply(x)) - x.dot(D.apply_transpose(y))) <= 1e-12 * (D.apply(x).norm() * y.norm()));
  }
  CHECK_THROWS_AS(D.materialize(100), ResourceError);

  // Flat point: D = (d^* b + d c, d+ a, d^* a), no zeroth-order terms.
  const auto D0 = assemble_D(TauField(g), Configuration(g));
  Eigen::VectorXd x(D0.cols());
  for (auto& v : x) v = rng.uniform(-1, 1);
  const TangentVec v = D0.unpack_domain(x);
  const OneFormField zero(g);
  const Eigen::VectorXd expect = D0.pack_codomain(
      Residual(cov_dstar_sd(zero, v.b) + cov_d0(zero, v.c), cov_d_plus(zero, v.a)), cov_d0_star(zero, v.a));
  CHECK(D0.apply(x) == expect);
}
