#include "vwlab/suites.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "vwlab/oracle.hpp"
#include "vwlab/vwmap.hpp"

namespace vw {

namespace {

using nlohmann::json;

class Recorder {
 public:
  Recorder(const char* suite, const LineSink& sink) : suite_(suite), sink_(sink) {}

  void check(bool ok, const char* name, json detail) {
    ++report_.checks;
    if (ok) return;
    detail["suite"] = suite_;
    detail["check"] = name;
    report_.failures.push_back(detail.dump());
    if (sink_) sink_(report_.failures.back());
  }

  SuiteReport take() { return std::move(report_); }

 private:
  const char* suite_;
  const LineSink& sink_;
  SuiteReport report_;
};

std::string str(const Rational& q) { return q.get_str(); }

json tuple_json(const RationalTuple& t) {
  return {{"B", {str(t.B1), str(t.B2), str(t.B3)}}, {"C", {str(t.C1), str(t.C2), str(t.C3)}}};
}

RationalMat12 lbc_of(const RationalTuple& t) {
  return assemble_lbc(diagonal_sd<Rational>(t.B1, t.B2, t.B3), BasicLieVec<Rational>{{t.C1, t.C2, t.C3}});
}

// The closed form vanishes exactly when two B's vanish or some B_i = C_i = 0.
bool degenerate(const RationalTuple& t) {
  const int zero_b = (t.B1 == 0) + (t.B2 == 0) + (t.B3 == 0);
  return zero_b >= 2 || (t.B1 == 0 && t.C1 == 0) || (t.B2 == 0 && t.C2 == 0) || (t.B3 == 0 && t.C3 == 0);
}

double rel_gap(double a, double b, double scale) { return std::abs(a - b) / std::max(scale, 1e-300); }

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

bool all_zero(const Residual& r) {
  return max_abs(r.one_form.flat()) == 0.0 && max_abs(r.sd_form.flat()) == 0.0;
}

LieField dyadic_lie_field(const Grid& g, Rng& rng) {
  LieField xi(g);
  for (std::size_t s = 0; s < g.sites(); ++s)
    for (int a = 0; a < 3; ++a) xi[s][a] = static_cast<double>(rng.integer(-1024, 1024)) / 1024.0;
  return xi;
}

}  // namespace

SuiteReport run_lemma_suite(const LemmaSuiteOptions& opts, const LineSink& on_failure) {
  if (opts.samples < 1) throw std::invalid_argument("verify-lemma: samples must be at least 1");
  if (!opts.fault.empty() && opts.fault != "det-formula")
    throw std::invalid_argument("verify-lemma: unknown fault '" + opts.fault + "'");
  const bool perturb = opts.fault == "det-formula";
  Recorder rec("lemma", on_failure);
  const Rng root(opts.seed);

  Rng rng = root.split(1);
  for (int i = 0; i < opts.samples; ++i) {
    const RationalTuple t = random_rational_tuple(rng);
    Rational formula = det_lbc_formula(t.B1, t.B2, t.B3, t.C1, t.C2, t.C3);
    if (perturb) formula += 1 + formula / 1000;
    json detail = tuple_json(t);
    detail["sample"] = i;
    detail["formula"] = str(formula);
    if (opts.exact) {
      const Rational det = exact_det12(lbc_of(t));
      detail["det"] = str(det);
      rec.check(det == formula, "det_identity", detail);
    } else {
      Mat12 M;
      const RationalMat12 Q = lbc_of(t);
      for (int r = 0; r < 12; ++r)
        for (int c = 0; c < 12; ++c) M[r][c] = Q[r][c].get_d();
      const double det = float_det12(M), f = formula.get_d();
      detail["det"] = det;
      rec.check(rel_gap(det, f, std::abs(f)) <= 1e-8 || (f == 0.0 && std::abs(det) <= 1e-8), "det_identity", detail);
    }
  }

  rng = root.split(2);
  for (int i = 0; i < opts.samples; ++i) {
    RationalTuple t = random_rational_tuple(rng);
    for (Rational* q : {&t.B1, &t.B2, &t.B3, &t.C1, &t.C2, &t.C3})
      if (rng.integer(0, 2) == 0) *q = 0;
    const RationalMat12 L = lbc_of(t);
    const bool zero_det = exact_det12(L) == 0;
    json detail = tuple_json(t);
    detail["sample"] = i;
    detail["zero_det"] = zero_det;
    rec.check(zero_det == degenerate(t), "kernel_classification", detail);
    const auto v = exact_null_vector(L);
    rec.check(v.has_value() == zero_det, "kernel_vector_exists", detail);
    if (v) {
      bool null = true;
      for (int r = 0; r < 12; ++r) {
        Rational acc = 0;
        for (int c = 0; c < 12; ++c) acc += L[r][c] * (*v)[c];
        null = null && acc == 0;
      }
      rec.check(null, "kernel_vector_exact", detail);
    }
  }

  rng = root.split(3);
  for (int i = 0; i < opts.samples; ++i) {
    const AdSelfDual B = random_sd(rng, 2.0);
    const LieVec C = random_lievec(rng, 2.0);
    const SignedSvd r = signed_svd3(to_matrix(B));
    const Eigen::Vector3d Cr = r.U.transpose() * Eigen::Vector3d(C[0], C[1], C[2]);
    const double lhs = std::abs(float_det12(assemble_lbc(B, C)));
    double rhs = det_lbc_formula(r.D(0), r.D(1), r.D(2), Cr(0), Cr(1), Cr(2));
    if (perturb) rhs += 1.0 + rhs / 1000.0;
    rec.check(rel_gap(lhs, rhs, std::abs(rhs)) <= 1e-8, "basis_change",
              {{"sample", i}, {"det", lhs}, {"formula", rhs}});
  }
  return rec.take();
}

SuiteReport run_ops_suite(const OpsSuiteOptions& opts, const LineSink& on_failure) {
  if (opts.trials < 1) throw std::invalid_argument("check-ops: trials must be at least 1");
  if (!opts.fault.empty() && opts.fault != "transpose")
    throw std::invalid_argument("check-ops: unknown fault '" + opts.fault + "'");
  const Grid g(opts.dims, opts.h);
  const bool broken = opts.fault == "transpose";
  Recorder rec("ops", on_failure);
  Rng rng = Rng(opts.seed).split(4);

  auto dF_star = [&](const TauField& tau, const Configuration& cfg, const Residual& w) {
    TangentVec out = apply_dF_star(tau, cfg, w);
    if (broken) out.a *= 1.0 + 1e-6;
    return out;
  };

  for (int trial = 0; trial < opts.trials; ++trial) {
    const TauField tau = random_tau_field(g, rng);
    const Configuration cfg = random_configuration(g, rng);
    const TangentVec v = random_tangent(g, rng, true);
    const Residual w = random_residual(g, rng);
    const LieField xi = random_lie_field(g, rng);

    auto F = [&](std::span<const double> x) {
      auto [t, c] = unflatten_point(g, x);
      return flatten(eval_F(t, c));
    };
    const auto fd = fd_directional(F, flatten(tau, cfg), flatten(v), 0.5);
    const auto exact = flatten(apply_dF(tau, cfg, v));
    double diff = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) diff = std::max(diff, std::abs(fd[i] - exact[i]));
    const double fd_rel = diff / std::max(max_abs(exact), 1e-300);
    rec.check(fd_rel <= 1e-9, "linearization_fd", {{"trial", trial}, {"relative_error", fd_rel}});

    const TangentVec d0 = apply_d0(cfg, xi);
    const double g0 = rel_gap(inner(d0, v), inner(xi, apply_d0_star(cfg, v)), std::sqrt(inner(d0, d0) * inner(v, v)));
    rec.check(g0 <= 1e-12, "adjoint_d0", {{"trial", trial}, {"relative_error", g0}});

    const Residual dF = apply_dF(tau, cfg, v);
    const TangentVec adj = dF_star(tau, cfg, w);
    const double g1 = rel_gap(inner(dF, w), inner(v, adj), norm(dF) * norm(w));
    rec.check(g1 <= 1e-12, "adjoint_dF", {{"trial", trial}, {"relative_error", g1}});

    const TauField dt = random_tau_field(g, rng);
    const double lhs = inner(tau_apply(dt, cfg.B), w.sd_form), rhs = inner(dt, *adj.dtau);
    const double g2 = rel_gap(lhs, rhs, norm(tau_apply(dt, cfg.B)) * norm(w.sd_form));
    rec.check(g2 <= 1e-12, "adjoint_dtau", {{"trial", trial}, {"relative_error", g2}});

    Residual psi_only(g);
    psi_only.sd_form = w.sd_form;
    const TangentVec tb = dF_star(tau, Configuration(g), psi_only);
    rec.check(tb.b == tau_transpose_apply(tau, w.sd_form), "tau_transpose_block", {{"trial", trial}});

    const Eigen::Matrix3d R = random_rotation(rng);
    const Residual l = eval_F(tau, constant_gauge_rotate(R, cfg));
    const Residual r = rotate(R, eval_F(tau, cfg));
    const double g3 = norm(l - r) / std::max(norm(r), 1e-300);
    rec.check(g3 <= 1e-12, "gauge_equivariance", {{"trial", trial}, {"relative_error", g3}});

    // Exact stencil identities, on dyadic data at unit spacing so no rounding enters.
    const Grid unit(opts.dims, 1.0);
    const LieField xd = dyadic_lie_field(unit, rng);
    const OneFormField flat(unit);
    rec.check(max_abs(cov_d_plus(flat, cov_d0(flat, xd)).flat()) == 0.0, "d_plus_d_zero", {{"trial", trial}});
    rec.check(all_zero(apply_dF(random_tau_field(unit, rng), Configuration(unit), apply_d0(Configuration(unit), xd))),
              "gauge_compatibility_flat", {{"trial", trial}});
  }

  const TauField tau = random_tau_field(g, rng);
  const Configuration cfg = random_configuration(g, rng);
  const DeformationOperator D = assemble_D(tau, cfg);
  rec.check(D.rows() == D.cols() && D.rows() == 24 * g.sites(), "square_dimension",
            {{"rows", D.rows()}, {"cols", D.cols()}, {"sites", g.sites()}});
  if (D.cols() <= DeformationOperator::kDefaultMaxDim) {
    const Eigen::SparseMatrix<double> M = D.materialize();
    Eigen::VectorXd x(D.cols());
    for (auto& e : x) e = rng.uniform(-1.0, 1.0);
    const double gm = (M * x - D.apply(x)).norm() / (M * x).norm();
    rec.check(gm <= 1e-12, "materialized_matches_matrix_free", {{"relative_error", gm}});
  }
  return rec.take();
}

}  // namespace vw
