#pragma once

// Independent verifiers: exact rational determinants, a finite-difference
// harness and seeded instance generators.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <gmpxx.h>

#include "vwlab/algebra.hpp"
#include "vwlab/vwmap.hpp"

namespace vw {

/// Arbitrary-precision rational, always stored in canonical reduced form.
using Rational = mpq_class;
using RationalMat12 = BasicMat12<Rational>;

/// Exact determinant by fraction-free Bareiss elimination with row pivoting.
Rational exact_det12(const RationalMat12& M);
/// Exact determinant by Laplace expansion along rows, memoized over column subsets.
Rational exact_det12_cofactor(const RationalMat12& M);
/// Same algorithms for square matrices of any size (cofactor limited to n <= 20).
Rational exact_det(const std::vector<std::vector<Rational>>& M);
Rational exact_det_cofactor(const std::vector<std::vector<Rational>>& M);

/// A nonzero exact kernel vector of M (any shape), or nullopt when M is injective.
std::optional<std::vector<Rational>> exact_null_vector(const std::vector<std::vector<Rational>>& M);
std::optional<std::vector<Rational>> exact_null_vector(const RationalMat12& M);

/// Floating determinant with partial pivoting, used as a sanity layer only.
double float_det12(const Mat12& M);

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using VectorMap = std::function<std::vector<double>(std::span<const double>)>;

/// (f(x + step*dir) - f(x - step*dir)) / (2*step). Exact to roundoff for maps of
/// degree <= 2.
std::vector<double> fd_directional(const VectorMap& f, std::span<const double> point,
                                   std::span<const double> direction, double step);

/// Flattening of (tau, cfg) and of tangent vectors (dtau, a, b, c), in the order
/// tau, A, B, C; used to drive fd_directional through eval_F.
std::vector<double> flatten(const TauField& tau, const Configuration& cfg);
std::vector<double> flatten(const TangentVec& v);
std::vector<double> flatten(const Residual& r);
std::pair<TauField, Configuration> unflatten_point(const Grid& g, std::span<const double> x);

/// Deterministic 64-bit generator (splitmix64-seeded xoshiro256**) with
/// portable uniform draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi);
  /// Derived generator for an independent stream.
  Rng split(std::uint64_t stream) const;

 private:
  std::uint64_t s_[4];
};

Eigen::Matrix3d random_rotation(Rng& rng);
LieVec random_lievec(Rng& rng, double amplitude = 1.0);
AdOneForm random_one_form(Rng& rng, double amplitude = 1.0);
TauMat random_tau(Rng& rng, double amplitude = 1.0);
/// U diag(d) V^T with exactly `rank` nonzero d's, each |d| in [min_sv, 1].
AdSelfDual random_sd_of_rank(Rng& rng, int rank, double min_sv = 0.1);
AdSelfDual random_sd(Rng& rng, double amplitude = 1.0);

template <class V, class Gen>
Field<V> random_field(const Grid& g, Gen&& gen) {
  Field<V> f(g);
  for (std::size_t s = 0; s < g.sites(); ++s) f[s] = gen();
  return f;
}

Configuration random_configuration(const Grid& g, Rng& rng, double amplitude = 1.0);
TauField random_tau_field(const Grid& g, Rng& rng, double amplitude = 1.0);
TangentVec random_tangent(const Grid& g, Rng& rng, bool with_dtau, double amplitude = 1.0);
Residual random_residual(const Grid& g, Rng& rng, double amplitude = 1.0);
LieField random_lie_field(const Grid& g, Rng& rng, double amplitude = 1.0);

/// Rational in [-bound, bound] with denominator in 1..max_den.
Rational random_rational(Rng& rng, int bound = 10, int max_den = 64);

struct RationalTuple {
  Rational B1, B2, B3, C1, C2, C3;
};
RationalTuple random_rational_tuple(Rng& rng, int bound = 10, int max_den = 64);

struct GenParams {
  int rank = 3;
  double amplitude = 1.0;
  int bound = 10;
  int max_den = 64;
  std::array<int, 4> dims{3, 3, 3, 3};
  double h = 1.0;
};

using Instance = std::variant<LieVec, AdSelfDual, AdOneForm, TauMat, Configuration, RationalTuple>;

class UnknownKind : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// kind is one of "lievec", "adselfdual", "adoneform", "taumat",
/// "configuration", "rational_tuple"; "adselfdual" honours params.rank.
Instance gen_random(std::string_view kind, std::uint64_t seed, const GenParams& params = {});

}  // namespace vw
