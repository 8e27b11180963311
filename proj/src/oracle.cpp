#include "vwlab/oracle.hpp"

#include <bit>
#include <cmath>
#include <utility>

namespace vw {

namespace {

using RationalMatrix = std::vector<std::vector<Rational>>;

RationalMatrix to_rows(const RationalMat12& M) {
  RationalMatrix out(12, std::vector<Rational>(12));
  for (int r = 0; r < 12; ++r)
    for (int c = 0; c < 12; ++c) out[r][c] = M[r][c];
  return out;
}

void require_square(const RationalMatrix& M) {
  for (const auto& row : M)
    if (row.size() != M.size()) throw std::invalid_argument("exact_det: matrix is not square");
}

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <class V>
void append(std::vector<double>& out, const Field<V>& f) {
  out.insert(out.end(), f.flat().begin(), f.flat().end());
}

template <class V>
std::size_t take(Field<V>& f, std::span<const double> x, std::size_t offset) {
  auto dst = f.flat();
  if (offset + dst.size() > x.size()) throw std::invalid_argument("unflatten: vector too short");
  std::copy(x.begin() + static_cast<std::ptrdiff_t>(offset),
            x.begin() + static_cast<std::ptrdiff_t>(offset + dst.size()), dst.begin());
  return offset + dst.size();
}

}  // namespace

Rational exact_det(const RationalMatrix& M) {
  require_square(M);
  const std::size_t n = M.size();
  if (n == 0) return Rational(1);

  // Clear denominators row by row; det(M) = det(Z) / prod(row scales).
  std::vector<std::vector<mpz_class>> Z(n, std::vector<mpz_class>(n));
  mpz_class scale_product = 1;
  for (std::size_t r = 0; r < n; ++r) {
    mpz_class l = 1;
    for (const auto& q : M[r]) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
    for (std::size_t c = 0; c < n; ++c) Z[r][c] = M[r][c].get_num() * (l / M[r][c].get_den());
    scale_product *= l;
  }

  int sign = 1;
  mpz_class previous = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (Z[k][k] == 0) {
      std::size_t p = k + 1;
      while (p < n && Z[p][k] == 0) ++p;
      if (p == n) return Rational(0);
      std::swap(Z[k], Z[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Z[i][j] = Z[i][j] * Z[k][k] - Z[i][k] * Z[k][j];
        mpz_divexact(Z[i][j].get_mpz_t(), Z[i][j].get_mpz_t(), previous.get_mpz_t());
      }
      Z[i][k] = 0;
    }
    previous = Z[k][k];
  }
  Rational det(sign * Z[n - 1][n - 1], scale_product);
  det.canonicalize();
  return det;
}

Rational exact_det_cofactor(const RationalMatrix& M) {
  require_square(M);
  const std::size_t n = M.size();
  if (n > 20) throw std::invalid_argument("exact_det_cofactor: matrix too large");
  if (n == 0) return Rational(1);

  // minor[mask] = determinant of the submatrix formed by the last popcount(mask)
  // rows and the columns in mask; built up from the bottom row.
  const std::size_t full = (std::size_t{1} << n) - 1;
  std::vector<Rational> minor(full + 1);
  minor[0] = 1;
  for (std::size_t mask = 1; mask <= full; ++mask) {
    const auto used = static_cast<std::size_t>(std::popcount(mask));
    const std::size_t row = n - used;
    Rational acc = 0;
    int position = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (!(mask & (std::size_t{1} << c))) continue;
      if (M[row][c] != 0) {
        const Rational term = M[row][c] * minor[mask & ~(std::size_t{1} << c)];
        if (position % 2 == 0)
          acc += term;
        else
          acc -= term;
      }
      ++position;
    }
    minor[mask] = acc;
  }
  return minor[full];
}

Rational exact_det12(const RationalMat12& M) { return exact_det(to_rows(M)); }
Rational exact_det12_cofactor(const RationalMat12& M) { return exact_det_cofactor(to_rows(M)); }

std::optional<std::vector<Rational>> exact_null_vector(const RationalMatrix& M) {
  if (M.empty()) return std::nullopt;
  const std::size_t rows = M.size(), cols = M[0].size();
  for (const auto& r : M)
    if (r.size() != cols) throw std::invalid_argument("exact_null_vector: ragged matrix");
  RationalMatrix R = M;
  std::vector<std::size_t> pivot_col;
  std::vector<bool> is_pivot(cols, false);
  std::size_t row = 0;
  for (std::size_t c = 0; c < cols && row < rows; ++c) {
    std::size_t p = row;
    while (p < rows && R[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(R[row], R[p]);
    const Rational inv = 1 / R[row][c];
    for (auto& x : R[row]) x *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == row || R[i][c] == 0) continue;
      const Rational f = R[i][c];
      for (std::size_t j = c; j < cols; ++j) R[i][j] -= f * R[row][j];
    }
    pivot_col.push_back(c);
    is_pivot[c] = true;
    ++row;
  }
  std::size_t free = cols;
  for (std::size_t c = 0; c < cols && free == cols; ++c)
    if (!is_pivot[c]) free = c;
  if (free == cols) return std::nullopt;
  std::vector<Rational> v(cols, Rational(0));
  v[free] = 1;
  for (std::size_t r = 0; r < pivot_col.size(); ++r) v[pivot_col[r]] = -R[r][free];
  return v;
}

std::optional<std::vector<Rational>> exact_null_vector(const RationalMat12& M) {
  return exact_null_vector(to_rows(M));
}

double float_det12(const Mat12& M) { return to_matrix(M).partialPivLu().determinant(); }

std::vector<double> fd_directional(const VectorMap& f, std::span<const double> point,
                                   std::span<const double> direction, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_directional: step must be positive");
  if (point.size() != direction.size())
    throw std::invalid_argument("fd_directional: point and direction differ in length");
  std::vector<double> plus(point.begin(), point.end()), minus(point.begin(), point.end());
  for (std::size_t i = 0; i < point.size(); ++i) {
    plus[i] += step * direction[i];
    minus[i] -= step * direction[i];
  }
  const auto fp = f(plus);
  const auto fm = f(minus);
  if (fp.size() != fm.size()) throw std::invalid_argument("fd_directional: inconsistent map");
  std::vector<double> out(fp.size());
  for (std::size_t i = 0; i < fp.size(); ++i) {
    if (!std::isfinite(fp[i]) || !std::isfinite(fm[i]))
      throw NonFiniteError("fd_directional: map returned a non-finite value at component " +
                           std::to_string(i));
    out[i] = (fp[i] - fm[i]) / (2.0 * step);
  }
  return out;
}

std::vector<double> flatten(const TauField& tau, const Configuration& cfg) {
  std::vector<double> out;
  out.reserve(33 * cfg.grid().sites());
  append(out, tau);
  append(out, cfg.A);
  append(out, cfg.B);
  append(out, cfg.C);
  return out;
}

std::vector<double> flatten(const TangentVec& v) {
  std::vector<double> out;
  out.reserve(33 * v.grid().sites());
  if (v.dtau)
    append(out, *v.dtau);
  else
    out.resize(9 * v.grid().sites(), 0.0);
  append(out, v.a);
  append(out, v.b);
  append(out, v.c);
  return out;
}

std::vector<double> flatten(const Residual& r) {
  std::vector<double> out;
  out.reserve(21 * r.grid().sites());
  append(out, r.one_form);
  append(out, r.sd_form);
  return out;
}

std::pair<TauField, Configuration> unflatten_point(const Grid& g, std::span<const double> x) {
  TauField tau(g);
  Configuration cfg(g);
  std::size_t off = take(tau, x, 0);
  off = take(cfg.A, x, off);
  off = take(cfg.B, x, off);
  off = take(cfg.C, x, off);
  if (off != x.size()) throw std::invalid_argument("unflatten: vector too long");
  return {std::move(tau), std::move(cfg)};
}

Rng::Rng(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::int64_t Rng::integer(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw std::invalid_argument("Rng::integer: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next());
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return lo + static_cast<std::int64_t>(x % span);
}

Rng Rng::split(std::uint64_t stream) const {
  std::uint64_t mix = s_[0] ^ std::rotl(s_[1], 13) ^ std::rotl(s_[2], 29) ^ std::rotl(s_[3], 43);
  std::uint64_t key = stream;
  return Rng(mix ^ splitmix64(key));
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Vector4d q;
  double n2;
  do {
    for (int i = 0; i < 4; ++i) q(i) = rng.uniform(-1.0, 1.0);
    n2 = q.squaredNorm();
  } while (n2 > 1.0 || n2 < 1e-6);
  Eigen::Quaterniond quat(q(0), q(1), q(2), q(3));
  quat.normalize();
  return quat.toRotationMatrix();
}

LieVec random_lievec(Rng& rng, double amplitude) {
  LieVec x;
  for (auto& c : x.v) c = rng.uniform(-amplitude, amplitude);
  return x;
}

AdOneForm random_one_form(Rng& rng, double amplitude) {
  AdOneForm x;
  for (auto& c : x.v) c = rng.uniform(-amplitude, amplitude);
  return x;
}

TauMat random_tau(Rng& rng, double amplitude) {
  TauMat x;
  for (auto& c : x.v) c = rng.uniform(-amplitude, amplitude);
  return x;
}

AdSelfDual random_sd(Rng& rng, double amplitude) {
  AdSelfDual x;
  for (auto& c : x.v) c = rng.uniform(-amplitude, amplitude);
  return x;
}

AdSelfDual random_sd_of_rank(Rng& rng, int rank, double min_sv) {
  if (rank < 0 || rank > 3) throw std::invalid_argument("random_sd_of_rank: rank must be in 0..3");
  Eigen::Vector3d d = Eigen::Vector3d::Zero();
  for (int i = 0; i < rank; ++i) {
    const double mag = rng.uniform(min_sv, 1.0);
    d(i) = rng.uniform() < 0.5 ? -mag : mag;
  }
  const Eigen::Matrix3d U = random_rotation(rng);
  const Eigen::Matrix3d V = random_rotation(rng);
  return from_matrix(U * d.asDiagonal() * V.transpose());
}

Configuration random_configuration(const Grid& g, Rng& rng, double amplitude) {
  Configuration cfg(g);
  for (std::size_t s = 0; s < g.sites(); ++s) cfg.A[s] = random_one_form(rng, amplitude);
  for (std::size_t s = 0; s < g.sites(); ++s) cfg.B[s] = random_sd(rng, amplitude);
  for (std::size_t s = 0; s < g.sites(); ++s) cfg.C[s] = random_lievec(rng, amplitude);
  return cfg;
}

TauField random_tau_field(const Grid& g, Rng& rng, double amplitude) {
  return random_field<TauMat>(g, [&] { return random_tau(rng, amplitude); });
}

TangentVec random_tangent(const Grid& g, Rng& rng, bool with_dtau, double amplitude) {
  TangentVec v(g);
  if (with_dtau) v.dtau = random_tau_field(g, rng, amplitude);
  for (std::size_t s = 0; s < g.sites(); ++s) v.a[s] = random_one_form(rng, amplitude);
  for (std::size_t s = 0; s < g.sites(); ++s) v.b[s] = random_sd(rng, amplitude);
  for (std::size_t s = 0; s < g.sites(); ++s) v.c[s] = random_lievec(rng, amplitude);
  return v;
}

Residual random_residual(const Grid& g, Rng& rng, double amplitude) {
  Residual r(g);
  for (std::size_t s = 0; s < g.sites(); ++s) r.one_form[s] = random_one_form(rng, amplitude);
  for (std::size_t s = 0; s < g.sites(); ++s) r.sd_form[s] = random_sd(rng, amplitude);
  return r;
}

LieField random_lie_field(const Grid& g, Rng& rng, double amplitude) {
  return random_field<LieVec>(g, [&] { return random_lievec(rng, amplitude); });
}

Rational random_rational(Rng& rng, int bound, int max_den) {
  if (bound < 0 || max_den < 1) throw std::invalid_argument("random_rational: bad range");
  const std::int64_t den = rng.integer(1, max_den);
  const std::int64_t num = rng.integer(-bound * den, bound * den);
  Rational q(static_cast<long>(num), static_cast<unsigned long>(den));
  q.canonicalize();
  return q;
}

RationalTuple random_rational_tuple(Rng& rng, int bound, int max_den) {
  RationalTuple t;
  t.B1 = random_rational(rng, bound, max_den);
  t.B2 = random_rational(rng, bound, max_den);
  t.B3 = random_rational(rng, bound, max_den);
  t.C1 = random_rational(rng, bound, max_den);
  t.C2 = random_rational(rng, bound, max_den);
  t.C3 = random_rational(rng, bound, max_den);
  return t;
}

Instance gen_random(std::string_view kind, std::uint64_t seed, const GenParams& params) {
  Rng rng(seed);
  if (kind == "lievec") return random_lievec(rng, params.amplitude);
  if (kind == "adselfdual") return random_sd_of_rank(rng, params.rank);
  if (kind == "adoneform") return random_one_form(rng, params.amplitude);
  if (kind == "taumat") return random_tau(rng, params.amplitude);
  if (kind == "configuration")
    return random_configuration(Grid(params.dims, params.h), rng, params.amplitude);
  if (kind == "rational_tuple") return random_rational_tuple(rng, params.bound, params.max_den);
  throw UnknownKind("gen_random: unknown kind '" + std::string(kind) + "'");
}

}  // namespace vw
