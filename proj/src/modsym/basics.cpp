#include <cmath>

#include "eisrank/arith.hpp"
#include "eisrank/modsym.hpp"

namespace eisrank::modsym {

const char* subspace_name(Subspace s) {
  switch (s) {
    case Subspace::Full: return "full";
    case Subspace::Cuspidal: return "cuspidal";
    case Subspace::CuspidalPlus: return "cuspidal-plus";
  }
  return "?";
}

Subspace parse_subspace(const std::string& s) {
  if (s == "full") return Subspace::Full;
  if (s == "cuspidal") return Subspace::Cuspidal;
  if (s == "cuspidal-plus" || s == "plus") return Subspace::CuspidalPlus;
  throw ParameterError("unknown subspace '" + s + "'");
}

// Cremona, Algorithms for Modular Elliptic Curves, 2.4.
std::vector<Mat2> heilbronn_cremona(i64 q) {
  if (q < 2) throw ParameterError("heilbronn_cremona needs q >= 2");
  std::vector<Mat2> out;
  out.push_back({1, 0, 0, q});
  for (i64 s = 0; s < q; ++s) {
    i64 r = s - (q - 1) / 2;
    i64 x1 = q, x2 = -r, y1 = 0, y2 = 1, a = -q, b = r;
    out.push_back({x1, x2, y1, y2});
    while (b != 0) {
      i64 t = std::llround(static_cast<double>(a) / static_cast<double>(b));
      i64 c = a - b * t;
      a = -b;
      b = c;
      i64 x3 = t * x2 - x1;
      x1 = x2;
      x2 = x3;
      i64 y3 = t * y2 - y1;
      y1 = y2;
      y2 = y3;
      out.push_back({x1, x2, y1, y2});
    }
  }
  return out;
}

std::vector<Mat2> heilbronn_merel(i64 n) {
  if (n < 1) throw ParameterError("heilbronn_merel needs n >= 1");
  std::vector<Mat2> out;
  for (i64 a = 1; a <= n; ++a) {
    i64 q = n / a;
    if (q * a == n) {
      i64 d = q;
      for (i64 b = 0; b < a; ++b) out.push_back({a, b, 0, d});
      for (i64 c = 1; c < d; ++c) out.push_back({a, 0, c, d});
    }
    for (i64 d = q + 1; d <= n; ++d) {
      i64 bc = a * d - n;
      for (i64 c = bc / a + 1; c < d; ++c)
        if (bc % c == 0) out.push_back({a, bc / c, c, d});
    }
  }
  return out;
}

std::size_t dim_cusp_forms(u64 ell, unsigned k) {
  if (!arith::is_prime(ell)) throw ParameterError("level must be prime");
  if (k < 2 || k % 2) throw ParameterError("weight must be even and >= 2");
  // Elliptic points: nu2 = 1 + (-1/ell), nu3 = 1 + (-3/ell); two cusps.
  i64 nu2, nu3;
  if (ell == 2) nu2 = 1;
  else nu2 = (ell % 4 == 1) ? 2 : 0;
  if (ell == 3) nu3 = 1;
  else nu3 = (ell % 3 == 1) ? 2 : 0;
  // 12 g = 12 + (ell + 1) - 3 nu2 - 4 nu3 - 6 * cusps
  i64 g12 = 12 + static_cast<i64>(ell + 1) - 3 * nu2 - 4 * nu3 - 12;
  if (g12 % 12) throw InternalConsistencyError("genus formula is not integral");
  i64 g = g12 / 12;
  if (k == 2) return static_cast<std::size_t>(g);
  i64 kk = k;
  i64 d = (kk - 1) * (g - 1) + (kk / 2 - 1) * 2 + nu2 * (kk / 4) + nu3 * (kk / 3);
  return static_cast<std::size_t>(d);
}

std::size_t dim_full_expected(u64 ell, unsigned k) { return 2 * dim_cusp_forms(ell, k) + (k == 2 ? 1 : 2); }

u64 sturm_bound(u64 ell, unsigned k) { return (static_cast<u64>(k) * (ell + 1) + 11) / 12; }

std::vector<u64> hecke_generator_primes(u64 ell, unsigned k) {
  std::vector<u64> out;
  for (u64 q : arith::primes_up_to(sturm_bound(ell, k)))
    if (q != ell) out.push_back(q);
  return out;
}

QMatrix OperatorMatrix::rational() const {
  QMatrix q(matrix.rows(), matrix.cols());
  for (std::size_t i = 0; i < matrix.rows(); ++i)
    for (std::size_t j = 0; j < matrix.cols(); ++j) {
      q(i, j) = mpq_class(matrix(i, j), denominator);
      q(i, j).canonicalize();
    }
  return q;
}

std::optional<ZVector> LatticeBasis::coordinates(const ZVector& v, bool check) const {
  std::size_t r = rank();
  ZVector u(r);
  // rows restricted to cols is upper triangular: v_cols[j] = sum_{i<=j} u_i rows(i, cols[j]).
  for (std::size_t j = 0; j < r; ++j) {
    mpz_class acc = v[cols[j]];
    for (std::size_t i = 0; i < j; ++i)
      if (u[i] != 0 && rows(i, cols[j]) != 0) acc -= u[i] * rows(i, cols[j]);
    const mpz_class& piv = rows(j, cols[j]);
    if (!mpz_divisible_p(acc.get_mpz_t(), piv.get_mpz_t())) return std::nullopt;
    mpz_divexact(u[j].get_mpz_t(), acc.get_mpz_t(), piv.get_mpz_t());
  }
  if (check) {
    for (std::size_t c = 0; c < rows.cols(); ++c) {
      mpz_class acc = 0;
      for (std::size_t i = 0; i < r; ++i) acc += u[i] * rows(i, c);
      if (acc != v[c]) return std::nullopt;
    }
  }
  return u;
}

}  // namespace eisrank::modsym
