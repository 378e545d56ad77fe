#include "eisrank/arith.hpp"
#include "eisrank/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace eisrank {

namespace {

using Rows = std::vector<ZVector>;

Rows to_rows(const ZMatrix& m) {
  Rows r(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) r[i] = m.row(i);
  return r;
}

void axpy(ZVector& y, const mpz_class& a, const ZVector& x) {
  if (a == 0) return;
  for (std::size_t j = 0; j < y.size(); ++j)
    if (x[j] != 0) y[j] -= a * x[j];
}

}  // namespace

ZMatrix hnf(const ZMatrix& m) {
  Rows a = to_rows(m);
  const std::size_t nr = a.size();
  const std::size_t nc = m.cols();
  std::size_t r = 0;
  for (std::size_t c = 0; c < nc && r < nr; ++c) {
    bool have_pivot = false;
    for (;;) {
      std::size_t best = nr;
      for (std::size_t i = r; i < nr; ++i) {
        if (a[i][c] == 0) continue;
        if (best == nr || abs(a[i][c]) < abs(a[best][c])) best = i;
      }
      if (best == nr) break;
      have_pivot = true;
      std::swap(a[r], a[best]);
      bool clean = true;
      for (std::size_t i = r + 1; i < nr; ++i) {
        if (a[i][c] == 0) continue;
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), a[i][c].get_mpz_t(), a[r][c].get_mpz_t());
        axpy(a[i], q, a[r]);
        if (a[i][c] != 0) clean = false;
      }
      if (clean) break;
    }
    if (!have_pivot) continue;
    if (a[r][c] < 0)
      for (auto& x : a[r]) x = -x;
    for (std::size_t i = 0; i < r; ++i) {
      mpz_class q;
      mpz_fdiv_q(q.get_mpz_t(), a[i][c].get_mpz_t(), a[r][c].get_mpz_t());
      axpy(a[i], q, a[r]);
    }
    ++r;
  }
  a.resize(r);
  return ZMatrix::from_rows(a, nc);
}

ZMatrix hnf_mod(const std::vector<std::vector<i64>>& rows, std::size_t n, i64 modulus) {
  if (modulus <= 0 || modulus >= (static_cast<i64>(1) << 62)) throw InvalidRingError("hnf_mod modulus out of range");
  // h[j] is the row with pivot in column j; starts as modulus * e_j.
  std::vector<std::vector<i64>> h(n, std::vector<i64>(n, 0));
  for (std::size_t j = 0; j < n; ++j) h[j][j] = modulus;
  auto md = [modulus](i128 x) {
    i64 r = static_cast<i64>(x % modulus);
    return r < 0 ? r + modulus : r;
  };
  for (const auto& src : rows) {
    if (src.size() != n) throw InvalidRingError("row length mismatch in hnf_mod");
    std::vector<i64> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = md(src[j]);
    for (std::size_t j = 0; j < n; ++j) {
      if (v[j] == 0) continue;
      // Extended gcd of the pivot and v[j].
      i64 a = h[j][j], b = v[j];
      i64 s0 = 1, s1 = 0, t0 = 0, t1 = 1;
      while (b != 0) {
        i64 q = a / b;
        i64 t = a - q * b;
        a = b;
        b = t;
        t = s0 - q * s1;
        s0 = s1;
        s1 = t;
        t = t0 - q * t1;
        t0 = t1;
        t1 = t;
      }
      const i64 g = a;
      const i64 u = h[j][j] / g, w = v[j] / g;
      for (std::size_t c = j; c < n; ++c) {
        const i128 hc = h[j][c], vc = v[c];
        h[j][c] = md(static_cast<i128>(s0) * hc + static_cast<i128>(t0) * vc);
        v[c] = md(static_cast<i128>(u) * vc - static_cast<i128>(w) * hc);
      }
      if (h[j][j] == 0) h[j][j] = modulus;
      v[j] = 0;
    }
  }
  // Pivots divide the modulus by construction; reduce entries above pivots.
  for (std::size_t c = 0; c < n; ++c) {
    const i64 piv = h[c][c];
    for (std::size_t i = 0; i < c; ++i) {
      const i64 q = h[i][c] / piv;  // entries are nonnegative
      if (q == 0) continue;
      h[i][c] -= q * piv;
      for (std::size_t j = c + 1; j < n; ++j) h[i][j] = md(static_cast<i128>(h[i][j]) - static_cast<i128>(q) * h[c][j]);
    }
  }
  ZMatrix out(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t c = 0; c < n; ++c) out(j, c) = static_cast<long>(h[j][c]);
  return out;
}

std::optional<ZVector> hnf_coordinates(const ZMatrix& h, const ZVector& v) {
  if (v.size() != h.cols()) throw InvalidRingError("length mismatch in hnf_coordinates");
  ZVector rest = v;
  ZVector coords(h.rows());
  std::size_t i = 0;
  for (std::size_t c = 0; c < h.cols(); ++c) {
    const bool pivot_here = i < h.rows() && h(i, c) != 0;
    if (!pivot_here) {
      if (rest[c] != 0) return std::nullopt;
      continue;
    }
    if (rest[c] != 0) {
      if (!mpz_divisible_p(rest[c].get_mpz_t(), h(i, c).get_mpz_t())) return std::nullopt;
      mpz_class q;
      mpz_divexact(q.get_mpz_t(), rest[c].get_mpz_t(), h(i, c).get_mpz_t());
      coords[i] = q;
      for (std::size_t j = c; j < h.cols(); ++j)
        if (h(i, j) != 0) rest[j] -= q * h(i, j);
    }
    ++i;
  }
  return coords;
}

SmithNormalFormResult snf(const ZMatrix& m) {
  Rows a = to_rows(m);
  const std::size_t nr = m.rows(), nc = m.cols();
  std::vector<mpz_class> diag;
  for (std::size_t t = 0; t < std::min(nr, nc); ++t) {
    for (;;) {
      // Smallest nonzero entry of the trailing block becomes the pivot.
      std::size_t bi = nr, bj = nc;
      for (std::size_t i = t; i < nr; ++i)
        for (std::size_t j = t; j < nc; ++j)
          if (a[i][j] != 0 && (bi == nr || abs(a[i][j]) < abs(a[bi][bj]))) {
            bi = i;
            bj = j;
          }
      if (bi == nr) break;
      std::swap(a[t], a[bi]);
      for (std::size_t i = 0; i < nr; ++i) std::swap(a[i][t], a[i][bj]);
      bool dirty = false;
      for (std::size_t i = t + 1; i < nr; ++i) {
        if (a[i][t] == 0) continue;
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), a[i][t].get_mpz_t(), a[t][t].get_mpz_t());
        axpy(a[i], q, a[t]);
        if (a[i][t] != 0) dirty = true;
      }
      for (std::size_t j = t + 1; j < nc; ++j) {
        if (a[t][j] == 0) continue;
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), a[t][j].get_mpz_t(), a[t][t].get_mpz_t());
        for (std::size_t i = t; i < nr; ++i) a[i][j] -= q * a[i][t];
        if (a[t][j] != 0) dirty = true;
      }
      if (dirty) continue;
      // Enforce the divisibility chain.
      std::size_t bad = nr;
      for (std::size_t i = t + 1; i < nr && bad == nr; ++i)
        for (std::size_t j = t + 1; j < nc; ++j)
          if (!mpz_divisible_p(a[i][j].get_mpz_t(), a[t][t].get_mpz_t())) {
            bad = i;
            break;
          }
      if (bad == nr) break;
      for (std::size_t j = t; j < nc; ++j) a[t][j] += a[bad][j];
    }
    diag.push_back(abs(a[t][t]));
  }
  diag.resize(nr, 0);
  return {diag};
}

mpz_class det_bareiss(const ZMatrix& m) {
  if (m.rows() != m.cols()) throw InvalidRingError("determinant of a non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  Rows a = to_rows(m);
  mpz_class prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t s = k + 1;
      while (s < n && a[s][k] == 0) ++s;
      if (s == n) return 0;
      std::swap(a[k], a[s]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        a[i][j] = a[i][j] * a[k][k] - a[i][k] * a[k][j];
        mpz_divexact(a[i][j].get_mpz_t(), a[i][j].get_mpz_t(), prev.get_mpz_t());
      }
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

std::vector<mpz_class> charpoly(const ZMatrix& m) {
  if (m.rows() != m.cols()) throw InvalidRingError("characteristic polynomial of a non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return {1};
  // Coefficients highest degree first during the recursion.
  std::vector<mpz_class> vect{1, -m(0, 0)};
  for (std::size_t r = 1; r < n; ++r) {
    std::vector<mpz_class> col(r + 2);
    col[0] = 1;
    col[1] = -m(r, r);
    ZVector s(r);
    for (std::size_t i = 0; i < r; ++i) s[i] = m(i, r);
    for (std::size_t k = 0; k < r; ++k) {
      mpz_class dot = 0;
      for (std::size_t i = 0; i < r; ++i) dot += m(r, i) * s[i];
      col[k + 2] = -dot;
      ZVector next(r);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) next[i] += m(i, j) * s[j];
      s = std::move(next);
    }
    std::vector<mpz_class> nv(r + 2);
    for (std::size_t i = 0; i < r + 2; ++i)
      for (std::size_t j = 0; j <= std::min(i, r); ++j) nv[i] += col[i - j] * vect[j];
    vect = std::move(nv);
  }
  std::reverse(vect.begin(), vect.end());
  return vect;
}

namespace {

ZVector flatten(const ZMatrix& m) { return m.entries(); }

ZMatrix unflatten(const ZVector& v, std::size_t n) { return ZMatrix(n, n, v); }

}  // namespace

AlgebraClosure algebra_closure(const std::vector<ZMatrix>& generators) {
  if (generators.empty()) throw InvalidRingError("algebra closure needs at least one generator");
  const std::size_t n = generators.front().rows();
  for (const auto& g : generators)
    if (g.rows() != n || g.cols() != n) throw InvalidRingError("generators must be square of equal size");
  for (std::size_t i = 0; i < generators.size(); ++i)
    for (std::size_t j = i + 1; j < generators.size(); ++j)
      if (!(generators[i] * generators[j] == generators[j] * generators[i]))
        throw CommutativityViolation("generators " + std::to_string(i) + " and " + std::to_string(j) +
                                     " do not commute");

  Rows start{flatten(ZMatrix::identity(n))};
  for (const auto& g : generators) start.push_back(flatten(g));
  ZMatrix h = hnf(ZMatrix::from_rows(start, n * n));
  for (;;) {
    Rows rows = to_rows(h);
    std::vector<ZMatrix> basis;
    for (const auto& r : rows) basis.push_back(unflatten(r, n));
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t j = i; j < basis.size(); ++j) rows.push_back(flatten(basis[i] * basis[j]));
    ZMatrix next = hnf(ZMatrix::from_rows(rows, n * n));
    if (next == h) break;
    h = std::move(next);
  }
  AlgebraClosure out;
  for (std::size_t i = 0; i < h.rows(); ++i) out.basis.push_back(unflatten(h.row(i), n));
  out.mult_table.assign(out.basis.size(), std::vector<ZVector>(out.basis.size()));
  for (std::size_t i = 0; i < out.basis.size(); ++i)
    for (std::size_t j = 0; j < out.basis.size(); ++j) {
      auto c = hnf_coordinates(h, flatten(out.basis[i] * out.basis[j]));
      if (!c) throw InternalConsistencyError("algebra closure is not multiplicatively closed");
      out.mult_table[i][j] = *c;
    }
  return out;
}

namespace {

std::vector<u64> large_primes(std::size_t count) {
  std::vector<u64> out;
  for (u64 x = (1ULL << 62) - 1; out.size() < count; x -= 2)
    if (arith::is_prime(x)) out.push_back(x);
  return out;
}

// r/s with r^2, s^2 < m/2 and r = s*a mod m.
std::optional<mpq_class> rational_reconstruct(const mpz_class& a, const mpz_class& m) {
  mpz_class bound;
  mpz_sqrt(bound.get_mpz_t(), mpz_class(m / 2).get_mpz_t());
  mpz_class r0 = m, r1 = a, s0 = 0, s1 = 1;
  while (r1 > bound) {
    mpz_class q = r0 / r1;
    mpz_class t = r0 - q * r1;
    r0 = r1;
    r1 = t;
    t = s0 - q * s1;
    s0 = s1;
    s1 = t;
  }
  if (s1 == 0 || abs(s1) > bound) return std::nullopt;
  mpq_class out(r1, s1);
  out.canonicalize();
  return out;
}

}  // namespace

std::optional<ZVector> integer_kernel_vector(const ZMatrix& a) {
  const std::size_t n = a.cols();
  if (n == 0) return std::nullopt;
  static const std::vector<u64> primes = large_primes(8);
  std::vector<std::size_t> pivots;
  std::vector<ZVector> acc;  // CRT-accumulated kernel vectors
  mpz_class modulus = 1;
  for (u64 P : primes) {
    RrefResult rr = rref_fp(ModMatrix::reduce(a, P));
    if (rr.rank == n) return std::nullopt;
    if (!acc.empty() && rr.pivots != pivots) {
      // A prime where the rank dropped further is unlucky; skip it.
      if (rr.rank < pivots.size()) continue;
      acc.clear();
      modulus = 1;
    }
    pivots = rr.pivots;
    auto ker = kernel_fp(ModMatrix::reduce(a, P));
    if (acc.empty()) acc.assign(ker.size(), ZVector(n, 0));
    const mpz_class Pz = mpz_class(std::to_string(P));
    for (std::size_t b = 0; b < ker.size(); ++b)
      for (std::size_t j = 0; j < n; ++j) {
        // x = acc mod modulus, x = ker mod P.
        mpz_class diff = mpz_class(std::to_string(ker[b][j])) - acc[b][j];
        mpz_class inv;
        mpz_invert(inv.get_mpz_t(), mpz_class(modulus % Pz).get_mpz_t(), Pz.get_mpz_t());
        mpz_class t = diff * inv;
        mpz_fdiv_r(t.get_mpz_t(), t.get_mpz_t(), Pz.get_mpz_t());
        acc[b][j] += modulus * t;
      }
    modulus *= Pz;
    for (const auto& cand : acc) {
      std::vector<mpq_class> q(n);
      bool ok = true;
      for (std::size_t j = 0; j < n && ok; ++j) {
        auto r = rational_reconstruct(cand[j], modulus);
        if (!r) ok = false;
        else q[j] = *r;
      }
      if (!ok) continue;
      mpz_class den = 1;
      for (const auto& x : q) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), x.get_den_mpz_t());
      ZVector v(n);
      bool nonzero = false;
      for (std::size_t j = 0; j < n; ++j) {
        v[j] = q[j].get_num() * (den / q[j].get_den());
        if (v[j] != 0) nonzero = true;
      }
      if (!nonzero) continue;
      const ZVector img = mat_vec(a, v);
      if (std::all_of(img.begin(), img.end(), [](const mpz_class& x) { return x == 0; })) return v;
    }
  }
  throw InternalConsistencyError("could not certify a rational kernel vector");
}

}  // namespace eisrank
