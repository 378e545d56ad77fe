#include <doctest.h>

#include <algorithm>
#include <map>

#include "eisrank/arith.hpp"
#include "eisrank/modsym.hpp"

using namespace eisrank;
using namespace eisrank::modsym;

namespace {

// a_q = q + 1 - #E(F_q) for y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6.
long ap_by_counting(long q, long a1, long a2, long a3, long a4, long a6) {
  long count = 1;  // point at infinity
  auto md = [q](long x) { return ((x % q) + q) % q; };
  for (long x = 0; x < q; ++x)
    for (long y = 0; y < q; ++y)
      if (md(y * y + a1 * x * y + a3 * y) == md(x * x * x + a2 * x * x + a4 * x + a6)) ++count;
  return q + 1 - count;
}

// dim S_k(Gamma_0(ell)) from the volume form: (k-1) mu / 12 plus elliptic and
// cusp corrections, computed in rationals.
long dim_oracle(long ell, long k) {
  const long nu2 = (ell == 2) ? 1 : (ell % 4 == 1 ? 2 : 0);
  const long nu3 = (ell == 3) ? 1 : (ell % 3 == 1 ? 2 : 0);
  auto q = [](long a, long b) {
    mpq_class x(a, b);
    x.canonicalize();
    return x;
  };
  mpq_class mu = ell + 1;
  if (k == 2) {
    mpq_class g = 1 + mu / 12 - q(nu2, 4) - q(nu3, 3) - 1;
    return g.get_num().get_si();
  }
  mpq_class d = mpq_class(k - 1) * mu / 12 + (mpq_class(k / 4) - q(k - 1, 4)) * nu2 +
                (mpq_class(k / 3) - q(k - 1, 3)) * nu3 - 1;
  REQUIRE(d.get_den() == 1);
  return d.get_num().get_si();
}

ZMatrix integral(const OperatorMatrix& m) {
  REQUIRE(m.integral());
  return m.matrix;
}

mpz_class ipow(long b, unsigned e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(b), e);
  return r;
}

// Valuations at p of the Smith form, capped at N.
std::vector<unsigned> p_snf(const ZMatrix& m, u64 p, unsigned N) {
  std::vector<unsigned> out;
  for (const auto& d : snf(m).invariant_factors) {
    unsigned v = 0;
    mpz_class x = d;
    if (x == 0) v = N;
    while (x != 0 && v < N && mpz_divisible_ui_p(x.get_mpz_t(), p)) {
      x /= static_cast<unsigned long>(p);
      ++v;
    }
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<unsigned> sorted(std::vector<unsigned> v) {
  std::sort(v.begin(), v.end());
  return v;
}

ModMatrix reduce_op(const OperatorMatrix& m, u64 mod) {
  ModMatrix r = ModMatrix::reduce(m.matrix, mod);
  if (m.denominator != 1) {
    u64 inv = arith::inv_mod(arith::reduce(m.denominator, mod), mod);
    for (std::size_t i = 0; i < r.rows(); ++i)
      for (std::size_t j = 0; j < r.cols(); ++j) r(i, j) = arith::mul_mod(r(i, j), inv, mod);
  }
  return r;
}

u64 trace(const ModMatrix& m) {
  u64 t = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) t = arith::add_mod(t, m(i, i), m.modulus());
  return t;
}

}  // namespace

TEST_CASE("heilbronn sets have the right determinant") {
  for (i64 q : {2, 3, 5, 7, 11, 13}) {
    for (const auto& h : heilbronn_cremona(q)) CHECK(h.a * h.d - h.b * h.c == q);
    const auto mer = heilbronn_merel(q);
    for (const auto& h : mer) {
      CHECK(h.a * h.d - h.b * h.c == q);
      CHECK(h.a > h.b);
      CHECK(h.b >= 0);
      CHECK(h.d > h.c);
      CHECK(h.c >= 0);
    }
  }
  // Brute-force count of Merel's set for n = 6.
  std::size_t count = 0;
  for (i64 a = 1; a <= 6; ++a)
    for (i64 b = 0; b < a; ++b)
      for (i64 d = 1; d <= 6; ++d)
        for (i64 c = 0; c < d; ++c)
          if (a * d - b * c == 6) ++count;
  CHECK(heilbronn_merel(6).size() == count);
}

TEST_CASE("cusp form dimensions against the volume formula") {
  for (u64 ell : {2, 3, 5, 7, 11, 13, 17, 29, 37, 53, 71, 101, 191})
    for (unsigned k : {2, 4, 6, 8, 10, 12})
      CHECK(dim_cusp_forms(ell, k) == static_cast<std::size_t>(dim_oracle(static_cast<long>(ell), k)));
  CHECK(dim_cusp_forms(11, 2) == 1);
  CHECK(dim_cusp_forms(37, 2) == 2);
  CHECK_THROWS_AS(dim_cusp_forms(12, 2), ParameterError);
  CHECK_THROWS_AS(dim_cusp_forms(11, 3), ParameterError);
}

TEST_CASE("sturm bound and generator primes") {
  CHECK(sturm_bound(11, 2) == 2);
  CHECK(sturm_bound(29, 4) == 10);
  CHECK(hecke_generator_primes(11, 2) == std::vector<u64>{2});
  CHECK(hecke_generator_primes(5, 12) == std::vector<u64>{2, 3});
  CHECK(hecke_generator_primes(29, 10) ==
        std::vector<u64>{2, 3, 5, 7, 11, 13, 17, 19, 23});
}

TEST_CASE("presentation basics") {
  Presentation pr(11, 4);
  CHECK(pr.num_symbols() == 12 * 3);
  for (std::size_t s = 0; s < pr.num_symbols(); ++s) {
    auto [pt, i] = pr.symbol(s);
    CHECK(pt * 3 + i == s);
  }
  CHECK(pr.point_index(0, 1) == 0);
  CHECK(pr.point_index(1, 0) == 11);
  CHECK(pr.point_index(3, 5) == 5);  // 3/5 = 5 mod 11
  CHECK_THROWS_AS(Presentation(15, 2), ParameterError);
}

TEST_CASE("level 11 weight 2 matches the curve 11a") {
  auto sp = ManinSymbolSpace::build(11, 2);
  CHECK(sp->num_symbols() == 12);
  CHECK(sp->dim(Subspace::Full) == 3);
  CHECK(sp->dim(Subspace::Cuspidal) == 2);
  CHECK(sp->dim(Subspace::CuspidalPlus) == 1);
  for (u64 q : {2, 3, 5, 7, 13, 17, 19}) {
    const ZMatrix t = integral(sp->hecke_operator(q, Subspace::CuspidalPlus));
    CHECK(t(0, 0) == ap_by_counting(static_cast<long>(q), 0, -1, 1, -10, -20));
    // Eisenstein congruence modulo 5.
    CHECK(mpz_class(t(0, 0) - 1 - static_cast<long>(q)) % 5 == 0);
  }
  CHECK(integral(sp->atkin_lehner(Subspace::CuspidalPlus))(0, 0) == -1);
  CHECK_THROWS_AS(sp->hecke_operator(11, Subspace::Full), ParameterError);
  CHECK_THROWS_AS(sp->hecke_operator(4, Subspace::Full), ParameterError);
}

TEST_CASE("level 37 weight 2 splits as 37a and 37b") {
  auto sp = ManinSymbolSpace::build(37, 2);
  REQUIRE(sp->dim(Subspace::CuspidalPlus) == 2);
  for (long q : {2, 3, 5, 7, 11}) {
    const long a = ap_by_counting(q, 0, 0, 1, -1, 0);     // 37a
    const long b = ap_by_counting(q, 0, 1, 1, -23, -50);  // 37b
    const auto cp = charpoly(integral(sp->hecke_operator(static_cast<u64>(q), Subspace::CuspidalPlus)));
    REQUIRE(cp.size() == 3);
    CHECK(cp[0] == a * b);
    CHECK(cp[1] == -(a + b));
    CHECK(cp[2] == 1);
  }
}

TEST_CASE("exact spaces: dimensions, involutions and hecke identities") {
  for (auto [ell, k] : std::vector<std::pair<u64, unsigned>>{{11, 4}, {13, 6}, {29, 4}, {11, 10}, {53, 4}, {5, 12}}) {
    CAPTURE(ell);
    CAPTURE(k);
    auto sp = ManinSymbolSpace::build(ell, k);
    const std::size_t ds = dim_cusp_forms(ell, k);
    CHECK(sp->dim(Subspace::Full) == 2 * ds + 2);
    CHECK(sp->dim(Subspace::Cuspidal) == 2 * ds);
    CHECK(sp->dim(Subspace::CuspidalPlus) == ds);
    CHECK(sp->num_symbols() == (ell + 1) * (k - 1));

    // Cremona and Merel sets give the same T_q.
    for (u64 q : {2, 3, 5, 7}) {
      if (q == ell) continue;
      CHECK(sp->hecke_operator(q, Subspace::Full).matrix == sp->merel_operator(q, Subspace::Full).matrix);
    }
    // T_4 = T_2^2 - 2^(k-1) and T_6 = T_2 T_3 away from the level.
    if (ell != 2 && ell != 3) {
      const ZMatrix t2 = integral(sp->hecke_operator(2, Subspace::Full));
      const ZMatrix t3 = integral(sp->hecke_operator(3, Subspace::Full));
      CHECK(integral(sp->merel_operator(4, Subspace::Full)) == t2 * t2 - scaled(ZMatrix::identity(t2.rows()), ipow(2, k - 1)));
      CHECK(integral(sp->merel_operator(6, Subspace::Full)) == t2 * t3);
      CHECK(t2 * t3 == t3 * t2);
    }
    // The boundary map is Hecke equivariant with eigenvalue 1 + q^(k-1).
    {
      u64 q = ell == 2 ? 3 : 2;
      const ZMatrix t = integral(sp->hecke_operator(q, Subspace::Full));
      const ZMatrix& b = sp->boundary();
      // row i of boundary is delta(basis i); column j of t is T(basis j).
      CHECK(t.transpose() * b == scaled(b, ipow(static_cast<long>(q), k - 1) + 1));
    }
    // U_ell from Merel's set equals -ell^(k/2-1) w on new forms; below
    // weight 12 there are no old forms at prime level.
    if (k < 12) {
      const OperatorMatrix u = sp->merel_operator(ell, Subspace::Cuspidal);
      const OperatorMatrix w = sp->atkin_lehner(Subspace::Cuspidal);
      CHECK(u.integral());
      CHECK(scaled(w.matrix, ipow(static_cast<long>(ell), k / 2 - 1)) ==
            scaled(u.matrix, -mpz_class(w.denominator)));
    }
    const ZMatrix st = integral(sp->star_involution(Subspace::Cuspidal));
    CHECK(st * st == ZMatrix::identity(st.rows()));
    // The plus part is star-fixed: its inclusion rows satisfy x star = x on cusp coordinates.
    const ZMatrix sp_plus = integral(sp->star_involution(Subspace::CuspidalPlus));
    CHECK(sp_plus == ZMatrix::identity(ds));
  }
}

TEST_CASE("weight 4 level 11 hecke polynomial") {
  auto sp = ManinSymbolSpace::build(11, 4);
  const auto cp = charpoly(integral(sp->hecke_operator(2, Subspace::CuspidalPlus)));
  // Traces of powers from the full space: tr T_2 on cusp is twice that on plus.
  const ZMatrix tc = integral(sp->hecke_operator(2, Subspace::Cuspidal));
  mpz_class tr = 0;
  for (std::size_t i = 0; i < tc.rows(); ++i) tr += tc(i, i);
  CHECK(tr == -2 * cp[1]);
  // Ramanujan bound |a_2| <= 2 * 2^(3/2): discriminant positive and roots small.
  CHECK(cp[1] * cp[1] - 4 * cp[0] > 0);
  CHECK(abs(cp[1]) <= 2 * 6);
  CHECK(sp->atkin_lehner(Subspace::CuspidalPlus).integral());
}

TEST_CASE("resource bound and build counter") {
  CHECK_THROWS_AS(ManinSymbolSpace::build(101, 10, 1000), ResourceBoundError);
  CHECK_THROWS_AS(LocalSymbolSpace::build(101, 10, 5, 10, 1000), ResourceBoundError);
  const std::size_t before = build_count();
  ManinSymbolSpace::build(11, 2);
  LocalSymbolSpace::build(11, 2, 5, 4);
  CHECK(build_count() == before + 2);
  CHECK_THROWS_AS(LocalSymbolSpace::build(11, 2, 11, 4), ParameterError);
  CHECK_THROWS_AS(LocalSymbolSpace::build(11, 2, 3, 4), ParameterError);
  CHECK_THROWS_AS(LocalSymbolSpace::build(11, 2, 5, 40), ParameterError);
}

TEST_CASE("local spaces agree with the exact lattice tensored with Z_p") {
  struct Case {
    u64 ell;
    unsigned k;
    u64 p;
    unsigned N;
  };
  // (29, 10) at p = 7 exercises the p-torsion in the relations.
  for (const Case& c : std::vector<Case>{{11, 2, 5, 6}, {11, 4, 5, 6}, {29, 4, 7, 6}, {29, 10, 7, 6}, {53, 4, 13, 5},
                                         {31, 6, 5, 6}, {43, 8, 7, 6}}) {
    CAPTURE(c.ell);
    CAPTURE(c.k);
    CAPTURE(c.p);
    auto ex = ManinSymbolSpace::build(c.ell, c.k);
    auto lo = LocalSymbolSpace::build(c.ell, c.k, c.p, c.N);
    const u64 mod = lo->modulus();
    for (Subspace s : {Subspace::Full, Subspace::Cuspidal, Subspace::CuspidalPlus}) {
      REQUIRE(lo->dim(s) == ex->dim(s));
      for (u64 q : {2, 3, 5}) {
        const OperatorMatrix te = ex->hecke_operator(q, s);
        const ModMatrix tl = lo->hecke_operator(q, s);
        // Traces of powers are basis independent.
        ModMatrix pe = reduce_op(te, mod), pl = tl;
        for (int j = 0; j < 4; ++j) {
          CHECK(trace(pe) == trace(pl));
          pe = pe * reduce_op(te, mod);
          pl = pl * tl;
        }
        // Smith valuations of T_q - a depend on the lattice.
        for (long a : {0L, 1L + static_cast<long>(q), 2L, -1L}) {
          ZMatrix e = shifted(te.matrix, mpz_class(-a));
          ModMatrix l = tl.shifted(arith::reduce(-a, mod));
          CHECK(p_snf(e, c.p, c.N) == sorted(local_snf(l, c.p, c.N)));
        }
      }
      if (s != Subspace::Full) {
        const ModMatrix w = lo->atkin_lehner(s);
        const ModMatrix we = reduce_op(ex->atkin_lehner(s), mod);
        CHECK(trace(w) == trace(we));
        CHECK(w * w == ModMatrix::identity(w.rows(), mod));
        CHECK(sorted(local_snf(w.shifted(1), c.p, c.N)) == sorted(local_snf(we.shifted(1), c.p, c.N)));
      }
    }
  }
}

TEST_CASE("local space carries the Eisenstein congruence") {
  // Level 11, p = 5: a_q = 1 + q mod 5 on the plus part, w = -1.
  auto lo = LocalSymbolSpace::build(11, 2, 5, 8);
  for (u64 q : {2, 3, 7, 13}) {
    const ModMatrix t = lo->hecke_operator(q, Subspace::CuspidalPlus);
    CHECK((t(0, 0) + 5 * 5 * 5 * 5 * 5 * 5 * 5 * 5 - 1 - q) % 5 == 0);
  }
  CHECK(lo->atkin_lehner(Subspace::CuspidalPlus)(0, 0) == lo->modulus() - 1);
}
