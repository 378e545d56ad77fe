#include <doctest.h>

#include <random>

#include "eisrank/arith.hpp"
#include "eisrank/hecke.hpp"

using namespace eisrank;
using namespace eisrank::hecke;

namespace {

HeckeAlgebraData global_algebra(u64 ell, unsigned k) {
  return build_hecke_algebra(*modsym::ManinSymbolSpace::build(ell, k));
}

LocalOperators local_ops(u64 p, u64 ell, unsigned k) {
  return local_operators(*modsym::LocalSymbolSpace::build(ell, k, p, default_precision(p)));
}

// Random matrix in GL_n(Z/m) with p-unit determinant: unit lower times unit upper.
ModMatrix random_unimodular(std::size_t n, u64 m, std::mt19937_64& rng) {
  std::uniform_int_distribution<u64> dist(0, m - 1);
  ModMatrix lo = ModMatrix::identity(n, m), up = ModMatrix::identity(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      lo(i, j) = dist(rng);
      up(j, i) = dist(rng);
    }
  return lo * up;
}

ModMatrix inverse_unimodular(const ModMatrix& a, u64 p, unsigned N) {
  // Kernel vectors (x, y) of [a | -I] satisfy a x = y.
  const std::size_t n = a.rows();
  const u64 m = a.modulus();
  ModMatrix st(n, 2 * n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) st(i, j) = a(i, j);
    st(i, n + i) = m - 1;
  }
  std::vector<std::size_t> cols;
  auto kern = unit_split_kernel(st, p, N, cols);
  REQUIRE(kern.size() == n);
  // free columns in the y block make y = e_j
  for (std::size_t j = 0; j < n; ++j) REQUIRE(cols[j] == n + j);
  ModMatrix x(n, n, m);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) x(i, j) = kern[j][i];
  return x;
}

}  // namespace

TEST_CASE("generator sets") {
  auto g = GeneratorSet::for_level(11, 2);
  REQUIRE(g.size() == 2);
  CHECK(g.names[0] == "T2");
  CHECK(g.names[1] == "w");
  CHECK(g.eisenstein_eigenvalue(0) == 3);
  CHECK(g.eisenstein_eigenvalue(1) == -1);
  auto g4 = GeneratorSet::for_level(29, 4);
  CHECK(g4.size() == 5);  // 2, 3, 5, 7 and w
  CHECK(g4.eisenstein_eigenvalue(1) == 28);
  CHECK(default_precision(5) == 24);
  CHECK(default_precision(7) == 20);
  CHECK(default_precision(13) == 15);
}

TEST_CASE("global hecke algebras at small level") {
  const auto a11 = global_algebra(11, 2);
  CHECK(a11.rank() == 1);
  CHECK(a11.sturm_bound == 2);
  const auto a4 = global_algebra(11, 4);
  CHECK(a4.rank() == 2);  // dim S_4(11) = 2

  for (const auto* a : {&a11, &a4}) {
    // 1 is in the algebra and the coordinates of 1 reproduce the identity
    ZMatrix sum(a->basis.front().rows(), a->basis.front().cols());
    for (std::size_t i = 0; i < a->rank(); ++i) sum = sum + scaled(a->basis[i], a->one[i]);
    CHECK(sum == ZMatrix::identity(sum.rows()));
    // commutative structure constants
    for (std::size_t i = 0; i < a->rank(); ++i)
      for (std::size_t j = 0; j < a->rank(); ++j) CHECK(a->mult_table[i][j] == a->mult_table[j][i]);
  }

  // X_0(11): T_2 = -2, w = -1 (the eigenvalue of w is the negated root number)
  CHECK(a11.basis[0] == ZMatrix::identity(1));
  CHECK(a11.eis_generators[0] == ZVector{-5});
  CHECK(a11.eis_generators[1] == ZVector{0});
  CHECK(eisenstein_rank(5, a11) == 1);
  CHECK(eisenstein_rank(7, a11) == 0);  // -2 != 3 mod 7
  CHECK(eisenstein_index(5, a11) == 1);
  CHECK(min_generators_eis(5, a11) == 1);
  CHECK(tangent_dim_T(5, a11, 1) == 1);
  CHECK(eisenstein_rank(5, a4) <= a4.rank());
}

TEST_CASE("weight 2 index against the numerator of (ell - 1)/12") {
  // Mazur: T/I is cyclic of order num((ell - 1)/12).
  for (auto [p, ell] : std::vector<std::pair<u64, u64>>{{5, 11}, {7, 29}, {5, 31}, {5, 41}, {7, 43}, {13, 53}, {5, 101}}) {
    CAPTURE(p);
    CAPTURE(ell);
    mpq_class q(static_cast<long>(ell - 1), 12);
    q.canonicalize();
    const unsigned expected = arith::p_adic_valuation(q.get_num(), p);
    const auto a = global_algebra(ell, 2);
    CHECK(eisenstein_index(p, a) == expected);
    const auto rep = eisenstein_local_report(local_ops(p, ell, 2));
    CHECK(rep.index_valuation == expected);
    CHECK(rep.min_gens == 1);
  }
}

TEST_CASE("p-local pipeline agrees with the global algebra") {
  struct Pt {
    u64 p, ell;
    unsigned k;
  };
  for (auto pt : {Pt{5, 11, 2}, Pt{7, 29, 2}, Pt{5, 31, 2}, Pt{13, 53, 2}, Pt{5, 11, 6}, Pt{7, 29, 4},
                  Pt{5, 31, 6}, Pt{13, 53, 4}, Pt{5, 11, 10}}) {
    CAPTURE(pt.p);
    CAPTURE(pt.ell);
    CAPTURE(pt.k);
    const auto a = global_algebra(pt.ell, pt.k);
    const auto rep = eisenstein_local_report(local_ops(pt.p, pt.ell, pt.k));
    CHECK(rep.rank == eisenstein_rank(pt.p, a));
    CHECK(rep.flatness_rank == rep.rank);
    REQUIRE(rep.nonzero_localization);
    const unsigned e = eisenstein_index(pt.p, a);
    CHECK(rep.index_valuation == e);
    CHECK(rep.index_snf == e);
    CHECK(rep.min_gens == min_generators_eis(pt.p, a));
    CHECK(rep.tangent_dim_T == tangent_dim_T(pt.p, a, e));
    CHECK(rep.min_gens >= 1);
    CHECK(rep.tangent_dim_T >= 1);
    CHECK(rep.tangent_dim_T <= 2);
  }
}

TEST_CASE("a non-principal point") {
  // wake unit is a 5th power at (5, 31, 6): rank 3, two generators
  const auto rep = eisenstein_local_report(local_ops(5, 31, 6));
  CHECK(rep.rank == 3);
  CHECK(rep.min_gens == 2);
  CHECK(rep.tangent_dim_T == 2);
}

TEST_CASE("localization is idempotent and commutes with reduction") {
  for (auto [p, ell, k] : std::vector<std::tuple<u64, u64, unsigned>>{{5, 31, 6}, {7, 43, 8}, {13, 53, 6}}) {
    const auto ops = local_ops(p, ell, k);
    const auto loc = localize(ops);
    const auto again = localize(loc);
    CHECK(again.dim() == loc.dim());
    CHECK(again.ops == loc.ops);
    CHECK(loc.dim() == eisenstein_rank(ops));
    CHECK(eisenstein_rank(loc) == loc.dim());
    CHECK(loc.dim() <= ops.dim());
    // E_g is topologically nilpotent on the localization
    for (std::size_t g = 0; g < loc.ops.size(); ++g) {
      ModMatrix e = loc.ops[g].shifted(loc.modulus() - loc.eigenvalues[g]);
      ModMatrix ep = e.pow(loc.dim());
      for (auto x : ep.entries()) CHECK(x % p == 0);
    }
  }
}

TEST_CASE("synthetic operators with known eigenvalues") {
  const u64 p = 7;
  const unsigned N = 6;
  const u64 m = arith::pow_mod_raw(p, N, ~0ULL);
  std::mt19937_64 rng(5);
  // two commuting diagonal operators, conjugated by a random unimodular matrix;
  // eigenvalue pairs congruent to (3, 5) mod 7 in slots 0, 1 and 3
  const std::vector<u64> d1{10, 3, 4, 52, 1}, d2{5, 12, 5, 54, 5};
  const ModMatrix u = random_unimodular(5, m, rng);
  const ModMatrix ui = inverse_unimodular(u, p, N);
  REQUIRE(u * ui == ModMatrix::identity(5, m));
  LocalOperators ops;
  ops.p = p;
  ops.precision = N;
  ops.names = {"a", "b"};
  for (const auto& d : {d1, d2}) {
    ModMatrix diag(5, 5, m);
    for (std::size_t i = 0; i < 5; ++i) diag(i, i) = d[i];
    ops.ops.push_back(u * diag * ui);
  }
  ops.eigenvalues = {3, 5};
  CHECK(ops.ops[0] * ops.ops[1] == ops.ops[1] * ops.ops[0]);
  CHECK(eisenstein_rank(ops) == 3);
  CHECK(flatness_rank(ops, 1) == 3);
  CHECK(flatness_rank(ops, 2) == 3);
  const auto loc = localize(ops);
  REQUIRE(loc.dim() == 3);
  auto trace = [](const ModMatrix& x) {
    u64 t = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) t = (t + x(i, i)) % x.modulus();
    return t;
  };
  CHECK(trace(loc.ops[0]) == 10 + 3 + 52);
  CHECK(trace(loc.ops[1]) == 5 + 12 + 54);
  CHECK(trace(loc.ops[0] * loc.ops[0]) == 100 + 9 + 52 * 52);
  // Z_7[a, b] has index > 1 in the split algebra Z_7^3, so the cyclic lattice is proper
  const auto alg = regular_representation(loc, 3);
  CHECK(alg.rank() == 3);
  CHECK(alg.lattice_log_index >= 1);
  CHECK(alg.precision == N - alg.lattice_log_index);
  CHECK(eisenstein_index(alg) == eisenstein_index_snf(alg));
}

TEST_CASE("a quadratic ramified local algebra") {
  // T acts on Z_p^2 as [[3, p], [1, 3]]: E = T - 3 satisfies E^2 = p, so the
  // algebra is Z_p[sqrt p], I = (E), T/I = F_p, one generator, tangent 1.
  const u64 p = 5;
  const unsigned N = 8;
  const u64 m = arith::pow_mod_raw(p, N, ~0ULL);
  LocalOperators ops;
  ops.p = p;
  ops.precision = N;
  ops.names = {"T", "S"};
  ops.ops = {ModMatrix(2, 2, m, {3, p, 1, 3}), ModMatrix(2, 2, m, {7, 2 * p, 2, 7})};  // S - 7 = 2E
  ops.eigenvalues = {3, 7};
  const auto rep = eisenstein_local_report(ops);
  CHECK(rep.rank == 2);
  CHECK(rep.index_valuation == 1);
  CHECK(rep.min_gens == 1);
  CHECK(rep.tangent_dim_T == 1);
  CHECK(rep.lattice_log_index == 0);
}

TEST_CASE("weight stabilization") {
  const auto w = weight_stabilization_check(5, 11, 4, 8);
  CHECK(w.equal);
  const auto w7 = weight_stabilization_check(7, 29, 4, 10);
  CHECK(w7.rank_k == w7.rank_k2);
  CHECK(w7.equal);
  CHECK_THROWS_AS(weight_stabilization_check(5, 11, 2, 6), ParameterError);
  CHECK_THROWS_AS(weight_stabilization_check(5, 11, 4, 6), ParameterError);
  CHECK_THROWS_AS(weight_stabilization_check(5, 1009, 4, 8), ResourceBoundError);
}

TEST_CASE("json round trips") {
  const auto ops = local_ops(7, 29, 4);
  const auto back = LocalOperators::from_json(nlohmann::json::parse(ops.to_json().dump()));
  CHECK(back.ops == ops.ops);
  CHECK(back.eigenvalues == ops.eigenvalues);
  CHECK(back.names == ops.names);
  const auto rep = eisenstein_local_report(ops);
  const auto rep2 = EisensteinLocalReport::from_json(nlohmann::json::parse(rep.to_json().dump()));
  CHECK(rep2.to_json() == rep.to_json());
  const auto a = global_algebra(11, 4);
  const auto j = a.to_json();
  CHECK(j.at("basis").size() == 2);
  CHECK(zmatrix_from_json(j.at("basis")[0]) == a.basis[0]);
}
