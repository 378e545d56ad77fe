#include "eisrank/hecke.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <random>

#include "eisrank/arith.hpp"

namespace eisrank::hecke {

using arith::add_mod;
using arith::mul_mod;
using arith::sub_mod;
using modsym::Subspace;

namespace {

u64 power(u64 p, unsigned n) {
  u64 m = 1;
  for (unsigned i = 0; i < n; ++i) m *= p;
  return m;
}

ModMatrix reduce_to(const ModMatrix& m, u64 mod) {
  std::vector<u64> e(m.entries());
  for (auto& x : e) x %= mod;
  return ModMatrix(m.rows(), m.cols(), mod, std::move(e));
}

std::vector<u64> column(const ModMatrix& m, std::size_t j) {
  std::vector<u64> v(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) v[i] = m(i, j);
  return v;
}

ModMatrix power_at_least(ModMatrix m, std::size_t n) {
  for (std::size_t e = 1; e < n; e *= 2) m = m * m;
  return m;
}

// Restricts commuting operators to their common generalized kernel after the
// shift by the eigenvalues (Fitting decomposition over Z/p^N, one operator at
// a time). Each restriction is read off the free columns of the kernel basis.
std::vector<ModMatrix> fitting_localize(std::vector<ModMatrix> ops, const std::vector<u64>& eig, u64 p,
                                        unsigned N) {
  const u64 mod = power(p, N);
  for (std::size_t g = 0; g < ops.size(); ++g) {
    const std::size_t d = ops.front().rows();
    if (d == 0) break;
    const ModMatrix e = power_at_least(ops[g].shifted(sub_mod(0, eig[g] % mod, mod)), d * N);
    std::vector<std::size_t> cols;
    const auto kern = unit_split_kernel(e, p, N, cols);
    if (kern.size() == d) continue;
    for (auto& h : ops) {
      ModMatrix r(kern.size(), kern.size(), mod);
      for (std::size_t j = 0; j < kern.size(); ++j) {
        const auto img = h.apply(kern[j]);
        for (std::size_t t = 0; t < kern.size(); ++t) r(t, j) = img[cols[t]];
      }
      h = std::move(r);
    }
  }
  return ops;
}

// ---- GF(p^7) for the flatness oracle ----

constexpr unsigned kExt = 7;
using Poly = std::vector<u64>;  // constant term first

void trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

Poly poly_mod(Poly a, const Poly& f, u64 p) {
  const u64 lead_inv = arith::inv_mod(f.back(), p);
  trim(a);
  while (a.size() >= f.size()) {
    const u64 c = mul_mod(a.back(), lead_inv, p);
    const std::size_t s = a.size() - f.size();
    for (std::size_t i = 0; i < f.size(); ++i) a[s + i] = sub_mod(a[s + i], mul_mod(c, f[i], p), p);
    trim(a);
  }
  return a;
}

Poly poly_mulmod(const Poly& a, const Poly& b, const Poly& f, u64 p) {
  if (a.empty() || b.empty()) return {};
  Poly c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] = add_mod(c[i + j], mul_mod(a[i], b[j], p), p);
  return poly_mod(std::move(c), f, p);
}

Poly poly_powmod(Poly a, u64 e, const Poly& f, u64 p) {
  Poly r{1};
  while (e) {
    if (e & 1) r = poly_mulmod(r, a, f, p);
    a = poly_mulmod(a, a, f, p);
    e >>= 1;
  }
  return r;
}

Poly poly_gcd(Poly a, Poly b, u64 p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = poly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

// Rabin's test for a prime degree: x^(p^7) = x mod f and gcd(x^p - x, f) = 1.
bool irreducible_deg7(const Poly& f, u64 p) {
  const Poly x{0, 1};
  Poly y = x;
  for (unsigned i = 0; i < kExt; ++i) {
    y = poly_powmod(y, p, f, p);
    if (i == 0) {
      Poly d = y;
      d.resize(std::max<std::size_t>(d.size(), 2), 0);
      d[1] = sub_mod(d[1], 1, p);
      if (poly_gcd(f, d, p).size() != 1) return false;
    }
  }
  trim(y);
  return y == x;
}

class Gf {
 public:
  using Elt = std::array<u64, kExt>;

  Gf(u64 p, std::mt19937_64& rng) : p_(p) {
    std::uniform_int_distribution<u64> dist(0, p - 1);
    for (;;) {
      Poly f(kExt + 1);
      for (unsigned i = 0; i < kExt; ++i) f[i] = dist(rng);
      f[kExt] = 1;
      if (f[0] != 0 && irreducible_deg7(f, p)) {
        for (unsigned i = 0; i < kExt; ++i) f_[i] = f[i];
        break;
      }
    }
    order_ = power(p, kExt);
  }

  Elt zero() const { return Elt{}; }
  bool is_zero(const Elt& a) const {
    return std::all_of(a.begin(), a.end(), [](u64 x) { return x == 0; });
  }
  Elt random(std::mt19937_64& rng) const {
    std::uniform_int_distribution<u64> dist(0, p_ - 1);
    Elt a;
    for (auto& x : a) x = dist(rng);
    return a;
  }
  Elt add(const Elt& a, const Elt& b) const {
    Elt c;
    for (unsigned i = 0; i < kExt; ++i) c[i] = add_mod(a[i], b[i], p_);
    return c;
  }
  Elt sub(const Elt& a, const Elt& b) const {
    Elt c;
    for (unsigned i = 0; i < kExt; ++i) c[i] = sub_mod(a[i], b[i], p_);
    return c;
  }
  Elt scale(const Elt& a, u64 s) const {
    Elt c;
    for (unsigned i = 0; i < kExt; ++i) c[i] = a[i] * s % p_;
    return c;
  }
  Elt mul(const Elt& a, const Elt& b) const {
    std::array<u64, 2 * kExt - 1> t{};
    for (unsigned i = 0; i < kExt; ++i)
      if (a[i])
        for (unsigned j = 0; j < kExt; ++j) t[i + j] += a[i] * b[j];
    for (auto& x : t) x %= p_;
    for (unsigned i = 2 * kExt - 2; i >= kExt; --i) {
      const u64 c = t[i];
      if (!c) continue;
      for (unsigned j = 0; j < kExt; ++j) t[i - kExt + j] = (t[i - kExt + j] + (p_ - c) * f_[j]) % p_;
    }
    Elt c;
    for (unsigned i = 0; i < kExt; ++i) c[i] = t[i];
    return c;
  }
  Elt inv(const Elt& a) const {
    if (is_zero(a)) throw NotAUnitError("zero has no inverse");
    Elt r{};
    r[0] = 1;
    Elt b = a;
    for (u64 e = order_ - 2; e; e >>= 1) {
      if (e & 1) r = mul(r, b);
      b = mul(b, b);
    }
    return r;
  }

 private:
  u64 p_;
  u64 order_ = 0;
  Elt f_{};  // x^7 = -sum f_i x^i
};

// Order of vanishing at 0 of det(xI - A) over GF(p^7): Hessenberg reduction,
// then the usual recurrence for the leading principal charpolys.
std::size_t charpoly_zero_order(const Gf& F, std::vector<std::vector<Gf::Elt>> h) {
  using Elt = Gf::Elt;
  const std::size_t n = h.size();
  for (std::size_t c = 0; c + 2 < n; ++c) {
    std::size_t piv = n;
    for (std::size_t i = c + 1; i < n; ++i)
      if (!F.is_zero(h[i][c])) {
        piv = i;
        break;
      }
    if (piv == n) continue;
    if (piv != c + 1) {
      std::swap(h[piv], h[c + 1]);
      for (std::size_t i = 0; i < n; ++i) std::swap(h[i][piv], h[i][c + 1]);
    }
    const Elt inv = F.inv(h[c + 1][c]);
    for (std::size_t i = c + 2; i < n; ++i) {
      if (F.is_zero(h[i][c])) continue;
      const Elt f = F.mul(h[i][c], inv);
      for (std::size_t j = c; j < n; ++j) h[i][j] = F.sub(h[i][j], F.mul(f, h[c + 1][j]));
      for (std::size_t r = 0; r < n; ++r) h[r][c + 1] = F.add(h[r][c + 1], F.mul(f, h[r][i]));
    }
  }
  // polys[j] = charpoly of the leading j x j block, constant term first.
  std::vector<std::vector<Elt>> polys(n + 1);
  Elt one = F.zero();
  one[0] = 1;
  polys[0] = {one};
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t c = j - 1;
    std::vector<Elt> next(j + 1, F.zero());
    for (std::size_t t = 0; t < polys[j - 1].size(); ++t) {
      next[t + 1] = F.add(next[t + 1], polys[j - 1][t]);
      next[t] = F.sub(next[t], F.mul(h[c][c], polys[j - 1][t]));
    }
    Elt prod = one;
    for (std::size_t i = c; i-- > 0;) {
      prod = F.mul(prod, h[i + 1][i]);
      if (F.is_zero(prod)) break;
      const Elt coef = F.mul(h[i][c], prod);
      for (std::size_t t = 0; t < polys[i].size(); ++t) next[t] = F.sub(next[t], F.mul(coef, polys[i][t]));
    }
    polys[j] = std::move(next);
  }
  std::size_t ord = 0;
  while (ord < n && F.is_zero(polys[n][ord])) ++ord;
  return ord;
}

std::uint64_t point_seed(u64 p, u64 ell, unsigned k) { return (p * 1000003ULL + ell) * 1009ULL + k; }

nlohmann::json strings(const ZVector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& x : v) a.push_back(x.get_str());
  return a;
}

nlohmann::json residues(const std::vector<u64>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (auto x : v) a.push_back(std::to_string(x));
  return a;
}

std::vector<u64> parse_residues(const nlohmann::json& a) {
  std::vector<u64> v;
  for (const auto& x : a) v.push_back(std::stoull(x.get<std::string>()));
  return v;
}

// Multiplication by x (basis coordinates) in the global algebra.
ZMatrix left_mult(const HeckeAlgebraData& a, const ZVector& x) {
  const std::size_t n = a.rank();
  ZMatrix m(n, n);
  for (std::size_t t = 0; t < n; ++t) {
    if (x[t] == 0) continue;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t s = 0; s < n; ++s) m(s, j) += x[t] * a.mult_table[t][j][s];
  }
  return m;
}

ZVector flatten(const ZMatrix& m) { return m.entries(); }

}  // namespace

// ---- generators and the global algebra ----

GeneratorSet GeneratorSet::for_level(u64 ell, unsigned k) {
  GeneratorSet g;
  g.k = k;
  for (u64 q : modsym::hecke_generator_primes(ell, k)) {
    g.names.push_back("T" + std::to_string(q));
    g.primes.push_back(q);
  }
  g.names.push_back("w");
  g.primes.push_back(0);
  return g;
}

mpz_class GeneratorSet::eisenstein_eigenvalue(std::size_t i) const {
  if (primes.at(i) == 0) return -1;
  mpz_class q = static_cast<unsigned long>(primes[i]), r;
  mpz_pow_ui(r.get_mpz_t(), q.get_mpz_t(), k - 1);
  return r + 1;
}

HeckeAlgebraData build_hecke_algebra(const modsym::ManinSymbolSpace& space) {
  HeckeAlgebraData a;
  a.ell = space.level();
  a.k = space.weight();
  a.sturm_bound = modsym::sturm_bound(a.ell, a.k);
  const std::size_t n = space.dim(Subspace::CuspidalPlus);
  if (n == 0) return a;  // empty-algebra sentinel

  const auto gens = GeneratorSet::for_level(a.ell, a.k);
  std::vector<ZMatrix> mats;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    auto op = gens.primes[i] ? space.hecke_operator(gens.primes[i], Subspace::CuspidalPlus)
                             : space.atkin_lehner(Subspace::CuspidalPlus);
    mpz_class lambda = gens.eisenstein_eigenvalue(i);
    if (!op.integral()) {
      if (gens.primes[i] != 0) throw InternalConsistencyError("non-integral " + op.name);
      lambda *= op.denominator;
    }
    a.generator_names.push_back(gens.names[i]);
    mats.push_back(op.matrix);
    a.eigenvalues.push_back(lambda);
  }
  auto closure = algebra_closure(mats);
  a.basis = std::move(closure.basis);
  a.mult_table = std::move(closure.mult_table);

  std::vector<ZVector> rows;
  for (const auto& b : a.basis) rows.push_back(flatten(b));
  const ZMatrix h = ZMatrix::from_rows(rows, n * n);
  auto one = hnf_coordinates(h, flatten(ZMatrix::identity(n)));
  if (!one) throw InternalConsistencyError("identity missing from the Hecke algebra");
  a.one = *one;
  for (std::size_t i = 0; i < mats.size(); ++i) {
    auto c = hnf_coordinates(h, flatten(shifted(mats[i], mpz_class(-a.eigenvalues[i]))));
    if (!c) throw InternalConsistencyError("generator missing from the Hecke algebra");
    a.eis_generators.push_back(*c);
  }
  return a;
}

nlohmann::json HeckeAlgebraData::to_json() const {
  nlohmann::json j;
  j["ell"] = ell;
  j["k"] = k;
  j["sturm_bound"] = sturm_bound;
  j["generator_names"] = generator_names;
  j["basis"] = nlohmann::json::array();
  for (const auto& b : basis) j["basis"].push_back(eisrank::to_json(b));
  j["mult_table"] = nlohmann::json::array();
  for (const auto& row : mult_table) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& v : row) r.push_back(strings(v));
    j["mult_table"].push_back(r);
  }
  j["one"] = strings(one);
  j["eis_generators"] = nlohmann::json::array();
  for (const auto& v : eis_generators) j["eis_generators"].push_back(strings(v));
  j["eigenvalues"] = strings(eigenvalues);
  return j;
}

// ---- local operators ----

u64 LocalOperators::modulus() const { return power(p, precision); }

nlohmann::json LocalOperators::to_json() const {
  nlohmann::json j;
  j["ell"] = ell;
  j["k"] = k;
  j["p"] = p;
  j["precision"] = precision;
  j["names"] = names;
  j["ops"] = nlohmann::json::array();
  for (const auto& m : ops) j["ops"].push_back(eisrank::to_json(m));
  j["eigenvalues"] = residues(eigenvalues);
  return j;
}

LocalOperators LocalOperators::from_json(const nlohmann::json& j) {
  LocalOperators o;
  o.ell = j.at("ell").get<u64>();
  o.k = j.at("k").get<unsigned>();
  o.p = j.at("p").get<u64>();
  o.precision = j.at("precision").get<unsigned>();
  o.names = j.at("names").get<std::vector<std::string>>();
  for (const auto& m : j.at("ops")) o.ops.push_back(modmatrix_from_json(m));
  o.eigenvalues = parse_residues(j.at("eigenvalues"));
  if (o.ops.size() != o.names.size() || o.eigenvalues.size() != o.names.size())
    throw InvalidRingError("operator list is inconsistent");
  for (const auto& m : o.ops)
    if (m.modulus() != o.modulus() || m.rows() != o.dim() || m.cols() != o.dim())
      throw InvalidRingError("operator shape or modulus mismatch");
  return o;
}

LocalOperators local_operators(const modsym::LocalSymbolSpace& space) {
  LocalOperators o;
  o.ell = space.level();
  o.k = space.weight();
  o.p = space.prime();
  o.precision = space.precision();
  const u64 mod = space.modulus();
  const auto gens = GeneratorSet::for_level(o.ell, o.k);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    o.names.push_back(gens.names[i]);
    o.ops.push_back(gens.primes[i] ? space.hecke_operator(gens.primes[i], Subspace::CuspidalPlus)
                                   : space.atkin_lehner(Subspace::CuspidalPlus));
    o.eigenvalues.push_back(arith::reduce(gens.eisenstein_eigenvalue(i), mod));
  }
  return o;
}

unsigned default_precision(u64 p) {
  const u64 limit = 1ULL << 58;
  unsigned n = 0;
  for (u64 m = 1; m <= (limit - 1) / p; m *= p) ++n;
  return n;
}

std::size_t eisenstein_rank(const LocalOperators& ops) {
  if (ops.dim() == 0) return 0;
  std::vector<ModMatrix> m;
  std::vector<u64> eig;
  for (std::size_t i = 0; i < ops.ops.size(); ++i) {
    m.push_back(reduce_to(ops.ops[i], ops.p));
    eig.push_back(ops.eigenvalues[i] % ops.p);
  }
  return fitting_localize(std::move(m), eig, ops.p, 1).front().rows();
}

LocalOperators localize(const LocalOperators& ops) {
  LocalOperators out = ops;
  if (ops.dim() == 0) return out;
  out.ops = fitting_localize(ops.ops, ops.eigenvalues, ops.p, ops.precision);
  return out;
}

// ---- regular representation ----

u64 RegularAlgebra::modulus() const { return power(p, precision); }

ModMatrix RegularAlgebra::eisenstein_generator(std::size_t i) const {
  const u64 mod = modulus();
  return mult.at(i).shifted(sub_mod(0, eigenvalues.at(i) % mod, mod));
}

RegularAlgebra RegularAlgebra::truncated(unsigned n) const {
  if (n == 0 || n > precision) throw ParameterError("truncation beyond the working precision");
  RegularAlgebra t = *this;
  t.precision = n;
  const u64 mod = t.modulus();
  for (auto& m : t.mult) m = reduce_to(m, mod);
  for (auto& x : t.eigenvalues) x %= mod;
  for (auto& x : t.one) x %= mod;
  return t;
}

nlohmann::json RegularAlgebra::to_json() const {
  nlohmann::json j;
  j["p"] = p;
  j["precision"] = precision;
  j["names"] = names;
  j["mult"] = nlohmann::json::array();
  for (const auto& m : mult) j["mult"].push_back(eisrank::to_json(m));
  j["eigenvalues"] = residues(eigenvalues);
  j["one"] = residues(one);
  j["lattice_log_index"] = lattice_log_index;
  return j;
}

RegularAlgebra regular_representation(const LocalOperators& loc, std::uint64_t seed) {
  const std::size_t r = loc.dim();
  if (r == 0) throw ParameterError("regular representation of the zero algebra");
  const u64 p = loc.p, mod = loc.modulus();
  const unsigned N = loc.precision;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<u64> dist(0, mod - 1);

  std::optional<LocalModule> best;
  std::vector<u64> best_y;
  unsigned best_c = 0;
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::vector<u64> y(r);
    for (auto& x : y) x = dist(rng);
    LocalModule L(r, p, N);
    L.add(y);
    for (bool grew = true; grew;) {
      grew = false;
      const auto rows = L.rows();
      for (const auto& b : loc.ops)
        for (const auto& v : rows) grew |= L.add(b.apply(v));
    }
    if (L.rows().size() < r) continue;
    bool full = true;
    for (std::size_t i = 0; i < r; ++i) full &= L.pivot_cols()[i] == i;
    if (!full) continue;
    unsigned c = 0;
    for (std::size_t i = 0; i < r; ++i) c += L.pivot_vals()[i];
    if (!best || c < best_c) {
      best = L;
      best_y = y;
      best_c = c;
    }
    if (c == 0) break;
  }
  if (!best) throw InternalConsistencyError("no cyclic vector: multiplicity one fails");
  if (best_c >= N) throw InternalConsistencyError("cyclic lattice index exhausts the precision");

  // Rows of a full-rank Howell basis may include p-multiples of earlier rows;
  // the first r rows (one per pivot column) form a basis.
  const auto& rows = best->rows();
  const auto& vals = best->pivot_vals();
  auto solve = [&](std::vector<u64> v) {
    std::vector<u64> u(r);
    for (std::size_t i = 0; i < r; ++i) {
      if (v[i] == 0) continue;
      const u64 pa = power(p, vals[i]);
      if (v[i] % pa != 0) throw InternalConsistencyError("vector outside the cyclic lattice");
      u[i] = v[i] / pa;
      for (std::size_t j = i; j < r; ++j) v[j] = sub_mod(v[j], mul_mod(u[i], rows[i][j], mod), mod);
    }
    for (auto x : v)
      if (x != 0) throw InternalConsistencyError("vector outside the cyclic lattice");
    return u;
  };

  RegularAlgebra a;
  a.p = p;
  a.precision = N - best_c;
  a.names = loc.names;
  a.lattice_log_index = best_c;
  const u64 amod = a.modulus();
  for (std::size_t g = 0; g < loc.ops.size(); ++g) {
    ModMatrix m(r, r, amod);
    for (std::size_t j = 0; j < r; ++j) {
      const auto u = solve(loc.ops[g].apply(rows[j]));
      for (std::size_t i = 0; i < r; ++i) m(i, j) = u[i] % amod;
    }
    a.mult.push_back(std::move(m));
    a.eigenvalues.push_back(loc.eigenvalues[g] % amod);
  }
  a.one = solve(best_y);
  for (auto& x : a.one) x %= amod;
  for (std::size_t g = 0; g < a.mult.size(); ++g)
    for (std::size_t h = g + 1; h < a.mult.size(); ++h)
      if (!(a.mult[g] * a.mult[h] == a.mult[h] * a.mult[g]))
        throw CommutativityViolation("localized operators do not commute");
  return a;
}

std::size_t flatness_rank(const LocalOperators& ops, std::uint64_t seed) {
  const std::size_t n = ops.dim();
  if (n == 0) return 0;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const u64 p = ops.p;
  Gf F(p, rng);
  std::vector<std::vector<Gf::Elt>> theta(n, std::vector<Gf::Elt>(n, F.zero()));
  for (std::size_t g = 0; g < ops.ops.size(); ++g) {
    const auto c = F.random(rng);
    const u64 lam = ops.eigenvalues[g] % p;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        u64 x = ops.ops[g](i, j) % p;
        if (i == j) x = sub_mod(x, lam, p);
        if (x) theta[i][j] = F.add(theta[i][j], F.scale(c, x));
      }
  }
  return charpoly_zero_order(F, std::move(theta));
}

// ---- Eisenstein ideal invariants ----

namespace {

LocalModule ideal_module(const RegularAlgebra& a) {
  LocalModule I(a.rank(), a.p, a.precision);
  for (std::size_t g = 0; g < a.mult.size(); ++g) {
    const ModMatrix e = a.eisenstein_generator(g);
    for (std::size_t j = 0; j < a.rank(); ++j) I.add(column(e, j));
  }
  return I;
}

void require_room(const RegularAlgebra& a, unsigned e) {
  if (e + 3 > a.precision)
    throw InternalConsistencyError("precision " + std::to_string(a.precision) + " too small for index " +
                                   std::to_string(e));
}

unsigned min_gens_at(const RegularAlgebra& a) {
  const LocalModule I = ideal_module(a);
  LocalModule J(a.rank(), a.p, a.precision);
  const u64 mod = a.modulus();
  std::vector<ModMatrix> es;
  for (std::size_t g = 0; g < a.mult.size(); ++g) es.push_back(a.eisenstein_generator(g));
  for (const auto& v : I.rows()) {
    std::vector<u64> pv(v);
    for (auto& x : pv) x = mul_mod(x, a.p, mod);
    J.add(pv);
    for (const auto& e : es) J.add(e.apply(v));
  }
  return I.log_order() - J.log_order();
}

unsigned tangent_at(const RegularAlgebra& a, unsigned e) {
  const std::size_t r = a.rank();
  const u64 mod = a.modulus(), pe = power(a.p, e);
  const LocalModule I = ideal_module(a);
  auto lift = [&](const std::vector<u64>& v, u64 last) {
    std::vector<u64> out(v);
    out.push_back(last % mod);
    return out;
  };
  auto times_p = [&](std::vector<u64> v) {
    for (auto& x : v) x = mul_mod(x, a.p, mod);
    return v;
  };
  std::vector<u64> zero(r, 0);

  LocalModule R(r + 1, a.p, a.precision);
  for (const auto& v : I.rows()) R.add(lift(v, 0));
  R.add(lift(a.one, 1));
  R.add(lift(zero, pe));

  std::vector<ModMatrix> es;
  for (std::size_t g = 0; g < a.mult.size(); ++g) es.push_back(a.eisenstein_generator(g));

  LocalModule m(r + 1, a.p, a.precision);
  for (const auto& v : R.rows()) m.add(times_p(v));
  for (const auto& E : es)
    for (std::size_t j = 0; j < r; ++j) m.add(lift(column(E, j), 0));
  m.add(lift(zero, pe));

  // m^2 + pR = pR + (I^2, 0)
  LocalModule sq(r + 1, a.p, a.precision);
  for (const auto& v : R.rows()) sq.add(times_p(v));
  for (const auto& E : es)
    for (const auto& v : I.rows()) sq.add(lift(E.apply(v), 0));
  return m.log_order() - sq.log_order();
}

}  // namespace

unsigned eisenstein_index(const RegularAlgebra& a) { return ideal_module(a).log_index(); }

unsigned eisenstein_index_snf(const RegularAlgebra& a) {
  const std::size_t r = a.rank();
  ModMatrix m(r, r * a.mult.size(), a.modulus());
  for (std::size_t g = 0; g < a.mult.size(); ++g) {
    const ModMatrix e = a.eisenstein_generator(g);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) m(i, g * r + j) = e(i, j);
  }
  unsigned s = 0;
  for (unsigned v : local_snf(m, a.p, a.precision)) s += v;
  return s;
}

unsigned min_generators_eis(const RegularAlgebra& a, unsigned e) {
  require_room(a, e);
  const unsigned lo = min_gens_at(a.truncated(e + 2));
  const unsigned hi = min_gens_at(a.truncated(e + 3));
  if (lo != hi) throw InternalConsistencyError("minimal generator count does not stabilize");
  return lo;
}

unsigned tangent_dim_T(const RegularAlgebra& a, unsigned e) {
  require_room(a, e);
  const unsigned lo = tangent_at(a.truncated(e + 2), e);
  const unsigned hi = tangent_at(a.truncated(e + 3), e);
  if (lo != hi) throw InternalConsistencyError("tangent dimension does not stabilize");
  return lo;
}

// ---- report ----

nlohmann::json EisensteinLocalReport::to_json() const {
  return {{"rank", rank},
          {"index_valuation", index_valuation},
          {"min_gens", min_gens},
          {"tangent_dim_T", tangent_dim_T},
          {"nonzero_localization", nonzero_localization},
          {"plus_dim", plus_dim},
          {"precision", precision},
          {"lattice_log_index", lattice_log_index},
          {"flatness_rank", flatness_rank},
          {"index_snf", index_snf}};
}

EisensteinLocalReport EisensteinLocalReport::from_json(const nlohmann::json& j) {
  EisensteinLocalReport r;
  r.rank = j.at("rank").get<std::size_t>();
  r.index_valuation = j.at("index_valuation").get<unsigned>();
  r.min_gens = j.at("min_gens").get<unsigned>();
  r.tangent_dim_T = j.at("tangent_dim_T").get<unsigned>();
  r.nonzero_localization = j.at("nonzero_localization").get<bool>();
  r.plus_dim = j.at("plus_dim").get<std::size_t>();
  r.precision = j.at("precision").get<unsigned>();
  r.lattice_log_index = j.at("lattice_log_index").get<unsigned>();
  r.flatness_rank = j.at("flatness_rank").get<std::size_t>();
  r.index_snf = j.at("index_snf").get<unsigned>();
  return r;
}

EisensteinLocalReport eisenstein_local_report(const LocalOperators& ops, RegularAlgebra* algebra) {
  EisensteinLocalReport rep;
  rep.plus_dim = ops.dim();
  rep.precision = ops.precision;
  rep.rank = eisenstein_rank(ops);
  const auto seed = point_seed(ops.p, ops.ell, ops.k);
  rep.flatness_rank = flatness_rank(ops, seed);
  if (rep.flatness_rank != rep.rank)
    throw InternalConsistencyError("flatness oracle gives " + std::to_string(rep.flatness_rank) +
                                   ", mod-p localization gives " + std::to_string(rep.rank));
  if (rep.rank == 0) return rep;
  rep.nonzero_localization = true;

  const auto loc = localize(ops);
  if (loc.dim() != rep.rank) throw InternalConsistencyError("localization rank differs from the mod-p rank");
  const auto alg = regular_representation(loc, seed);
  rep.lattice_log_index = alg.lattice_log_index;
  rep.index_valuation = eisenstein_index(alg);
  rep.index_snf = eisenstein_index_snf(alg);
  if (rep.index_valuation != rep.index_snf)
    throw InternalConsistencyError("ideal index and Smith form index disagree");
  if (rep.index_valuation == 0) throw InternalConsistencyError("Eisenstein ideal is the unit ideal");
  rep.min_gens = min_generators_eis(alg, rep.index_valuation);
  rep.tangent_dim_T = tangent_dim_T(alg, rep.index_valuation);
  if (algebra) *algebra = alg;
  return rep;
}

// ---- global oracles ----

RegularAlgebra regular_algebra(u64 p, unsigned n, const HeckeAlgebraData& a) {
  if (a.rank() == 0) throw ParameterError("empty Hecke algebra");
  RegularAlgebra out;
  out.p = p;
  out.precision = n;
  out.names = a.generator_names;
  const u64 mod = out.modulus();
  for (std::size_t g = 0; g < a.eis_generators.size(); ++g) {
    ZVector x = a.eis_generators[g];
    for (std::size_t t = 0; t < x.size(); ++t) x[t] += a.eigenvalues[g] * a.one[t];
    out.mult.push_back(ModMatrix::reduce(left_mult(a, x), mod));
    out.eigenvalues.push_back(arith::reduce(a.eigenvalues[g], mod));
  }
  for (const auto& x : a.one) out.one.push_back(arith::reduce(x, mod));
  return out;
}

std::size_t eisenstein_rank(u64 p, const HeckeAlgebraData& a) {
  if (a.rank() == 0) return 0;
  const auto reg = regular_algebra(p, 1, a);
  return fitting_localize(reg.mult, reg.eigenvalues, p, 1).front().rows();
}

unsigned eisenstein_index(u64 p, const HeckeAlgebraData& a) {
  const std::size_t n = a.rank();
  ZMatrix m(n, n * a.eis_generators.size());
  for (std::size_t g = 0; g < a.eis_generators.size(); ++g) {
    const ZMatrix e = left_mult(a, a.eis_generators[g]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, g * n + j) = e(i, j);
  }
  unsigned s = 0;
  for (const auto& d : snf(m).invariant_factors) {
    if (d == 0) throw InternalConsistencyError("Eisenstein ideal has infinite index");
    s += arith::p_adic_valuation(d, p);
  }
  return s;
}

unsigned min_generators_eis(u64 p, const HeckeAlgebraData& a) {
  const unsigned e = eisenstein_index(p, a);
  return min_generators_eis(regular_algebra(p, e + 3, a), e);
}

unsigned tangent_dim_T(u64 p, const HeckeAlgebraData& a, unsigned e) {
  return tangent_dim_T(regular_algebra(p, e + 3, a), e);
}

WeightStabilization weight_stabilization_check(u64 p, u64 ell, unsigned k, unsigned k2, u64 resource_bound) {
  if (k <= 2 || k2 <= k || (k2 - k) % (p - 1) != 0)
    throw ParameterError("weight stabilization needs 2 < k < k2 with k2 = k mod p-1");
  if (static_cast<u64>(k2) * (ell + 1) > resource_bound)
    throw ResourceBoundError("k(ell+1) = " + std::to_string(static_cast<u64>(k2) * (ell + 1)) +
                             " exceeds the resource bound " + std::to_string(resource_bound));
  WeightStabilization w;
  w.rank_k = eisenstein_rank(local_operators(*modsym::LocalSymbolSpace::build(ell, k, p, 1, resource_bound)));
  w.rank_k2 = eisenstein_rank(local_operators(*modsym::LocalSymbolSpace::build(ell, k2, p, 1, resource_bound)));
  w.equal = w.rank_k == w.rank_k2;
  return w;
}

}  // namespace eisrank::hecke
