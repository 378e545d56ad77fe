#include <algorithm>

#include "eisrank/arith.hpp"
#include "eisrank/modsym.hpp"
#include "modsym_internal.hpp"

namespace eisrank::modsym {

namespace {

using arith::add_mod;
using arith::mul_mod;
using arith::sub_mod;
using u128 = unsigned __int128;

using ModRow = std::vector<std::pair<std::size_t, u64>>;  // sorted by column

// x - f*y mod m.
ModRow axpy(const ModRow& x, u64 f, const ModRow& y, u64 m) {
  ModRow out;
  out.reserve(x.size() + y.size());
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
      out.push_back(x[i++]);
    } else if (i == x.size() || y[j].first < x[i].first) {
      u64 v = sub_mod(0, mul_mod(f, y[j].second, m), m);
      if (v) out.emplace_back(y[j].first, v);
      ++j;
    } else {
      u64 v = sub_mod(x[i].second, mul_mod(f, y[j].second, m), m);
      if (v) out.emplace_back(x[i].first, v);
      ++i;
      ++j;
    }
  }
  return out;
}

u64 reduce128(__int128 x, u64 m) {
  __int128 r = x % static_cast<__int128>(m);
  if (r < 0) r += m;
  return static_cast<u64>(r);
}

}  // namespace

std::shared_ptr<const LocalSymbolSpace> LocalSymbolSpace::build(u64 ell, unsigned k, u64 p, unsigned precision,
                                                                u64 resource_bound) {
  if (static_cast<u64>(k) * (ell + 1) > resource_bound)
    throw ResourceBoundError("k(ell+1) = " + std::to_string(static_cast<u64>(k) * (ell + 1)) +
                             " exceeds the resource bound " + std::to_string(resource_bound));
  if (!arith::is_prime(p) || p < 5) throw ParameterError("p must be a prime >= 5");
  if (p == ell) throw ParameterError("p must differ from ell");
  if (precision == 0) throw ParameterError("precision must be positive");
  u64 mod = 1;
  for (unsigned i = 0; i < precision; ++i) {
    if (mod > (1ULL << 58) / p) throw ParameterError("p^N must stay below 2^58");
    mod *= p;
  }
  auto sp = std::shared_ptr<LocalSymbolSpace>(new LocalSymbolSpace(ell, k));
  sp->p_ = p;
  sp->N_ = precision;
  sp->mod_ = mod;
  sp->solve();
  sp->build_subspaces();
  sp->check();
  internal::note_build();
  return sp;
}

void LocalSymbolSpace::solve() {
  // Relations are eliminated modulo p^M with M above the target precision:
  // when p-torsion shows up the leftover rows are divided by their content,
  // which costs digits at the top.
  unsigned M = 0;
  u64 m = 1;
  while (m <= (1ULL << 62) / p_) {
    m *= p_;
    ++M;
  }
  unsigned lost = 0;
  u64 valid = m;  // residues are only meaningful modulo this
  const std::size_t nclass = pres_.num_classes();
  std::vector<ModRow> pivrows;  // normalized: pivot coefficient 1
  std::vector<std::size_t> pivcol;
  std::vector<long> pivot_of(nclass, -1);

  auto reduce = [&](ModRow& row) {
    for (;;) {
      long best = -1;
      std::size_t at = 0;
      for (std::size_t t = 0; t < row.size(); ++t) {
        long pr = pivot_of[row[t].first];
        if (pr >= 0 && (best < 0 || pr < best)) {
          best = pr;
          at = t;
        }
      }
      if (best < 0) break;
      row = axpy(row, row[at].second, pivrows[static_cast<std::size_t>(best)], m);
    }
    ModRow kept;
    for (const auto& e : row)
      if (e.second % valid) kept.push_back(e);
    row = std::move(kept);
  };

  std::vector<ModRow> pending;
  for (const auto& r : pres_.relations()) {
    ModRow row;
    for (auto [c, v] : r) {
      u64 x = arith::reduce(v, m);
      if (x) row.emplace_back(c, x);
    }
    pending.push_back(std::move(row));
  }
  for (;;) {
    bool progress = true;
    while (progress && !pending.empty()) {
      progress = false;
      std::vector<ModRow> later;
      for (auto& row : pending) {
        reduce(row);
        if (row.empty()) continue;
        std::size_t at = row.size();
        for (std::size_t t = row.size(); t-- > 0;)
          if (row[t].second % p_ != 0) {
            at = t;
            break;
          }
        if (at == row.size()) {
          later.push_back(std::move(row));
          continue;
        }
        u64 inv = arith::inv_mod(row[at].second, m);
        for (auto& e : row) e.second = mul_mod(e.second, inv, m);
        pivot_of[row[at].first] = static_cast<long>(pivrows.size());
        pivcol.push_back(row[at].first);
        pivrows.push_back(std::move(row));
        progress = true;
      }
      pending = std::move(later);
    }
    if (pending.empty()) break;
    // Every leftover row is p^a times a relation of the torsion-free quotient.
    unsigned worst = 0;
    for (auto& row : pending) {
      unsigned a = M;
      for (const auto& e : row) a = std::min(a, local_valuation(e.second % valid, p_, M));
      u64 pa = 1;
      for (unsigned i = 0; i < a; ++i) pa *= p_;
      for (auto& e : row) e.second /= pa;
      worst = std::max(worst, a);
    }
    lost += worst;
    if (lost + N_ > M)
      throw InternalConsistencyError("p-torsion in the relations exhausts the working precision at p=" +
                                     std::to_string(p_));
    valid = 1;
    for (unsigned i = 0; i < M - lost; ++i) valid *= p_;
  }

  std::vector<long> free_index(nclass, -1);
  std::vector<std::size_t> free_class;
  for (std::size_t c = 0; c < nclass; ++c)
    if (pivot_of[c] < 0) {
      free_index[c] = static_cast<long>(free_class.size());
      free_class.push_back(c);
    }
  const std::size_t D = free_class.size();
  std::vector<std::vector<u64>> expr(nclass);
  for (std::size_t c : free_class) {
    expr[c].assign(D, 0);
    expr[c][static_cast<std::size_t>(free_index[c])] = 1;
  }
  for (std::size_t t = pivrows.size(); t-- > 0;) {
    std::vector<u64> out(D, 0);
    for (const auto& [c, v] : pivrows[t]) {
      if (c == pivcol[t]) continue;
      const auto& x = expr[c];
      for (std::size_t j = 0; j < D; ++j)
        if (x[j]) out[j] = sub_mod(out[j], mul_mod(v, x[j], m), m);
    }
    expr[pivcol[t]] = std::move(out);
  }
  for (auto& v : expr)
    for (auto& x : v) x %= mod_;
  free_sym_.clear();
  for (std::size_t c : free_class) free_sym_.push_back(pres_.class_representative(c));

  sym_vec_.assign(pres_.num_symbols(), {});
  for (std::size_t s = 0; s < pres_.num_symbols(); ++s) {
    int c = pres_.symbol_class(s);
    if (c < 0) continue;
    sym_vec_[s] = expr[static_cast<std::size_t>(c)];
    if (pres_.symbol_sign(s) < 0)
      for (auto& x : sym_vec_[s]) x = x ? mod_ - x : 0;
  }
}

void LocalSymbolSpace::build_subspaces() {
  const std::size_t D = free_sym_.size();
  full_.rows.assign(D, std::vector<u64>(D, 0));
  full_.cols.resize(D);
  for (std::size_t i = 0; i < D; ++i) {
    full_.rows[i][i] = 1;
    full_.cols[i] = i;
  }

  // Transposed boundary: the cuspidal lattice is its kernel.
  ModMatrix bt(2, D, mod_);
  for (std::size_t i = 0; i < D; ++i) {
    auto b = pres_.boundary(free_sym_[i]);
    bt(0, i) = arith::reduce(b[0], mod_);
    bt(1, i) = arith::reduce(b[1], mod_);
  }
  auto kernel_basis = [&](const ModMatrix& a) {
    Basis b;
    b.rows = unit_split_kernel(a, p_, N_, b.cols);
    return b;
  };
  cusp_ = kernel_basis(bt);

  // Plus part: kernel of star - 1 in cuspidal coordinates.
  ModMatrix st = star_involution(Subspace::Cuspidal);
  ModMatrix a = st.shifted(mod_ - 1);
  Basis u = kernel_basis(a);
  plus_.rows.clear();
  plus_.cols.clear();
  for (std::size_t i = 0; i < u.rows.size(); ++i) {
    std::vector<u64> v(D, 0);
    for (std::size_t t = 0; t < u.rows[i].size(); ++t) {
      u64 f = u.rows[i][t];
      if (!f) continue;
      for (std::size_t c = 0; c < D; ++c)
        if (cusp_.rows[t][c]) v[c] = add_mod(v[c], mul_mod(f, cusp_.rows[t][c], mod_), mod_);
    }
    plus_.rows.push_back(std::move(v));
    plus_.cols.push_back(cusp_.cols[u.cols[i]]);
  }
}

const LocalSymbolSpace::Basis& LocalSymbolSpace::basis(Subspace s) const {
  switch (s) {
    case Subspace::Full: return full_;
    case Subspace::Cuspidal: return cusp_;
    case Subspace::CuspidalPlus: return plus_;
  }
  return full_;
}

std::size_t LocalSymbolSpace::dim(Subspace s) const { return basis(s).rows.size(); }

ModMatrix LocalSymbolSpace::restrict_operator(Subspace s, const SymbolMap& f) const {
  const Basis& b = basis(s);
  const std::size_t D = free_sym_.size(), r = b.rows.size(), n = pres_.num_symbols();
  // tab[t*r + j]: coordinate cols[j] of symbol t.
  std::vector<u64> tab(n * r, 0);
  for (std::size_t t = 0; t < n; ++t)
    if (!sym_vec_[t].empty())
      for (std::size_t j = 0; j < r; ++j) tab[t * r + j] = sym_vec_[t][b.cols[j]];

  std::vector<bool> needed(D, false);
  for (const auto& row : b.rows)
    for (std::size_t c = 0; c < D; ++c)
      if (row[c]) needed[c] = true;

  // img[c]: image of free symbol c read off at the solving columns.
  std::vector<std::vector<u64>> img(D);
  std::vector<u64> acc(n);
  std::vector<u128> sum(r);
  for (std::size_t c = 0; c < D; ++c) {
    if (!needed[c]) continue;
    std::fill(acc.begin(), acc.end(), 0);
    f(free_sym_[c], acc);
    std::fill(sum.begin(), sum.end(), 0);
    // Products stay below 2^116, so 1024 of them fit before reducing.
    unsigned pending = 0;
    for (std::size_t t = 0; t < n; ++t) {
      if (!acc[t] || sym_vec_[t].empty()) continue;
      const u64 x = acc[t];
      const u64* row = &tab[t * r];
      for (std::size_t j = 0; j < r; ++j) sum[j] += static_cast<u128>(x) * row[j];
      if (++pending == 1024) {
        for (auto& v : sum) v %= mod_;
        pending = 0;
      }
    }
    img[c].resize(r);
    for (std::size_t j = 0; j < r; ++j) img[c][j] = static_cast<u64>(sum[j] % mod_);
  }

  ModMatrix out(r, r, mod_);
  for (std::size_t j = 0; j < r; ++j) {
    std::fill(sum.begin(), sum.end(), 0);
    unsigned pending = 0;
    for (std::size_t c = 0; c < D; ++c) {
      const u64 x = b.rows[j][c];
      if (!x) continue;
      for (std::size_t t = 0; t < r; ++t) sum[t] += static_cast<u128>(x) * img[c][t];
      if (++pending == 1024) {
        for (auto& v : sum) v %= mod_;
        pending = 0;
      }
    }
    for (std::size_t t = 0; t < r; ++t) out(t, j) = static_cast<u64>(sum[t] % mod_);
  }
  return out;
}

ModMatrix LocalSymbolSpace::hecke_operator(u64 q, Subspace s) const {
  if (!arith::is_prime(q)) throw ParameterError("T_q needs q prime");
  if (q == level()) throw ParameterError("T_ell is not a generator; use the Atkin-Lehner operator");
  const auto hs = heilbronn_cremona(static_cast<i64>(q));
  std::vector<__int128> wide(pres_.num_symbols());
  return restrict_operator(s, [&](std::size_t sym, std::vector<u64>& acc) {
    std::fill(wide.begin(), wide.end(), 0);
    pres_.heilbronn_image(sym, hs, wide);
    for (std::size_t t = 0; t < wide.size(); ++t)
      if (wide[t]) acc[t] = reduce128(wide[t], mod_);
  });
}

ModMatrix LocalSymbolSpace::atkin_lehner(Subspace s) const {
  u64 scale = arith::pow_mod_raw(level() % mod_, weight() / 2 - 1, mod_);
  u64 inv = arith::inv_mod(scale, mod_);
  return restrict_operator(s, [&](std::size_t sym, std::vector<u64>& acc) {
    for (const auto& [t, c] : pres_.w_image(sym))
      acc[t] = add_mod(acc[t], mul_mod(arith::reduce(c, mod_), inv, mod_), mod_);
  });
}

ModMatrix LocalSymbolSpace::star_involution(Subspace s) const {
  return restrict_operator(s, [&](std::size_t sym, std::vector<u64>& acc) {
    for (const auto& [t, c] : pres_.star_image(sym)) acc[t] = add_mod(acc[t], arith::reduce(c, mod_), mod_);
  });
}

void LocalSymbolSpace::check() const {
  const u64 ell = level();
  const unsigned k = weight();
  const std::size_t ds = dim_cusp_forms(ell, k);
  auto fail = [&](const std::string& what) {
    throw InternalConsistencyError("local modular symbols for ell=" + std::to_string(ell) +
                                   ", k=" + std::to_string(k) + ", p=" + std::to_string(p_) + ": " + what);
  };
  const std::size_t D = full_.rows.size();
  if (D != dim_full_expected(ell, k)) fail("full dimension " + std::to_string(D));
  if (cusp_.rows.size() != 2 * ds) fail("cuspidal dimension " + std::to_string(cusp_.rows.size()));
  if (plus_.rows.size() != ds) fail("plus dimension " + std::to_string(plus_.rows.size()));

  u64 q0 = (ell == 2) ? 3 : 2;
  ModMatrix t = hecke_operator(q0, Subspace::Full);
  ModMatrix w = atkin_lehner(Subspace::Full);
  ModMatrix st = star_involution(Subspace::Full);
  const ModMatrix id = ModMatrix::identity(D, mod_);
  if (st * st != id) fail("star is not an involution");
  if (t * w != w * t) fail("T_q and w do not commute");
  if (t * st != st * t) fail("T_q and star do not commute");
  if (w * st != st * w) fail("w and star do not commute");

  // The subspaces must be stable under T_q (checked on every coordinate).
  for (const Basis* b : {&cusp_, &plus_})
    for (const auto& v : b->rows) {
      std::vector<u64> img = t.apply(v);
      std::vector<u64> back(D, 0);
      for (std::size_t j = 0; j < b->rows.size(); ++j) {
        u64 f = img[b->cols[j]];
        if (!f) continue;
        for (std::size_t c = 0; c < D; ++c)
          back[c] = add_mod(back[c], mul_mod(f, b->rows[j][c], mod_), mod_);
      }
      if (back != img) fail("a subspace is not Hecke stable");
    }

  // Eisenstein eigenvector modulo p on the full space.
  u64 lambda = add_mod(1, arith::pow_mod_raw(q0 % mod_, k - 1, mod_), mod_);
  ModMatrix stack(2 * D, D, p_);
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j) {
      stack(i, j) = (t(i, j) + (i == j ? mod_ - lambda : 0)) % mod_ % p_;
      stack(D + i, j) = (w(i, j) + (i == j ? 1 : 0)) % mod_ % p_;
    }
  if (kernel_fp(stack).empty()) fail("no Eisenstein eigenvector modulo p");

  if (ds > 0) {
    ModMatrix wc = atkin_lehner(Subspace::Cuspidal);
    if (wc * wc != ModMatrix::identity(wc.rows(), mod_)) fail("w is not an involution on cusp forms");
  }
}

}  // namespace eisrank::modsym
