#include <algorithm>
#include <functional>
#include <map>

#include "eisrank/arith.hpp"
#include "eisrank/modsym.hpp"
#include "modsym_internal.hpp"

namespace eisrank::modsym {

namespace {

struct SparseRow {
  std::vector<std::pair<std::size_t, mpz_class>> e;  // sorted by column
};

void remove_content(SparseRow& r) {
  mpz_class g = 0;
  for (auto& [c, v] : r.e) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
    if (g == 1) return;
  }
  if (g > 1)
    for (auto& [c, v] : r.e) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), g.get_mpz_t());
}

// a*x - b*y, dropping zeros.
SparseRow combine(const mpz_class& a, const SparseRow& x, const mpz_class& b, const SparseRow& y) {
  SparseRow out;
  out.e.reserve(x.e.size() + y.e.size());
  std::size_t i = 0, j = 0;
  while (i < x.e.size() || j < y.e.size()) {
    if (j == y.e.size() || (i < x.e.size() && x.e[i].first < y.e[j].first)) {
      out.e.emplace_back(x.e[i].first, a * x.e[i].second);
      ++i;
    } else if (i == x.e.size() || y.e[j].first < x.e[i].first) {
      out.e.emplace_back(y.e[j].first, -b * y.e[j].second);
      ++j;
    } else {
      mpz_class v = a * x.e[i].second - b * y.e[j].second;
      if (v != 0) out.e.emplace_back(x.e[i].first, std::move(v));
      ++i;
      ++j;
    }
  }
  return out;
}

// HNF basis (rows) of {y in Z^n : R y = 0}.
ZMatrix right_kernel_hnf(const ZMatrix& r, std::size_t n) {
  const std::size_t m = r.rows();
  if (m == 0) return ZMatrix::identity(n);
  ZMatrix aug(n, m + n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) aug(j, i) = r(i, j);
    aug(j, m + j) = 1;
  }
  ZMatrix h = hnf(aug);
  std::vector<ZVector> rows;
  for (std::size_t i = 0; i < h.rows(); ++i) {
    bool zero = true;
    for (std::size_t c = 0; c < m && zero; ++c) zero = (h(i, c) == 0);
    if (!zero) continue;
    ZVector row = h.row(i);
    rows.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(m), row.end());
  }
  return ZMatrix::from_rows(rows, n);
}

LatticeBasis echelon_basis(ZMatrix rows) {
  LatticeBasis b;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    std::size_t c = 0;
    while (c < rows.cols() && rows(i, c) == 0) ++c;
    if (c == rows.cols()) throw InternalConsistencyError("zero row in lattice basis");
    b.cols.push_back(c);
  }
  b.rows = std::move(rows);
  return b;
}

// Coordinates over Q of y (given on the solving columns) in basis b.
std::vector<mpq_class> solve_rational(const LatticeBasis& b, const ZVector& y) {
  const std::size_t r = b.rank();
  std::vector<mpq_class> u(r);
  for (std::size_t j = 0; j < r; ++j) {
    mpq_class acc = y[j];
    for (std::size_t i = 0; i < j; ++i)
      if (u[i] != 0 && b.rows(i, b.cols[j]) != 0) acc -= u[i] * b.rows(i, b.cols[j]);
    u[j] = acc / b.rows(j, b.cols[j]);
  }
  return u;
}

std::optional<ZVector> solve_integral(const LatticeBasis& b, const ZVector& y) {
  const std::size_t r = b.rank();
  ZVector u(r);
  for (std::size_t j = 0; j < r; ++j) {
    mpz_class acc = y[j];
    for (std::size_t i = 0; i < j; ++i)
      if (u[i] != 0 && b.rows(i, b.cols[j]) != 0) acc -= u[i] * b.rows(i, b.cols[j]);
    const mpz_class& piv = b.rows(j, b.cols[j]);
    if (!mpz_divisible_p(acc.get_mpz_t(), piv.get_mpz_t())) return std::nullopt;
    mpz_divexact(u[j].get_mpz_t(), acc.get_mpz_t(), piv.get_mpz_t());
  }
  return u;
}

}  // namespace

std::shared_ptr<const ManinSymbolSpace> ManinSymbolSpace::build(u64 ell, unsigned k, u64 resource_bound) {
  if (static_cast<u64>(k) * (ell + 1) > resource_bound)
    throw ResourceBoundError("k(ell+1) = " + std::to_string(static_cast<u64>(k) * (ell + 1)) +
                             " exceeds the resource bound " + std::to_string(resource_bound));
  auto sp = std::shared_ptr<ManinSymbolSpace>(new ManinSymbolSpace(ell, k));
  sp->solve();
  sp->build_subspaces();
  sp->check();
  internal::note_build();
  return sp;
}

void ManinSymbolSpace::solve() {
  const std::size_t nclass = pres_.num_classes();
  std::vector<SparseRow> pivrows;
  std::vector<std::size_t> pivcol;
  std::vector<long> pivot_of(nclass, -1);

  auto reduce = [&](SparseRow& row) {
    for (;;) {
      long best = -1;
      std::size_t at = 0;
      for (std::size_t t = 0; t < row.e.size(); ++t) {
        long pr = pivot_of[row.e[t].first];
        if (pr >= 0 && (best < 0 || pr < best)) {
          best = pr;
          at = t;
        }
      }
      if (best < 0) return;
      const SparseRow& pr = pivrows[static_cast<std::size_t>(best)];
      std::size_t pc = pivcol[static_cast<std::size_t>(best)];
      auto it = std::lower_bound(pr.e.begin(), pr.e.end(), pc,
                                 [](const auto& x, std::size_t c) { return x.first < c; });
      mpz_class b = row.e[at].second;
      // pivot coefficient is +-1
      row = combine(1, row, b * it->second, pr);
    }
  };

  std::vector<SparseRow> pending;
  for (const auto& r : pres_.relations()) {
    SparseRow row;
    for (auto [c, v] : r) row.e.emplace_back(c, mpz_class(static_cast<long>(v)));
    remove_content(row);
    pending.push_back(std::move(row));
  }
  // Pivot on +-1 only, so every eliminated class is an integral combination of
  // the rest; rows without a unit entry are retried after later pivots.
  bool progress = true;
  while (progress && !pending.empty()) {
    progress = false;
    std::vector<SparseRow> later;
    for (auto& row : pending) {
      reduce(row);
      remove_content(row);
      if (row.e.empty()) continue;
      std::size_t at = row.e.size();
      for (std::size_t t = row.e.size(); t-- > 0;)
        if (abs(row.e[t].second) == 1) {
          at = t;
          break;
        }
      if (at == row.e.size()) {
        later.push_back(std::move(row));
        continue;
      }
      pivot_of[row.e[at].first] = static_cast<long>(pivrows.size());
      pivcol.push_back(row.e[at].first);
      pivrows.push_back(std::move(row));
      progress = true;
    }
    pending = std::move(later);
  }

  std::vector<long> free_index(nclass, -1);
  std::vector<std::size_t> free_class;
  for (std::size_t c = 0; c < nclass; ++c)
    if (pivot_of[c] < 0) {
      free_index[c] = static_cast<long>(free_class.size());
      free_class.push_back(c);
    }
  const std::size_t nf = free_class.size();

  std::vector<ZVector> expr(nclass);
  for (std::size_t c : free_class) {
    expr[c].assign(nf, 0);
    expr[c][static_cast<std::size_t>(free_index[c])] = 1;
  }
  for (std::size_t t = pivrows.size(); t-- > 0;) {
    const SparseRow& r = pivrows[t];
    std::size_t pc = pivcol[t];
    mpz_class a;
    for (const auto& [c, v] : r.e)
      if (c == pc) a = v;
    ZVector out(nf, 0);
    for (const auto& [c, v] : r.e) {
      if (c == pc) continue;
      mpz_class f = a * v;  // x_pc = -a * sum v x_c since a = +-1
      const ZVector& x = expr[c];
      for (std::size_t j = 0; j < nf; ++j)
        if (x[j] != 0) out[j] -= f * x[j];
    }
    expr[pc] = std::move(out);
  }

  // Leftover relations among the free classes; the full lattice is the
  // quotient modulo their saturation, whose dual is their integer kernel.
  std::vector<ZVector> left;
  for (auto& row : pending) {
    reduce(row);
    if (row.e.empty()) continue;
    ZVector v(nf, 0);
    for (const auto& [c, x] : row.e) {
      if (free_index[c] < 0) throw InternalConsistencyError("leftover relation touches a pivot class");
      v[static_cast<std::size_t>(free_index[c])] = x;
    }
    left.push_back(std::move(v));
  }
  ZMatrix kt = right_kernel_hnf(ZMatrix::from_rows(left, nf), nf);
  const std::size_t D = kt.rows();
  // Basis element i is a combination l_i of free symbols with <l_i, kt_j> =
  // delta_ij. When kt has unit pivots a single symbol does.
  std::vector<ZVector> lift(D, ZVector(nf, 0));
  bool unit = true;
  for (std::size_t i = 0; i < D && unit; ++i) {
    std::size_t c = 0;
    while (kt(i, c) == 0) ++c;
    if (kt(i, c) != 1) unit = false;
    else lift[i][c] = 1;
  }
  if (!unit) {
    // Rows (e_i | l_i) of the HNF of [kt^T | I].
    ZMatrix aug(nf, D + nf);
    for (std::size_t j = 0; j < nf; ++j) {
      for (std::size_t i = 0; i < D; ++i) aug(j, i) = kt(i, j);
      aug(j, D + j) = 1;
    }
    ZMatrix h = hnf(aug);
    for (std::size_t i = 0; i < D; ++i) {
      for (std::size_t c = 0; c < D; ++c)
        if (h(i, c) != (i == c ? 1 : 0)) throw InternalConsistencyError("relation quotient is not saturated");
      for (std::size_t j = 0; j < nf; ++j) lift[i][j] = h(i, D + j);
    }
  }
  basis_.assign(D, {});
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < nf; ++j)
      if (lift[i][j] != 0) basis_[i].emplace_back(pres_.class_representative(free_class[j]), lift[i][j]);

  const std::size_t n = pres_.num_symbols();
  sym_lat_.assign(n, ZVector(D, 0));
  std::vector<ZVector> class_lat(nclass);
  for (std::size_t c = 0; c < nclass; ++c) {
    ZVector v(D, 0);
    const ZVector& x = expr[c];
    if (left.empty()) {
      v = x;
    } else {
      for (std::size_t i = 0; i < D; ++i)
        for (std::size_t j = 0; j < nf; ++j)
          if (x[j] != 0 && kt(i, j) != 0) v[i] += x[j] * kt(i, j);
    }
    class_lat[c] = std::move(v);
  }
  for (std::size_t s = 0; s < n; ++s) {
    int c = pres_.symbol_class(s);
    if (c < 0) continue;
    sym_lat_[s] = class_lat[static_cast<std::size_t>(c)];
    if (pres_.symbol_sign(s) < 0)
      for (auto& x : sym_lat_[s]) x = -x;
  }
}

void ManinSymbolSpace::build_subspaces() {
  const std::size_t D = basis_.size();
  boundary_ = ZMatrix(D, 2);
  for (std::size_t i = 0; i < D; ++i)
    for (const auto& [sym, c] : basis_[i]) {
      auto b = pres_.boundary(sym);
      boundary_(i, 0) += c * b[0];
      boundary_(i, 1) += c * b[1];
    }
  full_.rows = ZMatrix::identity(D);
  full_.cols.resize(D);
  for (std::size_t i = 0; i < D; ++i) full_.cols[i] = i;

  cusp_ = echelon_basis(right_kernel_hnf(boundary_.transpose(), D));

  OperatorMatrix star = star_involution(Subspace::Cuspidal);
  ZMatrix a = shifted(star.matrix, mpz_class(-1));
  ZMatrix u = right_kernel_hnf(a, a.cols());
  ZMatrix rows(u.rows(), D);
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t t = 0; t < u.cols(); ++t)
      if (u(i, t) != 0)
        for (std::size_t c = 0; c < D; ++c)
          if (cusp_.rows(t, c) != 0) rows(i, c) += u(i, t) * cusp_.rows(t, c);
  plus_.rows = std::move(rows);
  for (std::size_t i = 0; i < u.rows(); ++i) {
    std::size_t c = 0;
    while (u(i, c) == 0) ++c;
    plus_.cols.push_back(cusp_.cols[c]);
  }
}

std::vector<SymbolCombo> ManinSymbolSpace::combo_images(const std::function<SymbolCombo(std::size_t)>& f) const {
  std::vector<SymbolCombo> out;
  for (const auto& combo : basis_) {
    if (combo.size() == 1 && combo[0].second == 1) {
      out.push_back(f(combo[0].first));
      continue;
    }
    std::map<std::size_t, mpz_class> acc;
    for (const auto& [sym, c] : combo)
      for (const auto& [t, x] : f(sym)) acc[t] += c * x;
    SymbolCombo v;
    for (auto& [t, x] : acc)
      if (x != 0) v.emplace_back(t, x);
    out.push_back(std::move(v));
  }
  return out;
}

const LatticeBasis& ManinSymbolSpace::basis(Subspace s) const {
  switch (s) {
    case Subspace::Full: return full_;
    case Subspace::Cuspidal: return cusp_;
    case Subspace::CuspidalPlus: return plus_;
  }
  return full_;
}

OperatorMatrix ManinSymbolSpace::restrict_operator(
    const std::string& name, Subspace s, const std::vector<std::vector<std::pair<std::size_t, mpz_class>>>& images,
    const mpz_class& scale) const {
  const LatticeBasis& b = basis(s);
  const std::size_t D = basis_.size();
  const std::size_t r = b.rank();
  // Z(i, t): image of basis symbol i, coordinate cols[t].
  ZMatrix z(D, r);
  for (std::size_t i = 0; i < D; ++i)
    for (const auto& [sym, c] : images[i]) {
      const ZVector& x = sym_lat_[sym];
      for (std::size_t t = 0; t < r; ++t)
        if (x[b.cols[t]] != 0) z(i, t) += c * x[b.cols[t]];
    }
  OperatorMatrix out;
  out.name = name;
  out.subspace = s;
  out.matrix = ZMatrix(r, r);
  std::vector<std::vector<mpq_class>> cols(r);
  for (std::size_t j = 0; j < r; ++j) {
    ZVector y(r, 0);
    for (std::size_t i = 0; i < D; ++i)
      if (b.rows(j, i) != 0)
        for (std::size_t t = 0; t < r; ++t)
          if (z(i, t) != 0) y[t] += b.rows(j, i) * z(i, t);
    if (auto u = solve_integral(b, y)) {
      cols[j].resize(r);
      for (std::size_t t = 0; t < r; ++t) cols[j][t] = mpq_class((*u)[t], scale);
    } else {
      cols[j] = solve_rational(b, y);
      for (auto& x : cols[j]) x /= scale;
    }
  }
  mpz_class den = 1;
  for (auto& c : cols)
    for (auto& x : c) {
      x.canonicalize();
      mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), x.get_den_mpz_t());
    }
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t t = 0; t < r; ++t) out.matrix(t, j) = cols[j][t].get_num() * (den / cols[j][t].get_den());
  out.denominator = den;
  return out;
}

OperatorMatrix ManinSymbolSpace::heilbronn_operator(const std::string& name, const std::vector<Mat2>& hs,
                                                    Subspace s) const {
  std::vector<std::vector<std::pair<std::size_t, mpz_class>>> images(basis_.size());
  std::vector<__int128> acc(pres_.num_symbols());
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (basis_[i].size() == 1 && basis_[i][0].second == 1) {
      std::fill(acc.begin(), acc.end(), 0);
      pres_.heilbronn_image(basis_[i][0].first, hs, acc);
      for (std::size_t t = 0; t < acc.size(); ++t)
        if (acc[t] != 0 && pres_.symbol_class(t) >= 0) images[i].emplace_back(t, internal::to_mpz(acc[t]));
      continue;
    }
    std::vector<mpz_class> sum(pres_.num_symbols(), 0);
    for (const auto& [sym, c] : basis_[i]) {
      std::fill(acc.begin(), acc.end(), 0);
      pres_.heilbronn_image(sym, hs, acc);
      for (std::size_t t = 0; t < acc.size(); ++t)
        if (acc[t] != 0) sum[t] += c * internal::to_mpz(acc[t]);
    }
    for (std::size_t t = 0; t < sum.size(); ++t)
      if (sum[t] != 0 && pres_.symbol_class(t) >= 0) images[i].emplace_back(t, sum[t]);
  }
  return restrict_operator(name, s, images, 1);
}

OperatorMatrix ManinSymbolSpace::hecke_operator(u64 q, Subspace s) const {
  if (!arith::is_prime(q)) throw ParameterError("T_q needs q prime");
  if (q == level()) throw ParameterError("T_ell is not a generator; use the Atkin-Lehner operator");
  std::string key = "T" + std::to_string(q) + "/" + subspace_name(s);
  {
    std::lock_guard<std::mutex> g(cache_mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  OperatorMatrix m = heilbronn_operator("T" + std::to_string(q), heilbronn_cremona(static_cast<i64>(q)), s);
  if (!m.integral()) throw InternalConsistencyError("T_" + std::to_string(q) + " is not integral");
  std::lock_guard<std::mutex> g(cache_mu_);
  return cache_.emplace(key, std::move(m)).first->second;
}

OperatorMatrix ManinSymbolSpace::merel_operator(u64 n, Subspace s) const {
  return heilbronn_operator("H" + std::to_string(n), heilbronn_merel(static_cast<i64>(n)), s);
}

OperatorMatrix ManinSymbolSpace::atkin_lehner(Subspace s) const {
  std::string key = std::string("w/") + subspace_name(s);
  {
    std::lock_guard<std::mutex> g(cache_mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto images = combo_images([this](std::size_t sym) { return pres_.w_image(sym); });
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), level(), weight() / 2 - 1);
  OperatorMatrix m = restrict_operator("w", s, images, scale);
  // Away from ell the normalized operator must be integral; powers of ell in
  // the denominator are allowed.
  mpz_class rest = m.denominator;
  mpz_class l = static_cast<unsigned long>(level());
  while (mpz_divisible_p(rest.get_mpz_t(), l.get_mpz_t())) rest /= l;
  if (rest != 1)
    throw InternalConsistencyError("w_ell has denominator " + m.denominator.get_str() + " on the " +
                                   subspace_name(s) + " lattice");
  std::lock_guard<std::mutex> g(cache_mu_);
  return cache_.emplace(key, std::move(m)).first->second;
}

OperatorMatrix ManinSymbolSpace::star_involution(Subspace s) const {
  auto images = combo_images([this](std::size_t sym) { return pres_.star_image(sym); });
  OperatorMatrix m = restrict_operator("star", s, images, 1);
  if (!m.integral()) throw InternalConsistencyError("star is not integral");
  return m;
}

void ManinSymbolSpace::check() const {
  const u64 ell = level();
  const unsigned k = weight();
  const std::size_t ds = dim_cusp_forms(ell, k);
  auto fail = [&](const std::string& what) {
    throw InternalConsistencyError("modular symbols for ell=" + std::to_string(ell) + ", k=" + std::to_string(k) +
                                   ": " + what);
  };
  if (full_.rank() != dim_full_expected(ell, k)) fail("full dimension " + std::to_string(full_.rank()));
  if (cusp_.rank() != 2 * ds) fail("cuspidal dimension " + std::to_string(cusp_.rank()));
  if (plus_.rank() != ds) fail("plus dimension " + std::to_string(plus_.rank()));

  // Operators on the full space: commutation and the Eisenstein eigenvector.
  u64 q0 = (ell == 2) ? 3 : 2;
  OperatorMatrix t = hecke_operator(q0, Subspace::Full);
  OperatorMatrix w = atkin_lehner(Subspace::Full);
  OperatorMatrix st = star_involution(Subspace::Full);
  if (st.matrix * st.matrix != ZMatrix::identity(st.matrix.rows())) fail("star is not an involution");
  if (t.matrix * w.matrix != w.matrix * t.matrix) fail("T_q and w do not commute");
  if (t.matrix * st.matrix != st.matrix * t.matrix) fail("T_q and star do not commute");
  if (w.matrix * st.matrix != st.matrix * w.matrix) fail("w and star do not commute");
  mpz_class lambda;
  mpz_ui_pow_ui(lambda.get_mpz_t(), q0, k - 1);
  lambda += 1;
  const std::size_t D = full_.rank();
  ZMatrix stack(2 * D, D);
  for (std::size_t i = 0; i < D; ++i)
    for (std::size_t j = 0; j < D; ++j) {
      stack(i, j) = t.matrix(i, j) - (i == j ? lambda : mpz_class(0));
      stack(D + i, j) = w.matrix(i, j) + (i == j ? w.denominator : mpz_class(0));
    }
  if (!integer_kernel_vector(stack)) fail("no Eisenstein eigenvector on the full space");

  if (plus_.rank() > 0) {
    OperatorMatrix wc = atkin_lehner(Subspace::Cuspidal);
    ZMatrix sq = wc.matrix * wc.matrix;
    mpz_class d2 = wc.denominator * wc.denominator;
    if (sq != scaled(ZMatrix::identity(sq.rows()), d2)) fail("w is not an involution on cusp forms");
  }
}

nlohmann::json ManinSymbolSpace::summary_json() const {
  nlohmann::json j;
  j["ell"] = level();
  j["k"] = weight();
  j["num_symbols"] = num_symbols();
  j["dim_full"] = dim(Subspace::Full);
  j["dim_cuspidal"] = dim(Subspace::Cuspidal);
  j["dim_cuspidal_plus"] = dim(Subspace::CuspidalPlus);
  nlohmann::json b = nlohmann::json::array();
  for (const auto& combo : basis_) {
    nlohmann::json e = nlohmann::json::array();
    for (const auto& [sym, c] : combo) e.push_back({sym, c.get_str()});
    b.push_back(e);
  }
  j["basis"] = b;
  j["cusp_inclusion"] = to_json(cusp_.rows);
  j["plus_inclusion"] = to_json(plus_.rows);
  return j;
}

}  // namespace eisrank::modsym
