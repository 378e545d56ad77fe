#include "eisrank/arith.hpp"
#include "eisrank/linalg.hpp"

#include <algorithm>

namespace eisrank {

namespace {

u64 checked_power(u64 p, unsigned n) {
  u64 m = 1;
  for (unsigned i = 0; i < n; ++i) {
    if (m > ((1ULL << 62) / p)) throw ResourceBoundError("p^N exceeds 62 bits");
    m *= p;
  }
  return m;
}

// Splits x = p^v * u with u a unit; x != 0.
std::pair<unsigned, u64> split(u64 x, u64 p) {
  unsigned v = 0;
  while (x % p == 0) {
    x /= p;
    ++v;
  }
  return {v, x};
}

}  // namespace

unsigned local_valuation(u64 x, u64 p, unsigned precision) {
  if (x == 0) return precision;
  return split(x, p).first;
}

LocalModule::LocalModule(std::size_t n, u64 p, unsigned precision)
    : n_(n), p_(p), N_(precision), mod_(checked_power(p, precision)) {
  if (precision == 0) throw InvalidRingError("precision must be positive");
}

std::size_t LocalModule::reduce(std::vector<u64>& v) const {
  std::size_t r = 0;
  for (std::size_t c = 0; c < n_; ++c) {
    while (r < rows_.size() && piv_[r] < c) ++r;
    if (v[c] == 0) continue;
    if (r == rows_.size() || piv_[r] != c) return c;
    const unsigned a = val_[r];
    if (local_valuation(v[c], p_, N_) < a) return c;
    const u64 f = v[c] / rows_[r][c];  // rows_[r][c] == p^a exactly
    for (std::size_t j = c; j < n_; ++j)
      if (rows_[r][j] != 0) v[j] = arith::sub_mod(v[j], arith::mul_mod(f, rows_[r][j], mod_), mod_);
  }
  return n_;
}

bool LocalModule::contains(std::vector<u64> v) const {
  if (v.size() != n_) throw InvalidRingError("vector length mismatch");
  for (auto& x : v) x %= mod_;
  return reduce(v) == n_;
}

void LocalModule::insert(std::vector<u64> v) {
  std::vector<std::vector<u64>> pending{std::move(v)};
  while (!pending.empty()) {
    std::vector<u64> w = std::move(pending.back());
    pending.pop_back();
    const std::size_t c = reduce(w);
    if (c == n_) continue;
    auto [b, unit] = split(w[c], p_);
    const u64 inv = arith::inv_mod(unit % mod_, mod_);
    for (std::size_t j = c; j < n_; ++j) w[j] = arith::mul_mod(w[j], inv, mod_);
    // p^(N-b) * w vanishes at c but may survive further right.
    std::vector<u64> tail(n_, 0);
    const u64 scale = arith::pow_mod_raw(p_, N_ - b, mod_ == 1 ? 2 : mod_);
    for (std::size_t j = c + 1; j < n_; ++j) tail[j] = arith::mul_mod(w[j], scale, mod_);
    auto pos = std::lower_bound(piv_.begin(), piv_.end(), c);
    const auto idx = static_cast<std::size_t>(pos - piv_.begin());
    if (pos != piv_.end() && *pos == c) {
      // Existing pivot has larger valuation: replace it and requeue the old row.
      pending.push_back(std::move(rows_[idx]));
      rows_[idx] = std::move(w);
      val_[idx] = b;
    } else {
      piv_.insert(pos, c);
      rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(idx), std::move(w));
      val_.insert(val_.begin() + static_cast<std::ptrdiff_t>(idx), b);
    }
    pending.push_back(std::move(tail));
  }
}

bool LocalModule::add(std::vector<u64> v) {
  if (v.size() != n_) throw InvalidRingError("vector length mismatch");
  for (auto& x : v) x %= mod_;
  const unsigned before = log_order();
  insert(std::move(v));
  return log_order() != before;
}

unsigned LocalModule::log_order() const {
  unsigned s = 0;
  for (unsigned a : val_) s += N_ - a;
  return s;
}

std::vector<unsigned> local_snf(const ModMatrix& m, u64 p, unsigned precision) {
  const u64 mod = checked_power(p, precision);
  if (m.modulus() % mod != 0) throw InvalidRingError("matrix modulus is not a multiple of p^N");
  const std::size_t nr = m.rows(), nc = m.cols();
  std::vector<std::vector<u64>> a(nr, std::vector<u64>(nc));
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) a[i][j] = m(i, j) % mod;
  std::vector<unsigned> out;
  const std::size_t t_max = std::min(nr, nc);
  for (std::size_t t = 0; t < t_max; ++t) {
    std::size_t bi = nr, bj = nc;
    unsigned best = precision;
    for (std::size_t i = t; i < nr && best > 0; ++i)
      for (std::size_t j = t; j < nc; ++j) {
        if (a[i][j] == 0) continue;
        const unsigned v = local_valuation(a[i][j], p, precision);
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
          if (v == 0) break;
        }
      }
    if (bi == nr) {
      out.resize(t_max, precision);
      break;
    }
    std::swap(a[t], a[bi]);
    for (std::size_t i = 0; i < nr; ++i) std::swap(a[i][t], a[i][bj]);
    auto [v, unit] = split(a[t][t], p);
    const u64 inv = arith::inv_mod(unit % mod, mod);
    for (std::size_t j = t; j < nc; ++j) a[t][j] = arith::mul_mod(a[t][j], inv, mod);
    const u64 pv = a[t][t];
    for (std::size_t i = t + 1; i < nr; ++i) {
      if (a[i][t] == 0) continue;
      const u64 f = a[i][t] / pv;
      for (std::size_t j = t; j < nc; ++j)
        if (a[t][j] != 0) a[i][j] = arith::sub_mod(a[i][j], arith::mul_mod(f, a[t][j], mod), mod);
    }
    // Column clearing only touches row t, which is no longer read.
    out.push_back(v);
  }
  return out;
}

std::vector<std::vector<u64>> unit_split_kernel(const ModMatrix& m, u64 p, unsigned precision) {
  std::vector<std::size_t> free_cols;
  return unit_split_kernel(m, p, precision, free_cols);
}

std::vector<std::vector<u64>> unit_split_kernel(const ModMatrix& m, u64 p, unsigned precision,
                                                std::vector<std::size_t>& free_cols) {
  const u64 mod = checked_power(p, precision);
  if (m.modulus() != mod) throw InvalidRingError("matrix modulus must equal p^N");
  ModMatrix a = m;
  const std::size_t nr = a.rows(), nc = a.cols();
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < nc && r < nr; ++c) {
    std::size_t piv = nr;
    for (std::size_t i = r; i < nr; ++i)
      if (a(i, c) % p != 0) {
        piv = i;
        break;
      }
    if (piv == nr) continue;
    if (piv != r)
      for (std::size_t j = 0; j < nc; ++j) std::swap(a(piv, j), a(r, j));
    const u64 inv = arith::inv_mod(a(r, c), mod);
    // Earlier skipped columns may still hold multiples of p in row r.
    for (std::size_t j = 0; j < nc; ++j) a(r, j) = arith::mul_mod(a(r, j), inv, mod);
    for (std::size_t i = 0; i < nr; ++i) {
      if (i == r || a(i, c) == 0) continue;
      const u64 f = a(i, c);
      for (std::size_t j = 0; j < nc; ++j)
        if (a(r, j) != 0) a(i, j) = arith::sub_mod(a(i, j), arith::mul_mod(f, a(r, j), mod), mod);
    }
    pivots.push_back(c);
    ++r;
  }
  for (std::size_t i = r; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j)
      if (a(i, j) != 0) throw InternalConsistencyError("matrix has a non-unit nonzero elementary divisor");
  std::vector<bool> is_pivot(nc, false);
  for (auto c : pivots) is_pivot[c] = true;
  std::vector<std::vector<u64>> basis;
  free_cols.clear();
  for (std::size_t f = 0; f < nc; ++f) {
    if (is_pivot[f]) continue;
    free_cols.push_back(f);
    std::vector<u64> v(nc, 0);
    v[f] = 1;
    for (std::size_t i = 0; i < r; ++i) v[pivots[i]] = (mod - a(i, f)) % mod;
    basis.push_back(std::move(v));
  }
  return basis;
}

nlohmann::json to_json(const ZMatrix& m) {
  nlohmann::json e = nlohmann::json::array();
  for (const auto& x : m.entries()) e.push_back(x.get_str());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"ring", ring_name(Ring::Z)}, {"entries", e}};
}

nlohmann::json to_json(const QMatrix& m) {
  nlohmann::json e = nlohmann::json::array();
  for (const auto& x : m.entries()) e.push_back(x.get_str());
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"ring", ring_name(Ring::Q)}, {"entries", e}};
}

nlohmann::json to_json(const ModMatrix& m) {
  nlohmann::json e = nlohmann::json::array();
  for (auto x : m.entries()) e.push_back(std::to_string(x));
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"ring", ring_name(Ring::Fp)},
          {"modulus", std::to_string(m.modulus())},
          {"entries", e}};
}

ZMatrix zmatrix_from_json(const nlohmann::json& j) {
  if (j.at("ring").get<std::string>() != ring_name(Ring::Z)) throw InvalidRingError("expected an integer matrix");
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto& e = j.at("entries");
  if (e.size() != rows * cols) throw InvalidRingError("entry count does not match shape");
  std::vector<mpz_class> v;
  v.reserve(e.size());
  for (const auto& x : e) v.emplace_back(x.get<std::string>());
  return ZMatrix(rows, cols, std::move(v));
}

ModMatrix modmatrix_from_json(const nlohmann::json& j) {
  if (j.at("ring").get<std::string>() != ring_name(Ring::Fp)) throw InvalidRingError("expected a residue matrix");
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const u64 mod = std::stoull(j.at("modulus").get<std::string>());
  const auto& e = j.at("entries");
  if (e.size() != rows * cols) throw InvalidRingError("entry count does not match shape");
  std::vector<u64> v;
  v.reserve(e.size());
  for (const auto& x : e) v.push_back(std::stoull(x.get<std::string>()));
  return ModMatrix(rows, cols, mod, std::move(v));
}

}  // namespace eisrank
