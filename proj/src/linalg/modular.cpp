#include "eisrank/arith.hpp"
#include "eisrank/linalg.hpp"

#include <algorithm>

namespace eisrank {

namespace {

using u128 = unsigned __int128;

// Accumulating dot products: each product is < 2^126 for moduli below 2^63,
// so folding whenever the sum passes 2^127 keeps it inside 128 bits.
constexpr u128 kFoldLimit = static_cast<u128>(1) << 127;

}  // namespace

const char* ring_name(Ring r) {
  switch (r) {
    case Ring::Z: return "Z";
    case Ring::Q: return "Q";
    case Ring::Fp: return "Fp";
  }
  return "?";
}

ZVector mat_vec(const ZMatrix& a, const ZVector& v) {
  if (a.cols() != v.size()) throw InvalidRingError("shape mismatch in matrix-vector product");
  ZVector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (v[j] != 0) out[i] += a(i, j) * v[j];
  return out;
}

ModMatrix::ModMatrix(std::size_t rows, std::size_t cols, u64 modulus)
    : rows_(rows), cols_(cols), modulus_(modulus), data_(rows * cols, 0) {
  if (modulus < 2 || modulus >= (1ULL << 63)) throw InvalidRingError("modulus out of range");
}

ModMatrix::ModMatrix(std::size_t rows, std::size_t cols, u64 modulus, std::vector<u64> entries)
    : rows_(rows), cols_(cols), modulus_(modulus), data_(std::move(entries)) {
  if (modulus < 2 || modulus >= (1ULL << 63)) throw InvalidRingError("modulus out of range");
  if (data_.size() != rows * cols) throw InvalidRingError("entry count does not match shape");
  for (auto& x : data_) x %= modulus_;
}

ModMatrix ModMatrix::identity(std::size_t n, u64 modulus) {
  ModMatrix m(n, n, modulus);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

ModMatrix ModMatrix::reduce(const ZMatrix& m, u64 modulus) {
  ModMatrix r(m.rows(), m.cols(), modulus);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = arith::reduce(m(i, j), modulus);
  return r;
}

std::vector<u64> ModMatrix::row(std::size_t i) const {
  return std::vector<u64>(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                          data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

ModMatrix ModMatrix::operator*(const ModMatrix& o) const {
  if (cols_ != o.rows_ || modulus_ != o.modulus_) throw InvalidRingError("shape or ring mismatch in product");
  ModMatrix c(rows_, o.cols_, modulus_);
  std::vector<u128> acc(o.cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    std::fill(acc.begin(), acc.end(), 0);
    for (std::size_t l = 0; l < cols_; ++l) {
      const u64 a = (*this)(i, l);
      if (a == 0) continue;
      const u64* brow = &o.data_[l * o.cols_];
      for (std::size_t j = 0; j < o.cols_; ++j) {
        acc[j] += static_cast<u128>(a) * brow[j];
        if (acc[j] >= kFoldLimit) acc[j] %= modulus_;
      }
    }
    for (std::size_t j = 0; j < o.cols_; ++j) c(i, j) = static_cast<u64>(acc[j] % modulus_);
  }
  return c;
}

ModMatrix ModMatrix::operator+(const ModMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_ || modulus_ != o.modulus_) throw InvalidRingError("mismatch in sum");
  ModMatrix c = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) c.data_[i] = arith::add_mod(data_[i], o.data_[i], modulus_);
  return c;
}

ModMatrix ModMatrix::operator-(const ModMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_ || modulus_ != o.modulus_) throw InvalidRingError("mismatch in difference");
  ModMatrix c = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) c.data_[i] = arith::sub_mod(data_[i], o.data_[i], modulus_);
  return c;
}

std::vector<u64> ModMatrix::apply(const std::vector<u64>& v) const {
  if (v.size() != cols_) throw InvalidRingError("shape mismatch in matrix-vector product");
  std::vector<u64> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    u128 acc = 0;
    for (std::size_t j = 0; j < cols_; ++j) {
      acc += static_cast<u128>((*this)(i, j)) * v[j];
      if (acc >= kFoldLimit) acc %= modulus_;
    }
    out[i] = static_cast<u64>(acc % modulus_);
  }
  return out;
}

ModMatrix ModMatrix::pow(u64 e) const {
  if (rows_ != cols_) throw InvalidRingError("power of a non-square matrix");
  ModMatrix result = identity(rows_, modulus_);
  ModMatrix base = *this;
  while (e != 0) {
    if (e & 1U) result = result * base;
    e >>= 1U;
    if (e != 0) base = base * base;
  }
  return result;
}

ModMatrix ModMatrix::shifted(u64 s) const {
  ModMatrix c = *this;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) c(i, i) = arith::add_mod(c(i, i), s % modulus_, modulus_);
  return c;
}

ModMatrix ModMatrix::transpose() const {
  ModMatrix t(cols_, rows_, modulus_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

RrefResult rref_fp(const ModMatrix& m) {
  const u64 p = m.modulus();
  if (!arith::is_prime(p)) throw InvalidRingError("row reduction needs a prime modulus, got " + std::to_string(p));
  RrefResult res{m, {}, 0};
  ModMatrix& a = res.R;
  std::size_t r = 0;
  for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
    std::size_t piv = r;
    while (piv < a.rows() && a(piv, c) == 0) ++piv;
    if (piv == a.rows()) continue;
    if (piv != r)
      for (std::size_t j = 0; j < a.cols(); ++j) std::swap(a(piv, j), a(r, j));
    const u64 inv = arith::inv_mod(a(r, c), p);
    for (std::size_t j = c; j < a.cols(); ++j) a(r, j) = arith::mul_mod(a(r, j), inv, p);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == r || a(i, c) == 0) continue;
      const u64 f = a(i, c);
      for (std::size_t j = c; j < a.cols(); ++j)
        if (a(r, j) != 0) a(i, j) = arith::sub_mod(a(i, j), arith::mul_mod(f, a(r, j), p), p);
    }
    res.pivots.push_back(c);
    ++r;
  }
  res.rank = r;
  return res;
}

std::vector<std::vector<u64>> kernel_fp(const ModMatrix& m) {
  const RrefResult rr = rref_fp(m);
  const u64 p = m.modulus();
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto c : rr.pivots) is_pivot[c] = true;
  std::vector<std::vector<u64>> basis;
  for (std::size_t f = 0; f < m.cols(); ++f) {
    if (is_pivot[f]) continue;
    std::vector<u64> v(m.cols(), 0);
    v[f] = 1;
    for (std::size_t i = 0; i < rr.rank; ++i) v[rr.pivots[i]] = (p - rr.R(i, f)) % p;
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<u64> charpoly_fp(const ModMatrix& m) {
  if (m.rows() != m.cols()) throw InvalidRingError("characteristic polynomial of a non-square matrix");
  const u64 p = m.modulus();
  if (!arith::is_prime(p)) throw InvalidRingError("charpoly_fp needs a prime modulus");
  const std::size_t n = m.rows();
  ModMatrix h = m;
  // Similarity transforms to upper Hessenberg form.
  for (std::size_t c = 0; c + 2 < n; ++c) {
    std::size_t piv = n;
    for (std::size_t i = c + 1; i < n; ++i)
      if (h(i, c) != 0) {
        piv = i;
        break;
      }
    if (piv == n) continue;
    if (piv != c + 1) {
      for (std::size_t j = 0; j < n; ++j) std::swap(h(piv, j), h(c + 1, j));
      for (std::size_t i = 0; i < n; ++i) std::swap(h(i, piv), h(i, c + 1));
    }
    const u64 inv = arith::inv_mod(h(c + 1, c), p);
    for (std::size_t i = c + 2; i < n; ++i) {
      if (h(i, c) == 0) continue;
      const u64 f = arith::mul_mod(h(i, c), inv, p);
      // row_i -= f row_{c+1}; then col_{c+1} += f col_i.
      for (std::size_t j = 0; j < n; ++j) h(i, j) = arith::sub_mod(h(i, j), arith::mul_mod(f, h(c + 1, j), p), p);
      for (std::size_t r = 0; r < n; ++r) h(r, c + 1) = arith::add_mod(h(r, c + 1), arith::mul_mod(f, h(r, i), p), p);
    }
  }
  // p_j(x) = charpoly of the leading j x j block.
  std::vector<std::vector<u64>> poly(n + 1);
  poly[0] = {1};
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t c = j - 1;
    std::vector<u64> next(j + 1, 0);
    // (x - h(c,c)) p_{j-1}
    for (std::size_t t = 0; t < j; ++t) {
      next[t + 1] = arith::add_mod(next[t + 1], poly[j - 1][t], p);
      next[t] = arith::sub_mod(next[t], arith::mul_mod(h(c, c), poly[j - 1][t], p), p);
    }
    // - sum_{i<c} h(i,c) prod_{r=i+1}^{c} h(r,r-1) p_i
    u64 sub = 1;
    for (std::size_t i = c; i-- > 0;) {
      sub = arith::mul_mod(sub, h(i + 1, i), p);
      if (sub == 0) break;
      const u64 f = arith::mul_mod(sub, h(i, c), p);
      for (std::size_t t = 0; t < poly[i].size(); ++t)
        next[t] = arith::sub_mod(next[t], arith::mul_mod(f, poly[i][t], p), p);
    }
    poly[j] = std::move(next);
  }
  return poly[n];
}

std::vector<std::vector<u64>> generalized_kernel(const ModMatrix& m, std::size_t n) {
  if (m.rows() != m.cols()) throw InvalidRingError("generalized kernel of a non-square matrix");
  return kernel_fp(m.pow(n));
}

}  // namespace eisrank
