#pragma once

#include <gmpxx.h>
#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eisrank/errors.hpp"

namespace eisrank {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using i128 = __int128;

enum class Ring { Z, Q, Fp };

const char* ring_name(Ring r);

/// Dense row-major matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) throw InvalidRingError("entry count does not match shape");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const std::vector<T>& entries() const { return data_; }

  std::vector<T> row(std::size_t i) const {
    return std::vector<T>(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                          data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }
  void set_row(std::size_t i, const std::vector<T>& v) {
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = v[j];
  }

  bool operator==(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  static Matrix from_rows(const std::vector<std::vector<T>>& rows, std::size_t cols) {
    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) m.set_row(i, rows[i]);
    return m;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using ZMatrix = Matrix<mpz_class>;
using QMatrix = Matrix<mpq_class>;
using ZVector = std::vector<mpz_class>;

template <class T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) throw InvalidRingError("shape mismatch in product");
  Matrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t l = 0; l < a.cols(); ++l) {
      if (a(i, l) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, l) * b(l, j);
    }
  return c;
}

template <class T>
Matrix<T> operator+(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidRingError("shape mismatch in sum");
  std::vector<T> e(a.entries());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += b.entries()[i];
  return Matrix<T>(a.rows(), a.cols(), std::move(e));
}

template <class T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidRingError("shape mismatch in difference");
  std::vector<T> e(a.entries());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] -= b.entries()[i];
  return Matrix<T>(a.rows(), a.cols(), std::move(e));
}

template <class T, class S>
Matrix<T> scaled(const Matrix<T>& a, const S& s) {
  std::vector<T> e(a.entries());
  for (auto& x : e) x *= s;
  return Matrix<T>(a.rows(), a.cols(), std::move(e));
}

/// a + s * I for square a.
template <class T, class S>
Matrix<T> shifted(const Matrix<T>& a, const S& s) {
  Matrix<T> r = a;
  for (std::size_t i = 0; i < a.rows(); ++i) r(i, i) += s;
  return r;
}

ZVector mat_vec(const ZMatrix& a, const ZVector& v);

/// Matrix over Z/mZ, entries in [0, m).
class ModMatrix {
 public:
  ModMatrix() = default;
  ModMatrix(std::size_t rows, std::size_t cols, u64 modulus);
  ModMatrix(std::size_t rows, std::size_t cols, u64 modulus, std::vector<u64> entries);

  static ModMatrix identity(std::size_t n, u64 modulus);
  static ModMatrix reduce(const ZMatrix& m, u64 modulus);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  u64 modulus() const { return modulus_; }
  u64& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  u64 operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const std::vector<u64>& entries() const { return data_; }
  std::vector<u64> row(std::size_t i) const;

  bool operator==(const ModMatrix&) const = default;

  ModMatrix operator*(const ModMatrix& o) const;
  ModMatrix operator+(const ModMatrix& o) const;
  ModMatrix operator-(const ModMatrix& o) const;
  std::vector<u64> apply(const std::vector<u64>& v) const;
  ModMatrix pow(u64 e) const;
  ModMatrix shifted(u64 s) const;  // this + s*I
  ModMatrix transpose() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  u64 modulus_ = 2;
  std::vector<u64> data_;
};

struct RrefResult {
  ModMatrix R;
  std::vector<std::size_t> pivots;
  std::size_t rank = 0;
};

RrefResult rref_fp(const ModMatrix& m);

/// Right null space over F_p.
std::vector<std::vector<u64>> kernel_fp(const ModMatrix& m);

/// Characteristic polynomial det(xI - M) over F_p, constant term first
/// (Hessenberg reduction).
std::vector<u64> charpoly_fp(const ModMatrix& m);

/// Basis of ker(M^N).
std::vector<std::vector<u64>> generalized_kernel(const ModMatrix& m, std::size_t n);

/// Row Hermite normal form: nonzero rows only, positive pivots, entries above
/// each pivot reduced into [0, pivot).
ZMatrix hnf(const ZMatrix& m);

/// Row HNF of a full-rank lattice known to contain modulus * Z^n. Works in
/// machine integers; the modulus must be below 2^62.
ZMatrix hnf_mod(const std::vector<std::vector<i64>>& rows, std::size_t n, i64 modulus);

/// Coordinates of v in the row lattice of H (H as returned by hnf), or nothing.
std::optional<ZVector> hnf_coordinates(const ZMatrix& h, const ZVector& v);

struct SmithNormalFormResult {
  std::vector<mpz_class> invariant_factors;
};

/// Invariant factors of coker(M : Z^cols -> Z^rows); one entry per row.
SmithNormalFormResult snf(const ZMatrix& m);

mpz_class det_bareiss(const ZMatrix& m);

/// Characteristic polynomial det(xI - M), coefficients from the constant term
/// up. Division-free (Berkowitz).
std::vector<mpz_class> charpoly(const ZMatrix& m);

struct AlgebraClosure {
  std::vector<ZMatrix> basis;
  // mult_table[i][j] holds the coordinates of basis[i] * basis[j].
  std::vector<std::vector<ZVector>> mult_table;
};

/// Smallest multiplicatively closed Z-module containing 1 and the generators.
AlgebraClosure algebra_closure(const std::vector<ZMatrix>& generators);

/// Some nonzero integer vector v with A v = 0, certified exactly, or nothing
/// when A has full column rank.
std::optional<ZVector> integer_kernel_vector(const ZMatrix& a);

// ---- modules over Z/p^N ----

/// Howell-style echelon basis of a submodule of (Z/p^N)^n. Each row has a
/// leading entry p^a (a < N) at pivot_col, and the set is closed under
/// multiplication by powers of p, so |module| = prod p^(N - a).
class LocalModule {
 public:
  LocalModule(std::size_t n, u64 p, unsigned precision);

  std::size_t ambient() const { return n_; }
  u64 prime() const { return p_; }
  unsigned precision() const { return N_; }
  u64 modulus() const { return mod_; }

  /// Adds a generator; returns true when the module grew.
  bool add(std::vector<u64> v);
  bool contains(std::vector<u64> v) const;
  /// log_p |module|.
  unsigned log_order() const;
  /// log_p of the index in (Z/p^N)^n.
  unsigned log_index() const { return static_cast<unsigned>(n_) * N_ - log_order(); }

  const std::vector<std::vector<u64>>& rows() const { return rows_; }
  const std::vector<std::size_t>& pivot_cols() const { return piv_; }
  const std::vector<unsigned>& pivot_vals() const { return val_; }

 private:
  // Reduces v against the current rows; returns the column of the first
  // surviving entry or n_ when v reduces to zero.
  std::size_t reduce(std::vector<u64>& v) const;
  void insert(std::vector<u64> v);

  std::size_t n_;
  u64 p_;
  unsigned N_;
  u64 mod_;
  std::vector<std::vector<u64>> rows_;  // sorted by pivot column
  std::vector<std::size_t> piv_;
  std::vector<unsigned> val_;
};

/// p-adic valuation of a residue modulo p^N (N for zero).
unsigned local_valuation(u64 x, u64 p, unsigned precision);

/// Valuations of the Smith form of M over Z/p^N (N stands for a zero entry).
std::vector<unsigned> local_snf(const ModMatrix& m, u64 p, unsigned precision);

/// Right kernel over Z/p^N of a matrix whose nonzero elementary divisors are
/// all units. Throws InternalConsistencyError if some divisor is a proper
/// power of p.
std::vector<std::vector<u64>> unit_split_kernel(const ModMatrix& m, u64 p, unsigned precision);
/// Same, also returning the non-pivot columns: vector i is 1 at free_cols[i]
/// and 0 at the other free columns.
std::vector<std::vector<u64>> unit_split_kernel(const ModMatrix& m, u64 p, unsigned precision,
                                                std::vector<std::size_t>& free_cols);

// ---- JSON dump format ----
nlohmann::json to_json(const ZMatrix& m);
nlohmann::json to_json(const QMatrix& m);
nlohmann::json to_json(const ModMatrix& m);
ZMatrix zmatrix_from_json(const nlohmann::json& j);
ModMatrix modmatrix_from_json(const nlohmann::json& j);

}  // namespace eisrank
