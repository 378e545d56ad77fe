#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "eisrank/linalg.hpp"

namespace eisrank::modsym {

enum class Subspace { Full, Cuspidal, CuspidalPlus };

const char* subspace_name(Subspace s);
Subspace parse_subspace(const std::string& s);

struct Mat2 {
  i64 a, b, c, d;
};

/// Determinant-q matrices acting as T_q on Manin symbols (continued fractions).
std::vector<Mat2> heilbronn_cremona(i64 q);
/// Merel's set {ad - bc = n, a > b >= 0, d > c >= 0}.
std::vector<Mat2> heilbronn_merel(i64 n);

/// dim S_k(Gamma_0(ell)) for prime ell, even k >= 2.
std::size_t dim_cusp_forms(u64 ell, unsigned k);
/// Expected dimension of the full space: 2 dim S_k plus the boundary part.
std::size_t dim_full_expected(u64 ell, unsigned k);

/// ceil(k (ell + 1) / 12).
u64 sturm_bound(u64 ell, unsigned k);

/// Primes q <= sturm bound with q != ell.
std::vector<u64> hecke_generator_primes(u64 ell, unsigned k);

using SymbolCombo = std::vector<std::pair<std::size_t, mpz_class>>;

/// Generators and relations: symbol s = pt*(k-1) + i stands for
/// [X^i Y^(k-2-i), pt], with pt = u for (u:1) and pt = ell for (1:0).
class Presentation {
 public:
  Presentation(u64 ell, unsigned k);

  u64 level() const { return ell_; }
  unsigned weight() const { return k_; }
  std::size_t num_symbols() const { return (ell_ + 1) * (k_ - 1); }
  std::size_t point_index(i64 c, i64 d) const;
  std::pair<std::size_t, unsigned> symbol(std::size_t s) const {
    return {s / (k_ - 1), static_cast<unsigned>(s % (k_ - 1))};
  }

  /// After the two-term relations every symbol is sign * (class) or zero.
  std::size_t num_classes() const { return class_rep_.size(); }
  int symbol_class(std::size_t s) const { return sym_class_[s]; }
  int symbol_sign(std::size_t s) const { return sym_sign_[s]; }
  std::size_t class_representative(std::size_t c) const { return class_rep_[c]; }

  /// Three-term relations written over classes.
  const std::vector<std::vector<std::pair<std::size_t, i64>>>& relations() const { return rel_; }

  /// Coefficients of the boundary on the cusps (oo, 0).
  std::array<i64, 2> boundary(std::size_t s) const;
  SymbolCombo star_image(std::size_t s) const;
  /// Image under the unnormalized matrix (0 -1; ell 0).
  SymbolCombo w_image(std::size_t s) const;
  /// Adds sum_h [P|h, pt h] into acc (indexed by symbol).
  void heilbronn_image(std::size_t s, const std::vector<Mat2>& hs, std::vector<__int128>& acc) const;

 private:
  u64 ell_;
  unsigned k_;
  std::vector<i64> inverse_;
  std::vector<int> sym_class_;
  std::vector<int> sym_sign_;
  std::vector<std::size_t> class_rep_;
  std::vector<std::vector<std::pair<std::size_t, i64>>> rel_;
};

struct OperatorMatrix {
  std::string name;
  Subspace subspace = Subspace::CuspidalPlus;
  // Column j holds the coordinates of the image of basis vector j; entries
  // are matrix(i, j) / denominator.
  ZMatrix matrix;
  mpz_class denominator = 1;

  bool integral() const { return denominator == 1; }
  QMatrix rational() const;
};

/// A sublattice with a basis whose restriction to `cols` is upper triangular
/// with nonzero diagonal.
struct LatticeBasis {
  ZMatrix rows;
  std::vector<std::size_t> cols;
  std::size_t rank() const { return rows.rows(); }
  /// Coordinates of v; nothing if v is not in the lattice (checked on all
  /// entries when `check` is set, otherwise only on `cols`).
  std::optional<ZVector> coordinates(const ZVector& v, bool check = false) const;
};

/// Exact weight-k modular symbols for Gamma_0(ell) over Z, in coordinates of
/// the saturated lattice spanned by the Manin symbols. Coordinates grow
/// quickly with ell and k, so large spaces are slow.
class ManinSymbolSpace {
 public:
  static std::shared_ptr<const ManinSymbolSpace> build(u64 ell, unsigned k, u64 resource_bound = 6000);

  const Presentation& presentation() const { return pres_; }
  u64 level() const { return pres_.level(); }
  unsigned weight() const { return pres_.weight(); }
  std::size_t num_symbols() const { return pres_.num_symbols(); }

  std::size_t dim(Subspace s) const { return basis(s).rank(); }
  /// Basis of a subspace in coordinates of the full lattice.
  const LatticeBasis& basis(Subspace s) const;
  /// Basis of the full lattice as integer combinations of Manin symbols.
  const std::vector<SymbolCombo>& lattice_basis() const { return basis_; }
  /// Coordinates of Manin symbol s in the full lattice.
  const ZVector& symbol_coordinates(std::size_t s) const { return sym_lat_[s]; }
  /// Row i: boundary of basis element i on the cusps (oo, 0).
  const ZMatrix& boundary() const { return boundary_; }

  OperatorMatrix hecke_operator(u64 q, Subspace s) const;
  OperatorMatrix atkin_lehner(Subspace s) const;
  OperatorMatrix star_involution(Subspace s) const;
  /// Operator from Merel's determinant-n set (U_ell for n = ell).
  OperatorMatrix merel_operator(u64 n, Subspace s) const;

  nlohmann::json summary_json() const;

 private:
  explicit ManinSymbolSpace(u64 ell, unsigned k) : pres_(ell, k) {}
  void solve();
  void build_subspaces();
  void check() const;

  OperatorMatrix restrict_operator(const std::string& name, Subspace s,
                                   const std::vector<std::vector<std::pair<std::size_t, mpz_class>>>& images,
                                   const mpz_class& scale) const;
  OperatorMatrix heilbronn_operator(const std::string& name, const std::vector<Mat2>& hs, Subspace s) const;

  Presentation pres_;
  std::vector<SymbolCombo> combo_images(const std::function<SymbolCombo(std::size_t)>& f) const;

  std::vector<SymbolCombo> basis_;
  std::vector<ZVector> sym_lat_;
  ZMatrix boundary_;
  LatticeBasis full_, cusp_, plus_;

  mutable std::mutex cache_mu_;
  mutable std::map<std::string, OperatorMatrix> cache_;
};

using SpacePtr = std::shared_ptr<const ManinSymbolSpace>;

/// The same space over Z/p^N: relations solved with p-unit pivots, so the
/// free symbols give a basis of the full lattice tensored with Z_p. Used by
/// the p-local Hecke computations.
class LocalSymbolSpace {
 public:
  static std::shared_ptr<const LocalSymbolSpace> build(u64 ell, unsigned k, u64 p, unsigned precision,
                                                       u64 resource_bound = 6000);

  const Presentation& presentation() const { return pres_; }
  u64 level() const { return pres_.level(); }
  unsigned weight() const { return pres_.weight(); }
  u64 prime() const { return p_; }
  unsigned precision() const { return N_; }
  u64 modulus() const { return mod_; }

  std::size_t dim(Subspace s) const;

  ModMatrix hecke_operator(u64 q, Subspace s) const;
  ModMatrix atkin_lehner(Subspace s) const;
  ModMatrix star_involution(Subspace s) const;

 private:
  struct Basis {
    std::vector<std::vector<u64>> rows;  // free coordinates
    std::vector<std::size_t> cols;       // rows(i, cols[j]) = delta_ij
  };
  // Writes the image of symbol s as residues indexed by symbol.
  using SymbolMap = std::function<void(std::size_t, std::vector<u64>&)>;

  LocalSymbolSpace(u64 ell, unsigned k) : pres_(ell, k) {}
  void solve();
  void build_subspaces();
  void check() const;
  const Basis& basis(Subspace s) const;
  ModMatrix restrict_operator(Subspace s, const SymbolMap& f) const;

  Presentation pres_;
  u64 p_ = 0;
  unsigned N_ = 0;
  u64 mod_ = 0;
  std::vector<std::size_t> free_sym_;
  std::vector<std::vector<u64>> sym_vec_;  // num_symbols x D, empty for zero symbols
  Basis full_, cusp_, plus_;
};

using LocalSpacePtr = std::shared_ptr<const LocalSymbolSpace>;

/// Count of exact or local space builds in this process.
std::size_t build_count();

}  // namespace eisrank::modsym
