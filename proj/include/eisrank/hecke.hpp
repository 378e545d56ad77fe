#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eisrank/linalg.hpp"
#include "eisrank/modsym.hpp"

namespace eisrank::hecke {

/// T_q for primes q up to the Sturm bound with q != ell, then w.
struct GeneratorSet {
  std::vector<std::string> names;
  std::vector<u64> primes;  // 0 marks w
  unsigned k = 0;

  static GeneratorSet for_level(u64 ell, unsigned k);
  std::size_t size() const { return names.size(); }
  /// 1 + q^(k-1) for T_q, -1 for w.
  mpz_class eisenstein_eigenvalue(std::size_t i) const;
};

/// Z-algebra generated by the Hecke operators on the cuspidal-plus lattice.
/// Only feasible for small spaces; the p-local pipeline below is what sweeps use.
struct HeckeAlgebraData {
  u64 ell = 0;
  unsigned k = 0;
  u64 sturm_bound = 0;
  std::vector<std::string> generator_names;
  std::vector<ZMatrix> basis;
  std::vector<std::vector<ZVector>> mult_table;
  ZVector one;
  // Coordinates of w + 1 and T_q - (1 + q^(k-1)); w is scaled by the power of
  // ell clearing its denominator, which changes nothing away from ell.
  std::vector<ZVector> eis_generators;
  std::vector<mpz_class> eigenvalues;  // of the generators as stored

  std::size_t rank() const { return basis.size(); }
  nlohmann::json to_json() const;
};

HeckeAlgebraData build_hecke_algebra(const modsym::ManinSymbolSpace& space);

/// Hecke operators on the cuspidal-plus lattice tensored with Z/p^N.
struct LocalOperators {
  u64 ell = 0;
  unsigned k = 0;
  u64 p = 0;
  unsigned precision = 0;
  std::vector<std::string> names;
  std::vector<ModMatrix> ops;
  std::vector<u64> eigenvalues;  // Eisenstein eigenvalues mod p^N

  std::size_t dim() const { return ops.empty() ? 0 : ops.front().rows(); }
  u64 modulus() const;
  nlohmann::json to_json() const;
  static LocalOperators from_json(const nlohmann::json& j);
};

LocalOperators local_operators(const modsym::LocalSymbolSpace& space);

/// A commutative algebra over Z/p^N in its regular representation: `mult[i]`
/// is multiplication by generator i, `one` the coordinates of 1.
struct RegularAlgebra {
  u64 p = 0;
  unsigned precision = 0;
  std::vector<std::string> names;
  std::vector<ModMatrix> mult;
  std::vector<u64> eigenvalues;
  std::vector<u64> one;
  // log_p index of the cyclic module T y inside the localized symbols.
  unsigned lattice_log_index = 0;

  std::size_t rank() const { return one.size(); }
  u64 modulus() const;
  /// mult[i] - eigenvalue[i]
  ModMatrix eisenstein_generator(std::size_t i) const;
  /// The same algebra modulo p^n, n <= precision.
  RegularAlgebra truncated(unsigned n) const;
  nlohmann::json to_json() const;
};

/// Largest N with p^N < 2^58 (the local symbol spaces need that headroom).
unsigned default_precision(u64 p);

/// dim over F_p of the common generalized kernel of T_g - lambda_g acting on
/// the symbols mod p; equals rank_{Z_p} of the localized cuspidal algebra.
std::size_t eisenstein_rank(const LocalOperators& ops);

/// The 𝔪-part of the symbols: operators restricted to the common generalized
/// kernel over Z/p^N (Fitting decomposition, one generator at a time).
LocalOperators localize(const LocalOperators& ops);

/// Regular representation of the algebra generated by localized operators,
/// through a cyclic vector. Needs multiplicity one (true for k < 12).
RegularAlgebra regular_representation(const LocalOperators& localized, std::uint64_t seed);

/// Number of eigenvalues with positive valuation of a random element of the
/// Eisenstein ideal, read off its characteristic polynomial over GF(p^7).
std::size_t flatness_rank(const LocalOperators& ops, std::uint64_t seed);

/// log_p |A / I| for the ideal I generated by the Eisenstein generators.
unsigned eisenstein_index(const RegularAlgebra& a);
/// Same number from the Smith form of [E_1 | E_2 | ...].
unsigned eisenstein_index_snf(const RegularAlgebra& a);
/// dim_{F_p} I / (p I + I^2), computed at precision e + 2 and checked at e + 3.
unsigned min_generators_eis(const RegularAlgebra& a, unsigned e);
/// Tangent dimension of A x_{Z/p^e} Z_p, computed at precision e + 2 and
/// checked at e + 3.
unsigned tangent_dim_T(const RegularAlgebra& a, unsigned e);

struct EisensteinLocalReport {
  std::size_t rank = 0;
  unsigned index_valuation = 0;
  unsigned min_gens = 0;
  unsigned tangent_dim_T = 0;
  bool nonzero_localization = false;
  // diagnostics
  std::size_t plus_dim = 0;
  unsigned precision = 0;
  unsigned lattice_log_index = 0;
  std::size_t flatness_rank = 0;
  unsigned index_snf = 0;

  nlohmann::json to_json() const;
  static EisensteinLocalReport from_json(const nlohmann::json& j);
};

/// Full p-local pipeline. Throws InternalConsistencyError when two routes
/// to the same number disagree. The regular representation is stored in
/// `algebra` when given and the localization is nonzero.
EisensteinLocalReport eisenstein_local_report(const LocalOperators& ops, RegularAlgebra* algebra = nullptr);

// Global versions on a Z-algebra, as independent oracles for small spaces.
std::size_t eisenstein_rank(u64 p, const HeckeAlgebraData& a);
unsigned eisenstein_index(u64 p, const HeckeAlgebraData& a);
unsigned min_generators_eis(u64 p, const HeckeAlgebraData& a);
unsigned tangent_dim_T(u64 p, const HeckeAlgebraData& a, unsigned e);
/// Regular representation of A tensored with Z/p^n.
RegularAlgebra regular_algebra(u64 p, unsigned n, const HeckeAlgebraData& a);

struct WeightStabilization {
  std::size_t rank_k = 0;
  std::size_t rank_k2 = 0;
  bool equal = false;
};

/// Compares the localized mod-p dimensions at weights k < k2, k2 = k mod p-1.
WeightStabilization weight_stabilization_check(u64 p, u64 ell, unsigned k, unsigned k2,
                                               u64 resource_bound = 6000);

}  // namespace eisrank::hecke
