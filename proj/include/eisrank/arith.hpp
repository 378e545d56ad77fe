#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <vector>

namespace eisrank::arith {

using u64 = std::uint64_t;
using i64 = std::int64_t;

inline u64 mul_mod(u64 a, u64 b, u64 m) {
  return static_cast<u64>(static_cast<unsigned __int128>(a) * b % m);
}

inline u64 add_mod(u64 a, u64 b, u64 m) {
  u64 s = a + b;
  return (s >= m || s < a) ? s - m : s;
}

inline u64 sub_mod(u64 a, u64 b, u64 m) { return a >= b ? a - b : a + (m - b); }

// Least nonnegative residue of a (possibly negative) integer.
inline u64 reduce(i64 a, u64 m) {
  i64 r = a % static_cast<i64>(m);
  return static_cast<u64>(r < 0 ? r + static_cast<i64>(m) : r);
}

u64 reduce(const mpz_class& a, u64 m);

// Plain modular exponentiation, any modulus >= 1.
u64 pow_mod_raw(u64 base, u64 exponent, u64 modulus);

// Inverse modulo m; throws NotAUnitError when gcd(a, m) != 1.
u64 inv_mod(u64 a, u64 m);

// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime(u64 n);

std::vector<u64> prime_factors(u64 n);

std::vector<u64> primes_up_to(u64 bound);

/// An element of (Z/mZ) for a prime modulus m.
class ResidueClass {
 public:
  ResidueClass(i64 value, u64 modulus);

  u64 value() const { return value_; }
  u64 modulus() const { return modulus_; }

  bool operator==(const ResidueClass&) const = default;

 private:
  u64 value_;
  u64 modulus_;
};

/// base^exponent by square-and-multiply. For a unit base the exponent is first
/// reduced modulo (modulus - 1).
ResidueClass pow_mod(const ResidueClass& base, u64 exponent);

/// True iff x^((l-1)/p) == 1, i.e. x lies in the index-p subgroup of
/// (Z/lZ)^x. Throws ParameterError when p does not divide l-1 and
/// NotAUnitError for x == 0.
bool is_pth_power(const ResidueClass& x, u64 p);

/// Least primitive root modulo a prime.
u64 least_primitive_root(u64 prime);

/// g^((l-1)/p) for the least primitive root g; an element of exact order p.
ResidueClass primitive_pth_root(u64 p, u64 ell);

/// Multiplicative order of x modulo its (prime) modulus.
u64 multiplicative_order(const ResidueClass& x);

/// Exact B_n with B_1 = -1/2.
mpq_class bernoulli(unsigned n);

/// B_0 .. B_n in one pass of the recurrence sum_{j<=n} C(n+1, j) B_j = 0.
std::vector<mpq_class> bernoulli_table(unsigned n);

/// p odd prime dividing no numerator of B_2, B_4, ..., B_{p-3}.
bool is_regular_prime(u64 p);

/// Largest e with p^e | n.
unsigned p_adic_valuation(i64 n, u64 p);
unsigned p_adic_valuation(const mpz_class& n, u64 p);

}  // namespace eisrank::arith
