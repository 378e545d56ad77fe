#include "eisrank/arith.hpp"

#include "eisrank/errors.hpp"

#include <array>
#include <string>

namespace eisrank::arith {

u64 reduce(const mpz_class& a, u64 m) {
  mpz_class r;
  mpz_fdiv_r_ui(r.get_mpz_t(), a.get_mpz_t(), m);
  return r.get_ui();
}

u64 pow_mod_raw(u64 base, u64 exponent, u64 modulus) {
  if (modulus == 1) return 0;
  u64 result = 1;
  base %= modulus;
  while (exponent != 0) {
    if (exponent & 1U) result = mul_mod(result, base, modulus);
    base = mul_mod(base, base, modulus);
    exponent >>= 1U;
  }
  return result;
}

u64 inv_mod(u64 a, u64 m) {
  i64 t = 0, new_t = 1;
  i64 r = static_cast<i64>(m), new_r = static_cast<i64>(a % m);
  while (new_r != 0) {
    i64 q = r / new_r;
    t = t - q * new_t;
    std::swap(t, new_t);
    r = r - q * new_r;
    std::swap(r, new_r);
  }
  if (r != 1) throw NotAUnitError(std::to_string(a) + " is not invertible modulo " + std::to_string(m));
  return reduce(t, m);
}

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % small == 0) return n == small;
  }
  u64 d = n - 1;
  unsigned s = 0;
  while ((d & 1U) == 0) {
    d >>= 1U;
    ++s;
  }
  // These witnesses are sufficient for every n < 2^64.
  constexpr std::array<u64, 12> witnesses{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (u64 a : witnesses) {
    u64 x = pow_mod_raw(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::vector<u64> prime_factors(u64 n) {
  std::vector<u64> out;
  for (u64 f = 2; f * f <= n; ++f) {
    if (n % f == 0) {
      out.push_back(f);
      while (n % f == 0) n /= f;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

std::vector<u64> primes_up_to(u64 bound) {
  std::vector<u64> out;
  if (bound < 2) return out;
  std::vector<bool> composite(bound + 1, false);
  for (u64 i = 2; i <= bound; ++i) {
    if (composite[i]) continue;
    out.push_back(i);
    for (u64 j = i * i; j <= bound; j += i) composite[j] = true;
  }
  return out;
}

ResidueClass::ResidueClass(i64 value, u64 modulus) : value_(0), modulus_(modulus) {
  if (modulus < 2) throw InvalidRingError("residue modulus must be at least 2");
  value_ = reduce(value, modulus);
}

ResidueClass pow_mod(const ResidueClass& base, u64 exponent) {
  const u64 m = base.modulus();
  if (base.value() != 0) exponent %= (m - 1);
  return ResidueClass(static_cast<i64>(pow_mod_raw(base.value(), exponent, m)), m);
}

bool is_pth_power(const ResidueClass& x, u64 p) {
  const u64 ell = x.modulus();
  if (p == 0 || (ell - 1) % p != 0) {
    throw ParameterError("p = " + std::to_string(p) + " does not divide l - 1 = " + std::to_string(ell - 1));
  }
  if (x.value() == 0) throw NotAUnitError("0 is not a unit modulo " + std::to_string(ell));
  return pow_mod_raw(x.value(), (ell - 1) / p, ell) == 1;
}

u64 least_primitive_root(u64 prime) {
  if (!is_prime(prime)) throw ParameterError(std::to_string(prime) + " is not prime");
  if (prime == 2) return 1;
  const auto factors = prime_factors(prime - 1);
  for (u64 g = 2; g < prime; ++g) {
    bool generator = true;
    for (u64 q : factors) {
      if (pow_mod_raw(g, (prime - 1) / q, prime) == 1) {
        generator = false;
        break;
      }
    }
    if (generator) return g;
  }
  throw InternalConsistencyError("no primitive root found");
}

ResidueClass primitive_pth_root(u64 p, u64 ell) {
  if (p == 0 || ell < 2 || (ell - 1) % p != 0) {
    throw ParameterError("p = " + std::to_string(p) + " does not divide l - 1 for l = " + std::to_string(ell));
  }
  const u64 g = least_primitive_root(ell);
  return ResidueClass(static_cast<i64>(pow_mod_raw(g, (ell - 1) / p, ell)), ell);
}

u64 multiplicative_order(const ResidueClass& x) {
  if (x.value() == 0) throw NotAUnitError("0 has no multiplicative order");
  const u64 m = x.modulus();
  u64 order = m - 1;
  for (u64 q : prime_factors(m - 1)) {
    while (order % q == 0 && pow_mod_raw(x.value(), order / q, m) == 1) order /= q;
  }
  return order;
}

std::vector<mpq_class> bernoulli_table(unsigned n) {
  std::vector<mpq_class> b(n + 1);
  b[0] = 1;
  for (unsigned m = 1; m <= n; ++m) {
    if (m > 1 && (m & 1U)) {
      b[m] = 0;
      continue;
    }
    // sum_{j=0}^{m} C(m+1, j) B_j = 0, solved for B_m (C(m+1, m) = m+1).
    mpq_class acc = 0;
    mpz_class binom = 1;  // C(m+1, 0)
    for (unsigned j = 0; j < m; ++j) {
      acc += mpq_class(binom) * b[j];
      binom = binom * (m + 1 - j) / (j + 1);
    }
    b[m] = -acc / (m + 1);
    b[m].canonicalize();
  }
  return b;
}

mpq_class bernoulli(unsigned n) { return bernoulli_table(n).back(); }

bool is_regular_prime(u64 p) {
  if (p == 2) throw ParameterError("regularity is defined for odd primes only");
  if (!is_prime(p)) throw ParameterError(std::to_string(p) + " is not prime");
  if (p <= 3) return true;
  const auto b = bernoulli_table(static_cast<unsigned>(p - 3));
  for (unsigned n = 2; n + 3 <= p; n += 2) {
    if (reduce(mpz_class(b[n].get_num()), p) == 0) return false;
  }
  return true;
}

unsigned p_adic_valuation(const mpz_class& n, u64 p) {
  if (n == 0) throw UndefinedValuationError("valuation of 0 is undefined");
  if (p < 2) throw ParameterError("valuation base must be at least 2");
  mpz_class m = abs(n);
  unsigned e = 0;
  while (mpz_divisible_ui_p(m.get_mpz_t(), p) != 0) {
    mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
    ++e;
  }
  return e;
}

unsigned p_adic_valuation(i64 n, u64 p) { return p_adic_valuation(mpz_class(static_cast<long>(n)), p); }

}  // namespace eisrank::arith
