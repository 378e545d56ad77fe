#include <doctest.h>

#include <set>

#include "eisrank/arith.hpp"
#include "eisrank/errors.hpp"

using namespace eisrank;
using namespace eisrank::arith;

namespace {

// Oracle: Bernoulli numbers by the Akiyama-Tanigawa algorithm (gives B_1 = +1/2).
std::vector<mpq_class> akiyama_tanigawa(unsigned n) {
  std::vector<mpq_class> out;
  std::vector<mpq_class> a(n + 1);
  for (unsigned m = 0; m <= n; ++m) {
    a[m] = mpq_class(1, m + 1);
    for (unsigned j = m; j >= 1; --j) {
      a[j - 1] = j * (a[j - 1] - a[j]);
      a[j - 1].canonicalize();
    }
    out.push_back(a[0]);
  }
  out[1] = -out[1];
  return out;
}

std::set<u64> brute_pth_powers(u64 p, u64 ell) {
  std::set<u64> s;
  for (u64 x = 1; x < ell; ++x) {
    u64 y = 1;
    for (u64 i = 0; i < p; ++i) y = y * x % ell;
    s.insert(y);
  }
  return s;
}

u64 brute_order(u64 x, u64 m) {
  u64 y = x % m, k = 1;
  while (y != 1) {
    y = y * x % m;
    ++k;
  }
  return k;
}

}  // namespace

TEST_CASE("pow_mod examples") {
  CHECK(pow_mod(ResidueClass(2, 11), 10).value() == 1);
  CHECK(pow_mod(ResidueClass(3, 11), 5).value() == 1);
  for (int x = 1; x < 11; ++x) CHECK(pow_mod(ResidueClass(x, 11), 0).value() == 1);
  CHECK(pow_mod(ResidueClass(0, 11), 3).value() == 0);
  CHECK(pow_mod(ResidueClass(-1, 11), 3).value() == 10);
  // Large exponent agrees with the reduced one for units.
  CHECK(pow_mod(ResidueClass(7, 101), 1000003).value() == pow_mod_raw(7, 1000003, 101));
}

TEST_CASE("is_pth_power examples and errors") {
  CHECK(is_pth_power(ResidueClass(1, 11), 5));
  CHECK_FALSE(is_pth_power(ResidueClass(2, 11), 5));
  CHECK(is_pth_power(ResidueClass(10, 11), 5));
  CHECK_THROWS_AS((void)is_pth_power(ResidueClass(2, 13), 5), ParameterError);
  CHECK_THROWS_AS((void)is_pth_power(ResidueClass(0, 11), 5), NotAUnitError);
}

TEST_CASE("p-th powers form a subgroup of index p for every l <= 200") {
  for (u64 ell : primes_up_to(200)) {
    for (u64 p : prime_factors(ell - 1)) {
      const auto oracle = brute_pth_powers(p, ell);
      u64 count = 0;
      for (u64 x = 1; x < ell; ++x) {
        const bool f = is_pth_power(ResidueClass(static_cast<i64>(x), ell), p);
        CHECK(f == (oracle.count(x) == 1));
        count += f ? 1 : 0;
      }
      CHECK(count == (ell - 1) / p);
      for (u64 x = 1; x < ell; x += 7)
        for (u64 y = 1; y < ell; y += 5) {
          const ResidueClass rx(static_cast<i64>(x), ell), ry(static_cast<i64>(y), ell);
          if (is_pth_power(rx, p) && is_pth_power(ry, p))
            CHECK(is_pth_power(ResidueClass(static_cast<i64>(x * y % ell), ell), p));
          CHECK(is_pth_power(pow_mod(rx, p), p));
        }
    }
  }
}

TEST_CASE("primitive p-th roots") {
  CHECK(primitive_pth_root(5, 11).value() == 4);
  CHECK(primitive_pth_root(3, 7).value() == 2);
  CHECK_THROWS_AS((void)primitive_pth_root(5, 13), ParameterError);
  for (u64 ell : primes_up_to(300)) {
    if (ell < 3) continue;
    // Oracle: least g whose brute-force order is l - 1.
    u64 g = 2;
    while (brute_order(g, ell) != ell - 1) ++g;
    CHECK(least_primitive_root(ell) == g);
    for (u64 p : prime_factors(ell - 1)) {
      const auto z = primitive_pth_root(p, ell);
      CHECK(brute_order(z.value(), ell) == p);
      CHECK(multiplicative_order(z) == p);
    }
  }
}

TEST_CASE("Bernoulli numbers") {
  CHECK(bernoulli(0) == 1);
  CHECK(bernoulli(1) == mpq_class(-1, 2));
  CHECK(bernoulli(2) == mpq_class(1, 6));
  CHECK(bernoulli(12) == mpq_class(-691, 2730));
  const auto oracle = akiyama_tanigawa(60);
  const auto table = bernoulli_table(60);
  for (unsigned n = 0; n <= 60; ++n) {
    CHECK(table[n] == oracle[n]);
    if (n > 1 && n % 2 == 1) CHECK(table[n] == 0);
  }
  // von Staudt-Clausen: denominator of B_12 is 2*3*5*7*13.
  CHECK(table[12].get_den() == 2730);
}

TEST_CASE("Kummer congruences") {
  const auto b = bernoulli_table(60);
  for (u64 p : {5ULL, 7ULL, 11ULL, 13ULL}) {
    for (unsigned m = 2; m <= 60; m += 2) {
      if (m % (p - 1) == 0) continue;
      for (unsigned n = m + static_cast<unsigned>(p - 1); n <= 60; n += static_cast<unsigned>(p - 1)) {
        mpq_class x = b[m] / m, y = b[n] / n;
        x.canonicalize();
        y.canonicalize();
        mpq_class d = x - y;
        if (d == 0) continue;
        // p divides the numerator of the difference, not its denominator.
        CHECK(mpz_divisible_ui_p(d.get_num_mpz_t(), p) != 0);
        CHECK(mpz_divisible_ui_p(d.get_den_mpz_t(), p) == 0);
      }
    }
  }
}

TEST_CASE("regular primes") {
  CHECK(is_regular_prime(5));
  CHECK(is_regular_prime(7));
  CHECK(is_regular_prime(13));
  CHECK_FALSE(is_regular_prime(37));
  CHECK_THROWS_AS((void)is_regular_prime(2), ParameterError);
  // Oracle: scan numerators of the Akiyama-Tanigawa table.
  const auto b = akiyama_tanigawa(100);
  std::vector<u64> irregular;
  for (u64 p : primes_up_to(103)) {
    if (p < 3) continue;
    bool reg = true;
    for (unsigned n = 2; n + 3 <= p; n += 2)
      if (mpz_divisible_ui_p(b[n].get_num_mpz_t(), p) != 0) reg = false;
    CHECK(is_regular_prime(p) == reg);
    if (!reg) irregular.push_back(p);
  }
  CHECK(irregular == std::vector<u64>{37, 59, 67, 101, 103});
}

TEST_CASE("p-adic valuation") {
  CHECK(p_adic_valuation(10, 5) == 1);
  CHECK(p_adic_valuation(12, 2) == 2);
  CHECK(p_adic_valuation(7, 5) == 0);
  CHECK(p_adic_valuation(-250, 5) == 3);
  CHECK_THROWS_AS((void)p_adic_valuation(0, 5), UndefinedValuationError);
}

TEST_CASE("primality") {
  std::vector<u64> small = primes_up_to(10000);
  std::set<u64> ps(small.begin(), small.end());
  for (u64 n = 0; n <= 10000; ++n) CHECK(is_prime(n) == (ps.count(n) == 1));
  CHECK(is_prime((1ULL << 61) - 1));
  CHECK_FALSE(is_prime(3215031751ULL));  // strong pseudoprime to bases 2,3,5,7
}
