#pragma once

#include <utility>
#include <vector>

#include "eisrank/modsym.hpp"

namespace eisrank::modsym::internal {

void note_build();

/// Representative (c, d) of point index pt: (pt, 1) for pt < ell, (1, 0) for ell.
inline std::pair<i64, i64> point_lift_row(std::size_t pt, u64 ell) {
  if (pt == ell) return {1, 0};
  return {static_cast<i64>(pt), 1};
}

/// A matrix in SL_2(Z) with bottom row (c, d) for point pt.
inline Mat2 point_lift(std::size_t pt, u64 ell) {
  if (pt == ell) return {0, -1, 1, 0};
  return {1, 0, static_cast<i64>(pt), 1};
}

/// Coefficients (by power of X) of P(aX + bY, cX + dY) for a polynomial P
/// homogeneous of degree deg given by its coefficients.
template <class T>
std::vector<T> act_poly(const Mat2& h, const std::vector<T>& p) {
  const std::size_t n = p.size();  // deg + 1
  // pa[e] = (aX + bY)^e, pc[e] = (cX + dY)^e.
  std::vector<std::vector<T>> pa(n), pc(n);
  pa[0] = {T(1)};
  pc[0] = {T(1)};
  for (std::size_t e = 1; e < n; ++e) {
    pa[e].assign(e + 1, T(0));
    pc[e].assign(e + 1, T(0));
    for (std::size_t t = 0; t < e; ++t) {
      pa[e][t] += pa[e - 1][t] * T(h.b);
      pa[e][t + 1] += pa[e - 1][t] * T(h.a);
      pc[e][t] += pc[e - 1][t] * T(h.d);
      pc[e][t + 1] += pc[e - 1][t] * T(h.c);
    }
  }
  std::vector<T> out(n, T(0));
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] == T(0)) continue;
    const auto& x = pa[i];
    const auto& y = pc[n - 1 - i];
    for (std::size_t s = 0; s < x.size(); ++s) {
      if (x[s] == T(0)) continue;
      T f = p[i] * x[s];
      for (std::size_t t = 0; t < y.size(); ++t) out[s + t] += f * y[t];
    }
  }
  return out;
}

template <class T>
std::vector<T> act_monomial(const Mat2& h, unsigned i, unsigned k) {
  std::vector<T> p(k - 1, T(0));
  p[i] = T(1);
  return act_poly(h, p);
}

}  // namespace eisrank::modsym::internal

namespace eisrank::modsym::internal {

inline mpz_class to_mpz(__int128 x) {
  bool neg = x < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(x + 1)) + 1 : static_cast<unsigned __int128>(x);
  mpz_class hi = static_cast<unsigned long>(u >> 64);
  mpz_class lo = static_cast<unsigned long>(u & ~0ULL);
  mpz_class r = (hi << 64) + lo;
  return neg ? mpz_class(-r) : r;
}

}  // namespace eisrank::modsym::internal
