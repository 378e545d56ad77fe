#include <algorithm>
#include <atomic>
#include <map>

#include "eisrank/arith.hpp"
#include "eisrank/modsym.hpp"
#include "modsym_internal.hpp"

namespace eisrank::modsym {

namespace {
std::atomic<std::size_t> g_builds{0};
}

void internal::note_build() { ++g_builds; }
std::size_t build_count() { return g_builds.load(); }

Presentation::Presentation(u64 ell, unsigned k) : ell_(ell), k_(k) {
  if (!arith::is_prime(ell)) throw ParameterError("level must be prime");
  if (k < 2 || k % 2) throw ParameterError("weight must be even and >= 2");
  inverse_.assign(ell, 0);
  for (u64 i = 1; i < ell; ++i) inverse_[i] = static_cast<i64>(arith::inv_mod(i, ell));

  const std::size_t n = num_symbols();
  const unsigned w = k - 1;

  // sigma = (0 -1; 1 0): [X^i Y^j, (u,v)] + (-1)^i [X^j Y^i, (v,-u)] = 0.
  sym_class_.assign(n, -2);
  sym_sign_.assign(n, 1);
  for (std::size_t s = 0; s < n; ++s) {
    if (sym_class_[s] != -2) continue;
    auto [pt, i] = symbol(s);
    auto [u, v] = internal::point_lift_row(pt, ell_);
    std::size_t t = point_index(v, -u) * w + (k_ - 2 - i);
    if (t == s) {
      if (i % 2 == 0) {
        sym_class_[s] = -1;
      } else {
        sym_class_[s] = static_cast<int>(class_rep_.size());
        class_rep_.push_back(s);
      }
      continue;
    }
    sym_class_[s] = sym_class_[t] = static_cast<int>(class_rep_.size());
    class_rep_.push_back(s);
    sym_sign_[t] = (i % 2 == 0) ? -1 : 1;
  }

  // tau = (0 -1; 1 -1): x + x tau + x tau^2 = 0. The relations at one point of
  // a tau-orbit span those at the others.
  const Mat2 tau{0, -1, 1, -1}, tau2{-1, 1, -1, 0};
  std::vector<char> seen(ell_ + 1, 0);
  std::vector<i64> acc(class_rep_.size(), 0);
  std::vector<std::size_t> touched;
  auto add = [&](std::size_t pt, unsigned i, i64 coef) {
    std::size_t s = pt * w + i;
    int c = sym_class_[s];
    if (c < 0 || coef == 0) return;
    if (acc[static_cast<std::size_t>(c)] == 0) touched.push_back(static_cast<std::size_t>(c));
    acc[static_cast<std::size_t>(c)] += sym_sign_[s] * coef;
  };
  for (std::size_t pt = 0; pt <= ell_; ++pt) {
    if (seen[pt]) continue;
    auto [u, v] = internal::point_lift_row(pt, ell_);
    std::size_t p1 = point_index(u * tau.a + v * tau.c, u * tau.b + v * tau.d);
    std::size_t p2 = point_index(u * tau2.a + v * tau2.c, u * tau2.b + v * tau2.d);
    seen[pt] = seen[p1] = seen[p2] = 1;
    for (unsigned i = 0; i < w; ++i) {
      add(pt, i, 1);
      auto q1 = internal::act_monomial<i64>(tau, i, k_);
      auto q2 = internal::act_monomial<i64>(tau2, i, k_);
      for (unsigned a = 0; a < w; ++a) {
        add(p1, a, q1[a]);
        add(p2, a, q2[a]);
      }
      std::vector<std::pair<std::size_t, i64>> row;
      std::sort(touched.begin(), touched.end());
      for (std::size_t c : touched) {
        if (acc[c] != 0) row.emplace_back(c, acc[c]);
        acc[c] = 0;
      }
      touched.clear();
      if (!row.empty()) rel_.push_back(std::move(row));
    }
  }
}

std::size_t Presentation::point_index(i64 c, i64 d) const {
  i64 l = static_cast<i64>(ell_);
  i64 cc = ((c % l) + l) % l, dd = ((d % l) + l) % l;
  if (dd != 0) return static_cast<std::size_t>(cc * inverse_[static_cast<std::size_t>(dd)] % l);
  if (cc == 0) throw InternalConsistencyError("(0:0) is not a point of P^1");
  return ell_;
}

std::array<i64, 2> Presentation::boundary(std::size_t s) const {
  // [P, g] = (gP){g0, g oo}: only X^(k-2) survives at g oo = a/c and only
  // Y^(k-2) at g0 = b/d. Cusp oo <-> ell | denominator.
  auto [pt, i] = symbol(s);
  auto [c, d] = internal::point_lift_row(pt, ell_);
  std::array<i64, 2> out{0, 0};
  i64 l = static_cast<i64>(ell_);
  if (i == k_ - 2) out[(c % l == 0) ? 0 : 1] += 1;
  if (i == 0) out[(d % l == 0) ? 0 : 1] -= 1;
  return out;
}

SymbolCombo Presentation::star_image(std::size_t s) const {
  auto [pt, i] = symbol(s);
  auto [u, v] = internal::point_lift_row(pt, ell_);
  std::size_t t = point_index(-u, v) * (k_ - 1) + i;
  return {{t, mpz_class(i % 2 ? -1 : 1)}};
}

namespace {

// Adds coef * Q{0, x} for x = num/den (den = 0 means x = oo) as Manin symbols.
void add_zero_to(const Presentation& pr, const std::vector<mpz_class>& q, i64 num, i64 den, int coef,
                 std::map<std::size_t, mpz_class>& out) {
  const std::size_t w = pr.weight() - 1;
  auto put = [&](const std::vector<mpz_class>& poly, i64 c, i64 d) {
    std::size_t base = pr.point_index(c, d) * w;
    for (std::size_t a = 0; a < w; ++a)
      if (poly[a] != 0) out[base + a] += coef * poly[a];
  };
  put(q, 0, 1);  // Q{0, oo}
  if (den == 0) return;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  // Convergents p_j / q_j; g_j = ((-1)^(j-1) p_j, p_{j-1}; (-1)^(j-1) q_j, q_{j-1}).
  i64 pm2 = 0, pm1 = 1, qm2 = 1, qm1 = 0;
  i64 a = num, b = den;
  for (int j = 0;; ++j) {
    i64 t = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --t;
    i64 r = a - t * b;
    i64 pj = t * pm1 + pm2, qj = t * qm1 + qm2;
    i64 sg = (j % 2 == 0) ? -1 : 1;  // (-1)^(j-1)
    Mat2 g{sg * pj, pm1, sg * qj, qm1};
    put(internal::act_poly(g, q), g.c, g.d);
    pm2 = pm1;
    pm1 = pj;
    qm2 = qm1;
    qm1 = qj;
    if (r == 0) break;
    a = b;
    b = r;
  }
}

}  // namespace

SymbolCombo Presentation::w_image(std::size_t s) const {
  auto [pt, i] = symbol(s);
  Mat2 g = internal::point_lift(pt, ell_);
  i64 l = static_cast<i64>(ell_);
  // W g = (-c, -d; l a, l b); Q = (W g) P = P(l b X + d Y, -l a X - c Y).
  std::vector<mpz_class> p(k_ - 1, 0);
  p[i] = 1;
  Mat2 sub{l * g.b, g.d, -l * g.a, -g.c};
  std::vector<mpz_class> q = internal::act_poly(sub, p);
  // Q{M0, M oo} = Q{0, M oo} - Q{0, M0}, M0 = -d/(l b), M oo = -c/(l a).
  std::map<std::size_t, mpz_class> acc;
  add_zero_to(*this, q, -g.c, l * g.a, 1, acc);
  add_zero_to(*this, q, -g.d, l * g.b, -1, acc);
  SymbolCombo out;
  for (auto& [t, c] : acc)
    if (c != 0) out.emplace_back(t, c);
  return out;
}

void Presentation::heilbronn_image(std::size_t s, const std::vector<Mat2>& hs, std::vector<__int128>& acc) const {
  auto [pt, i] = symbol(s);
  auto [u, v] = internal::point_lift_row(pt, ell_);
  const std::size_t w = k_ - 1;
  for (const Mat2& h : hs) {
    i64 c = u * h.a + v * h.c, d = u * h.b + v * h.d;
    if (c % static_cast<i64>(ell_) == 0 && d % static_cast<i64>(ell_) == 0) continue;  // not in P^1
    std::size_t t = point_index(c, d);
    auto poly = internal::act_monomial<__int128>(h, i, k_);
    std::size_t base = t * w;
    for (std::size_t a = 0; a < w; ++a) acc[base + a] += poly[a];
  }
}

}  // namespace eisrank::modsym
