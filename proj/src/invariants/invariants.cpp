#include "eisrank/invariants.hpp"

#include "eisrank/errors.hpp"

namespace eisrank::invariants {

using arith::i64;

ParameterPoint ParameterPoint::make(u64 p, u64 ell, unsigned k) {
  if (p <= 3 || !arith::is_prime(p)) throw ParameterError("p must be a prime greater than 3, got " + std::to_string(p));
  if (!arith::is_prime(ell)) throw ParameterError("l must be prime, got " + std::to_string(ell));
  if ((ell - 1) % p != 0) throw ParameterError("p = " + std::to_string(p) + " does not divide l - 1 = " + std::to_string(ell - 1));
  if (k < 2 || k % 2 != 0) throw ParameterError("k must be even and at least 2, got " + std::to_string(k));
  ParameterPoint pt;
  pt.p = p;
  pt.ell = ell;
  pt.k = k;
  pt.nu = arith::p_adic_valuation(static_cast<i64>(ell - 1), p);
  pt.vpk = arith::p_adic_valuation(static_cast<i64>(k), p);
  return pt;
}

namespace {

InvariantValue finish(u64 value, const ParameterPoint& pt) {
  ResidueClass v(static_cast<i64>(value), pt.ell);
  return {v, arith::is_pth_power(v, pt.p)};
}

}  // namespace

InvariantValue merel_invariant(const ParameterPoint& pt) {
  const u64 l = pt.ell;
  u64 acc = 1;
  for (u64 i = 1; i <= (l - 1) / 2; ++i) acc = arith::mul_mod(acc, arith::pow_mod_raw(i, i % (l - 1), l), l);
  return finish(acc, pt);
}

InvariantValue wake_unit(const ParameterPoint& pt, const ResidueClass& zeta) {
  const u64 l = pt.ell;
  if (zeta.modulus() != l || arith::pow_mod_raw(zeta.value(), pt.p, l) != 1 || zeta.value() == 1)
    throw ParameterError("zeta is not a primitive p-th root of unity mod l");
  u64 acc = 1;
  u64 zj = 1;
  for (u64 j = 1; j < pt.p; ++j) {
    zj = arith::mul_mod(zj, zeta.value(), l);
    const u64 base = arith::sub_mod(1, zj, l);
    const u64 e = arith::pow_mod_raw(j, pt.k - 2, l - 1);
    acc = arith::mul_mod(acc, arith::pow_mod_raw(base, e, l), l);
  }
  return finish(acc, pt);
}

InvariantValue wake_unit(const ParameterPoint& pt) { return wake_unit(pt, arith::primitive_pth_root(pt.p, pt.ell)); }

InvariantValue lecouturier_invariant(const ParameterPoint& pt) {
  const u64 l = pt.ell;
  u64 acc = 1;
  u64 s = 0;  // sum_{j<i} j^(k-1) mod (l - 1)
  for (u64 i = 1; i < l; ++i) {
    acc = arith::mul_mod(acc, arith::pow_mod_raw(i, s, l), l);
    s = arith::add_mod(s, arith::pow_mod_raw(i, pt.k - 1, l - 1), l - 1);
  }
  return finish(acc, pt);
}

HypothesisReport check_setup(u64 p, u64 ell, unsigned k) {
  HypothesisReport r;
  const bool p_prime = arith::is_prime(p);
  r.p_gt_3 = p_prime && p > 3;
  r.p_divides_ell_minus_1 = p_prime && arith::is_prime(ell) && (ell - 1) % p == 0;
  r.k_even = k >= 2 && k % 2 == 0;
  r.p_minus_1_ndiv_k = p >= 2 && k % (p - 1) != 0;
  r.p_regular = p_prime && p > 2 && arith::is_regular_prime(p);
  r.all_ok = r.p_gt_3 && r.p_divides_ell_minus_1 && r.k_even && r.p_minus_1_ndiv_k && r.p_regular;
  return r;
}

HypothesisReport check_setup(const ParameterPoint& pt) { return check_setup(pt.p, pt.ell, pt.k); }

Prediction predict_from_flags(unsigned k, bool wake_pth, bool lecouturier_pth) {
  Prediction out;
  out.wake_pth = wake_pth;
  out.lecouturier_pth = lecouturier_pth;
  // At weight 2 the b0 class is never consulted; it is fixed to true.
  out.c0_cup_b0_nonzero = k == 2 ? true : !wake_pth;
  out.c0_cup_a0_nonzero = !lecouturier_pth;
  out.rank_gt_1_predicted =
      k == 2 ? !out.c0_cup_a0_nonzero : !(out.c0_cup_b0_nonzero && out.c0_cup_a0_nonzero);
  out.eis_principal_predicted = k == 2 || out.c0_cup_b0_nonzero;
  return out;
}

Prediction predict(const ParameterPoint& pt) {
  const auto h = check_setup(pt);
  if (!h.all_ok)
    throw HypothesesNotSatisfied("hypotheses fail at (p, l, k) = (" + std::to_string(pt.p) + ", " +
                                 std::to_string(pt.ell) + ", " + std::to_string(pt.k) + ")");
  const auto merel = merel_invariant(pt);
  const auto wake = wake_unit(pt);
  const auto lec = lecouturier_invariant(pt);
  Prediction out = predict_from_flags(pt.k, wake.is_pth_power, lec.is_pth_power);
  out.merel_pth = merel.is_pth_power;
  out.invariant_values.emplace("merel", merel.value);
  out.invariant_values.emplace("wake", wake.value);
  out.invariant_values.emplace("lecouturier", lec.value);
  return out;
}

}  // namespace eisrank::invariants
