#pragma once

#include <map>
#include <string>

#include "eisrank/arith.hpp"

namespace eisrank::invariants {

using arith::ResidueClass;
using arith::u64;

/// A validated triple (p, l, k).
struct ParameterPoint {
  u64 p = 0;
  u64 ell = 0;
  unsigned k = 0;
  unsigned nu = 0;   // v_p(l - 1)
  unsigned vpk = 0;  // v_p(k)

  /// Throws ParameterError unless p > 3 and l are prime, p | l - 1, and k is
  /// even and at least 2.
  static ParameterPoint make(u64 p, u64 ell, unsigned k);
};

struct HypothesisReport {
  bool p_gt_3 = false;
  bool p_divides_ell_minus_1 = false;
  bool k_even = false;
  bool p_minus_1_ndiv_k = false;
  bool p_regular = false;
  bool all_ok = false;
};

struct InvariantValue {
  ResidueClass value;
  bool is_pth_power;
};

/// prod_{i=1}^{(l-1)/2} i^i mod l.
InvariantValue merel_invariant(const ParameterPoint& pt);

/// prod_{j=1}^{p-1} (1 - zeta^j)^(j^(k-2)) mod l for the deterministic zeta.
InvariantValue wake_unit(const ParameterPoint& pt);
/// Same product for an explicitly chosen p-th root of unity zeta.
InvariantValue wake_unit(const ParameterPoint& pt, const ResidueClass& zeta);

/// prod_{i=1}^{l-1} i^(sum_{j<i} j^(k-1)) mod l.
InvariantValue lecouturier_invariant(const ParameterPoint& pt);

HypothesisReport check_setup(const ParameterPoint& pt);
/// Same flags for a raw triple that need not form a valid point.
HypothesisReport check_setup(u64 p, u64 ell, unsigned k);

struct Prediction {
  bool c0_cup_b0_nonzero = true;
  bool c0_cup_a0_nonzero = true;
  bool rank_gt_1_predicted = false;
  bool eis_principal_predicted = true;
  std::map<std::string, ResidueClass> invariant_values;
  // p-th power flags behind the prediction; merel is meaningful at k = 2.
  bool merel_pth = false;
  bool wake_pth = false;
  bool lecouturier_pth = false;
};

/// Rank and principality truth table from the two p-th power flags.
Prediction predict_from_flags(unsigned k, bool wake_pth, bool lecouturier_pth);

/// Throws HypothesesNotSatisfied when check_setup fails.
Prediction predict(const ParameterPoint& pt);

}  // namespace eisrank::invariants
