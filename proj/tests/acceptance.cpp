// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <thread>

#include <unistd.h>

#include "eisrank/harness.hpp"

using namespace eisrank;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  int shown = 0;

  void fail(const std::string& why) {
    ok = false;
    if (shown++ < 5) detail += (detail.empty() ? "" : "; ") + why;
  }
};

std::string pt_name(const invariants::ParameterPoint& p) {
  return "(" + std::to_string(p.p) + ", " + std::to_string(p.ell) + ", " + std::to_string(p.k) + ")";
}

bool evaluated(const harness::VerificationRecord& r) { return r.hypotheses.all_ok && r.skip_reason.empty(); }

// ---- criterion 6 pieces ----

// |coker(M) / m| = prod gcd(d_i, m) against the image of M on (Z/m)^cols.
void snf_hnf_properties(Outcome& out, std::size_t& cases) {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> entry(-5, 5), dim(1, 3);
  for (int t = 0; t < 10000; ++t) {
    const std::size_t r = dim(rng), c = dim(rng);
    ZMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = entry(rng);
    const auto d = snf(m).invariant_factors;
    for (long mod : {2, 3, 4, 5, 6, 8, 9}) {
      long expected = 1;
      for (const auto& x : d) {
        mpz_class g;
        mpz_class mm = mod;
        mpz_gcd(g.get_mpz_t(), x.get_mpz_t(), mm.get_mpz_t());
        expected *= g.get_si();
      }
      std::set<std::vector<long>> image;
      std::vector<long> x(c, 0);
      for (;;) {
        std::vector<long> y(r, 0);
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t j = 0; j < c; ++j) y[i] += m(i, j).get_si() * x[j];
          y[i] = ((y[i] % mod) + mod) % mod;
        }
        image.insert(y);
        std::size_t j = 0;
        while (j < c && ++x[j] == mod) x[j++] = 0;
        if (j == c) break;
      }
      long total = 1;
      for (std::size_t i = 0; i < r; ++i) total *= mod;
      if (total / static_cast<long>(image.size()) != expected) out.fail("snf mismatch at modulus " + std::to_string(mod));
    }
    // HNF: echelon shape, reduced above pivots, same row lattice
    const ZMatrix h = hnf(m);
    std::size_t last = 0;
    bool first = true;
    for (std::size_t i = 0; i < h.rows(); ++i) {
      std::size_t piv = 0;
      while (piv < h.cols() && h(i, piv) == 0) ++piv;
      if (piv == h.cols() || h(i, piv) <= 0 || (!first && piv <= last)) out.fail("hnf shape");
      for (std::size_t k = 0; k < i && piv < h.cols(); ++k)
        if (h(k, piv) < 0 || h(k, piv) >= h(i, piv)) out.fail("hnf reduction");
      last = piv;
      first = false;
    }
    std::vector<ZVector> rows;
    for (std::size_t i = 0; i < r; ++i) rows.push_back(m.row(i));
    for (std::size_t i = 0; i < h.rows(); ++i) rows.push_back(h.row(i));
    if (!(hnf(ZMatrix::from_rows(rows, c)) == h)) out.fail("hnf lattice grows");
    mpz_class pm = 1, ph = 1;
    std::size_t rm = 0, rh = 0;
    for (const auto& x : d)
      if (x != 0) pm *= x, ++rm;
    if (h.rows() > 0)
      for (const auto& x : snf(h).invariant_factors)
        if (x != 0) ph *= x, ++rh;
    if (rm != rh || pm != ph) out.fail("hnf index");
    ++cases;
  }
}

void pth_power_counts(Outcome& out) {
  for (u64 ell : arith::primes_up_to(200))
    for (u64 p : arith::prime_factors(ell - 1)) {
      u64 count = 0;
      for (u64 x = 1; x < ell; ++x) {
        const arith::ResidueClass rx(static_cast<i64>(x), ell);
        count += arith::is_pth_power(rx, p);
        if (!arith::is_pth_power(arith::pow_mod(rx, p), p)) out.fail("x^p not a p-th power");
      }
      if (count != (ell - 1) / p) out.fail("count at l=" + std::to_string(ell) + " p=" + std::to_string(p));
    }
}

void wake_invariance(Outcome& out) {
  for (u64 p : {5, 7})
    for (u64 ell = p + 1; ell <= 100; ell += p) {
      if (!arith::is_prime(ell)) continue;
      const auto zeta = arith::primitive_pth_root(p, ell);
      for (unsigned k = 2; k <= 10; k += 2) {
        const auto pt = invariants::ParameterPoint::make(p, ell, k);
        const bool ref = invariants::wake_unit(pt).is_pth_power;
        for (u64 j = 1; j < p; ++j)
          if (invariants::wake_unit(pt, arith::pow_mod(zeta, j)).is_pth_power != ref)
            out.fail("wake flag at " + pt_name(pt));
      }
    }
}

// All generator pairs commute (checked on random vectors) and the dimensions
// match the formulas, on every space the sweep built.
void built_spaces(Outcome& out, const std::vector<harness::VerificationRecord>& recs, const harness::Cache& cache,
                  std::size_t& spaces) {
  std::mt19937_64 rng(7);
  std::set<std::tuple<u64, u64, unsigned>> seen;
  for (const auto& r : recs) {
    if (!evaluated(r)) continue;
    const auto key = std::make_tuple(r.point.p, r.point.ell, r.point.k);
    if (!seen.insert(key).second) continue;
    const auto ops = harness::load_operators(r.point.p, r.point.ell, r.point.k, 6000, &cache);
    const std::string tag = std::to_string(r.point.p) + "^" + std::to_string(ops.precision);
    const auto sp = cache.get("modsym/" + std::to_string(r.point.ell) + "_" + std::to_string(r.point.k) + "/space.json");
    const std::size_t ds = modsym::dim_cusp_forms(r.point.ell, r.point.k);
    if (!sp || !sp->contains(tag)) {
      out.fail("space summary missing at " + pt_name(r.point));
      continue;
    }
    const auto& s = sp->at(tag);
    if (s.at("dim_plus").get<std::size_t>() != ds || ops.dim() != ds ||
        s.at("dim_cuspidal").get<std::size_t>() != 2 * ds ||
        s.at("dim_full").get<std::size_t>() != modsym::dim_full_expected(r.point.ell, r.point.k))
      out.fail("dimensions at " + pt_name(r.point));
    std::uniform_int_distribution<u64> dist(0, ops.modulus() - 1);
    for (int trial = 0; trial < 2; ++trial) {
      std::vector<u64> v(ops.dim());
      for (auto& x : v) x = dist(rng);
      std::vector<std::vector<u64>> av;
      for (const auto& a : ops.ops) av.push_back(a.apply(v));
      for (std::size_t i = 0; i < ops.ops.size(); ++i)
        for (std::size_t j = i + 1; j < ops.ops.size(); ++j)
          if (ops.ops[i].apply(av[j]) != ops.ops[j].apply(av[i]))
            out.fail(ops.names[i] + " and " + ops.names[j] + " at " + pt_name(r.point));
    }
    ++spaces;
  }
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const fs::path cache_dir = fs::temp_directory_path() / ("eisrank_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(cache_dir);

  harness::SweepConfig cfg;
  cfg.primes = {5, 7, 13};
  cfg.ell_max = 200;
  cfg.weights = {2, 4, 6, 8, 10};
  cfg.resource_bound = 6000;
  cfg.jobs = std::max(1u, std::thread::hardware_concurrency());
  cfg.cache_dir = cache_dir.string();

  std::vector<std::pair<std::string, Outcome>> results;
  harness::SweepResult sweep;
  std::string sweep_error;
  try {
    sweep = harness::sweep(cfg);
  } catch (const std::exception& e) {
    sweep_error = e.what();
  }
  const double sweep_s = std::chrono::duration<double>(Clock::now() - start).count();

  std::size_t evaluated_points = 0;
  for (const auto& r : sweep.records) evaluated_points += evaluated(r);
  auto sweep_ok = [&](Outcome& o) {
    if (!sweep_error.empty()) o.fail("sweep aborted: " + sweep_error);
    if (evaluated_points == 0) o.fail("no evaluated points");
    for (const auto& r : sweep.records)
      if (r.hypotheses.all_ok && static_cast<u64>(r.point.k) * (r.point.ell + 1) <= cfg.resource_bound && !r.hecke)
        o.fail("no Hecke data at " + pt_name(r.point));
  };

  {
    Outcome o;
    sweep_ok(o);
    for (const auto& r : sweep.records)
      if (evaluated(r) && r.hecke->index_valuation != r.point.nu + r.point.vpk)
        o.fail(pt_name(r.point) + " index " + std::to_string(r.hecke->index_valuation) + " vs " +
               std::to_string(r.point.nu + r.point.vpk));
    o.detail = std::to_string(evaluated_points) + " points" + (o.detail.empty() ? "" : ": " + o.detail);
    results.emplace_back("1 index formula index_valuation = nu + v_p(k)", o);
  }
  {
    Outcome o;
    sweep_ok(o);
    for (const auto& r : sweep.records)
      if (evaluated(r) && (r.hecke->rank == 1) != !r.prediction->rank_gt_1_predicted)
        o.fail(pt_name(r.point) + " rank " + std::to_string(r.hecke->rank) + " vs predicted rank>1 " +
               (r.prediction->rank_gt_1_predicted ? "yes" : "no"));
    results.emplace_back("2 rank 1 iff the product test predicts rank 1", o);
  }
  {
    Outcome o;
    sweep_ok(o);
    for (const auto& r : sweep.records) {
      if (!evaluated(r)) continue;
      const bool principal = r.hecke->min_gens == 1;
      const bool expected = r.point.k == 2 ? true : !r.prediction->wake_pth;
      if (principal != expected)
        o.fail(pt_name(r.point) + " min_gens " + std::to_string(r.hecke->min_gens) + " vs wake p-th power " +
               (r.prediction->wake_pth ? "yes" : "no"));
    }
    results.emplace_back("3 principality: min_gens = 1 iff wake unit not a p-th power (k > 2), always at k = 2", o);
  }
  {
    Outcome o;
    const auto t0 = Clock::now();
    harness::SweepConfig one;
    one.primes = {5};
    one.ell_max = 11;
    one.weights = {2};
    try {
      const auto r = harness::run_point(invariants::ParameterPoint::make(5, 11, 2), one, nullptr);
      const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
      if (!r.hecke || r.hecke->rank != 1) o.fail("rank");
      if (!r.hecke || r.hecke->index_valuation != 1) o.fail("index");
      if (!r.hecke || r.hecke->min_gens != 1) o.fail("min_gens");
      const auto& v = r.prediction->invariant_values;
      if (v.at("merel").value() != 5 || r.prediction->merel_pth) o.fail("merel value");
      if (v.at("wake").value() % 11 != 5 || r.prediction->wake_pth) o.fail("wake value");
      if (secs > 10) o.fail("took " + std::to_string(secs) + " s");
      if (o.ok) o.detail = std::to_string(secs) + " s";
    } catch (const std::exception& e) {
      o.fail(e.what());
    }
    results.emplace_back("4 known point (5, 11, 2)", o);
  }
  {
    Outcome o;
    try {
      const auto w = hecke::weight_stabilization_check(7, 29, 4, 10);
      if (!w.equal) o.fail("ranks " + std::to_string(w.rank_k) + " vs " + std::to_string(w.rank_k2));
      else o.detail = "rank " + std::to_string(w.rank_k) + " at k = 4 and k = 10";
    } catch (const std::exception& e) {
      o.fail(e.what());
    }
    results.emplace_back("5 weight stabilization at (7, 29), k = 4 vs 10", o);
  }
  {
    Outcome o;
    std::size_t cases = 0, spaces = 0;
    try {
      snf_hnf_properties(o, cases);
      pth_power_counts(o);
      wake_invariance(o);
      const harness::Cache cache(cache_dir);
      built_spaces(o, sweep.records, cache, spaces);
      if (spaces == 0) o.fail("no built spaces");
    } catch (const std::exception& e) {
      o.fail(e.what());
    }
    if (o.ok)
      o.detail = std::to_string(cases) + " SNF/HNF cases, " + std::to_string(spaces) + " spaces checked";
    results.emplace_back("6 property suites", o);
  }
  {
    Outcome o;
    sweep_ok(o);
    std::size_t n = 0;
    for (const auto& r : sweep.records) {
      if (!r.hypotheses.all_ok || r.point.k != 2 || !r.prediction) continue;
      ++n;
      if (r.prediction->merel_pth != r.prediction->lecouturier_pth) o.fail(pt_name(r.point));
    }
    if (n == 0) o.fail("no weight 2 points");
    results.emplace_back("7 weight 2: merel flag = lecouturier flag", o);
  }

  bool all = true;
  for (const auto& [name, o] : results) {
    all &= o.ok;
    std::cout << "criterion " << name << ": " << (o.ok ? "PASS" : "FAIL");
    if (!o.detail.empty()) std::cout << " (" << o.detail << ")";
    std::cout << "\n";
  }
  std::cout << "sweep time " << sweep_s << " s\n";
  fs::remove_all(cache_dir);
  return all ? 0 : 1;
}
