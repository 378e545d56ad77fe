// Command-line front end: invariants, modsym, rank and verify.
#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "eisrank/harness.hpp"

using namespace eisrank;

namespace {

constexpr int kOk = 0, kStrictFailure = 1, kUsage = 2, kInternal = 3;

std::string default_cache() {
  const char* env = std::getenv("EISRANK_CACHE_DIR");
  return env ? env : "";
}

void print_matrix(std::ostream& out, const ZMatrix& m, const mpz_class& den) {
  if (den != 1) out << "denominator " << den.get_str() << "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? " " : "") << m(i, j).get_str();
    out << "\n";
  }
}

int cmd_invariants(u64 p, u64 ell, unsigned k, bool json) {
  const auto pt = invariants::ParameterPoint::make(p, ell, k);
  const auto h = invariants::check_setup(pt);
  const auto merel = invariants::merel_invariant(pt);
  const auto wake = invariants::wake_unit(pt);
  const auto lec = invariants::lecouturier_invariant(pt);
  std::optional<invariants::Prediction> pr;
  if (h.all_ok) pr = invariants::predict(pt);
  if (json) {
    nlohmann::json j = {{"p", p},
                        {"ell", ell},
                        {"k", k},
                        {"nu", pt.nu},
                        {"vpk", pt.vpk},
                        {"hypotheses_ok", h.all_ok},
                        {"merel", {{"value", std::to_string(merel.value.value())}, {"pth_power", merel.is_pth_power}}},
                        {"wake", {{"value", std::to_string(wake.value.value())}, {"pth_power", wake.is_pth_power}}},
                        {"lecouturier", {{"value", std::to_string(lec.value.value())}, {"pth_power", lec.is_pth_power}}}};
    if (pr)
      j["prediction"] = {{"rank_gt_1", pr->rank_gt_1_predicted}, {"eis_principal", pr->eis_principal_predicted}};
    std::cout << j.dump(2) << "\n";
    return kOk;
  }
  std::cout << "point        p=" << p << " l=" << ell << " k=" << k << " nu=" << pt.nu << " v_p(k)=" << pt.vpk << "\n"
            << "hypotheses   " << (h.all_ok ? "ok" : "fail") << "\n"
            << "merel        " << merel.value.value() << (merel.is_pth_power ? "  p-th power" : "  not a p-th power") << "\n"
            << "wake         " << wake.value.value() << (wake.is_pth_power ? "  p-th power" : "  not a p-th power") << "\n"
            << "lecouturier  " << lec.value.value() << (lec.is_pth_power ? "  p-th power" : "  not a p-th power") << "\n";
  if (pr)
    std::cout << "prediction   rank " << (pr->rank_gt_1_predicted ? "> 1" : "= 1") << ", Eisenstein ideal "
              << (pr->eis_principal_predicted ? "principal" : "not principal") << "\n";
  return kOk;
}

int cmd_modsym(u64 ell, unsigned k, const std::string& op, const std::string& subspace, const std::string& dump,
               u64 bound) {
  const auto s = modsym::parse_subspace(subspace);
  const auto space = modsym::ManinSymbolSpace::build(ell, k, bound);
  if (op == "dims") {
    nlohmann::json j = {{"ell", ell},
                        {"k", k},
                        {"full", space->dim(modsym::Subspace::Full)},
                        {"cuspidal", space->dim(modsym::Subspace::Cuspidal)},
                        {"cuspidal_plus", space->dim(modsym::Subspace::CuspidalPlus)}};
    if (!dump.empty()) {
      std::ofstream(dump) << j.dump(2) << "\n";
    }
    std::cout << "full " << j["full"] << "\ncuspidal " << j["cuspidal"] << "\ncuspidal_plus " << j["cuspidal_plus"]
              << "\n";
    return kOk;
  }
  modsym::OperatorMatrix m;
  if (op == "w") {
    m = space->atkin_lehner(s);
  } else if (op == "star") {
    m = space->star_involution(s);
  } else if (op.size() > 1 && op[0] == 'T') {
    u64 q = 0;
    try {
      q = std::stoull(op.substr(1));
    } catch (const std::exception&) {
      throw ParameterError("unknown operator " + op);
    }
    if (!arith::is_prime(q) || q == ell) throw ParameterError("T_q needs a prime q != l");
    m = space->hecke_operator(q, s);
  } else {
    throw ParameterError("unknown operator " + op + " (expected T<q>, w, star or dims)");
  }
  if (!dump.empty()) {
    const nlohmann::json j = m.integral() ? to_json(m.matrix) : to_json(m.rational());
    std::ofstream out(dump);
    if (!(out << j.dump() << "\n")) throw Error("cannot write " + dump);
  }
  print_matrix(std::cout, m.matrix, m.denominator);
  return kOk;
}

int cmd_rank(u64 p, u64 ell, unsigned k, bool json, const std::string& cache_dir, u64 bound) {
  if (p < 5 || !arith::is_prime(p)) throw ParameterError("p must be a prime >= 5");
  if (!arith::is_prime(ell) || ell == p) throw ParameterError("l must be a prime different from p");
  if (k < 2 || k % 2) throw ParameterError("k must be even and at least 2");
  std::optional<harness::Cache> cache;
  if (!cache_dir.empty()) cache.emplace(cache_dir);
  const auto rep = harness::local_report(p, ell, k, bound, cache ? &*cache : nullptr);
  if (json) {
    std::cout << rep.to_json().dump(2) << "\n";
    return kOk;
  }
  std::cout << "rank                 " << rep.rank << "\n"
            << "nonzero_localization " << (rep.nonzero_localization ? "yes" : "no") << "\n";
  if (rep.nonzero_localization)
    std::cout << "index_valuation      " << rep.index_valuation << "\n"
              << "min_gens             " << rep.min_gens << "\n"
              << "tangent_dim_T        " << rep.tangent_dim_T << "\n";
  std::cout << "plus_dim             " << rep.plus_dim << "\n"
            << "precision            " << rep.precision << "\n";
  return kOk;
}

int cmd_verify(harness::SweepConfig cfg) {
  if (cfg.cache_dir.empty()) cfg.cache_dir = default_cache();
  const auto res = harness::sweep(cfg);
  const auto s = res.summary();
  std::cout << "points " << s["points"] << ", skipped " << s["skipped"] << "\n";
  for (const auto& [name, c] : s["checks"].items())
    std::cout << name << ": pass " << c["pass"] << ", fail " << c["fail"] << ", na " << c["na"] << "\n";
  for (const auto& r : res.records)
    for (const auto& [name, c] : r.checks)
      if (c.status == harness::Status::Fail)
        std::cout << "FAIL " << name << " at (" << r.point.p << ", " << r.point.ell << ", " << r.point.k
                  << "): " << c.detail << "\n";
  if (res.stopped_early) std::cout << "stopped at the first failure (strict)\n";
  return cfg.strict && res.any_failure() ? kStrictFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eisenstein rank computations for Hecke algebras of prime level"};
  app.require_subcommand(1);

  u64 p = 0, ell = 0, bound = 6000;
  unsigned k = 0;
  bool json = false;

  auto* inv = app.add_subcommand("invariants", "invariant values, p-th power flags and predictions");
  inv->add_option("--p", p, "prime p > 3")->required();
  inv->add_option("--ell", ell, "prime l = 1 mod p")->required();
  inv->add_option("--k", k, "even weight")->required();
  inv->add_flag("--json", json, "JSON output");

  std::string op, dump, subspace = "plus";
  auto* ms = app.add_subcommand("modsym", "build exact modular symbols and print an operator");
  ms->add_option("--ell", ell, "prime level")->required();
  ms->add_option("--k", k, "even weight")->required();
  ms->add_option("--op", op, "T<q>, w, star or dims")->required();
  ms->add_option("--subspace", subspace, "full, cuspidal or plus")->capture_default_str();
  ms->add_option("--dump", dump, "write the matrix as JSON");
  ms->add_option("--resource-bound", bound, "cap on k(l+1)")->capture_default_str();

  std::string cache_dir = default_cache();
  auto* rk = app.add_subcommand("rank", "p-local Hecke report for one point");
  rk->add_option("--p", p, "prime p >= 5")->required();
  rk->add_option("--ell", ell, "prime level")->required();
  rk->add_option("--k", k, "even weight")->required();
  rk->add_flag("--json", json, "JSON output");
  rk->add_option("--cache", cache_dir, "cache directory (default $EISRANK_CACHE_DIR)");
  rk->add_option("--resource-bound", bound, "cap on k(l+1)")->capture_default_str();

  harness::SweepConfig cfg;
  std::vector<std::string> weights;
  auto* vf = app.add_subcommand("verify", "sweep points and check the predicted equivalences");
  vf->add_option("--p", cfg.primes, "primes p, comma separated")->required()->delimiter(',');
  vf->add_option("--ell-max", cfg.ell_max, "largest level")->required();
  vf->add_option("--k", weights, "weights, comma separated")->required()->delimiter(',');
  vf->add_option("--jobs", cfg.jobs, "worker threads")->capture_default_str();
  vf->add_option("--cache", cfg.cache_dir, "cache directory (default $EISRANK_CACHE_DIR)");
  vf->add_option("--report", cfg.report_path, "report path; writes .csv and .json");
  vf->add_flag("--strict", cfg.strict, "exit 1 and stop at the first failed check");
  vf->add_option("--resource-bound", cfg.resource_bound, "cap on k(l+1)")->capture_default_str();
  vf->add_flag("--weight-stab", cfg.weight_stab, "also compare ranks at k and k + p - 1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*inv) return cmd_invariants(p, ell, k, json);
    if (*ms) return cmd_modsym(ell, k, op, subspace, dump, bound);
    if (*rk) return cmd_rank(p, ell, k, json, cache_dir, bound);
    if (*vf) {
      for (const auto& w : weights) {
        if (w.empty()) continue;
        std::size_t used = 0;
        const unsigned long v = std::stoul(w, &used);
        if (used != w.size()) throw ParameterError("bad weight '" + w + "'");
        cfg.weights.push_back(static_cast<unsigned>(v));
      }
      return cmd_verify(cfg);
    }
  } catch (const std::invalid_argument&) {
    std::cerr << "error: weights must be integers\n";
    return kUsage;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ResourceBoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const HypothesesNotSatisfied& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
