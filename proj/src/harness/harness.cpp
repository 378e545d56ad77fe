#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "eisrank/harness.hpp"

namespace eisrank::harness {

using invariants::ParameterPoint;
using modsym::Subspace;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string level_key(u64 ell, unsigned k) { return std::to_string(ell) + "_" + std::to_string(k); }

std::string modulus_tag(u64 p, unsigned n) { return std::to_string(p) + "^" + std::to_string(n); }

// Operator files are shared between primes dividing ell - 1, one entry per
// modulus; updates are read-modify-write under this lock.
std::mutex g_modsym_mu;

void merge_put(const Cache& cache, const std::string& rel, const std::string& tag, const nlohmann::json& value) {
  std::lock_guard<std::mutex> lock(g_modsym_mu);
  nlohmann::json j = cache.get(rel).value_or(nlohmann::json::object());
  j[tag] = value;
  cache.put(rel, j);
}

std::optional<hecke::LocalOperators> cached_operators(u64 p, u64 ell, unsigned k, const Cache& cache) {
  const unsigned n = hecke::default_precision(p);
  const std::string dir = "modsym/" + level_key(ell, k) + "/";
  const std::string tag = modulus_tag(p, n);
  const auto space = cache.get(dir + "space.json");
  if (!space || !space->contains(tag)) return std::nullopt;
  hecke::LocalOperators ops;
  ops.ell = ell;
  ops.k = k;
  ops.p = p;
  ops.precision = n;
  const auto gens = hecke::GeneratorSet::for_level(ell, k);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const auto f = cache.get(dir + (gens.primes[i] ? "T_" + std::to_string(gens.primes[i]) : "w") + ".json");
    if (!f || !f->contains(tag)) return std::nullopt;
    ops.names.push_back(gens.names[i]);
    ops.ops.push_back(modmatrix_from_json(f->at(tag)));
    ops.eigenvalues.push_back(arith::reduce(gens.eisenstein_eigenvalue(i), ops.modulus()));
    if (ops.ops.back().modulus() != ops.modulus() || ops.ops.back().rows() != ops.ops.front().rows())
      return std::nullopt;
  }
  return ops;
}

std::string hypothesis_reason(const invariants::HypothesisReport& h) {
  std::vector<std::string> bad;
  if (!h.p_gt_3) bad.push_back("p <= 3");
  if (!h.p_divides_ell_minus_1) bad.push_back("p does not divide l-1");
  if (!h.k_even) bad.push_back("k odd");
  if (!h.p_minus_1_ndiv_k) bad.push_back("p-1 divides k");
  if (!h.p_regular) bad.push_back("p irregular");
  std::string s = "hypothesis:";
  for (std::size_t i = 0; i < bad.size(); ++i) s += (i ? "; " : " ") + bad[i];
  return s;
}

CheckResult check(bool ok, const std::string& detail) {
  return {ok ? Status::Pass : Status::Fail, ok ? std::string() : detail};
}

CheckResult not_applicable(const std::string& why) { return {Status::NotApplicable, why}; }

std::string flag(bool b) { return b ? "1" : "0"; }

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"thmA_match", "index_match", "principality_match",
                                              "k2_corollary_consistency", "weight_stabilization"};
  return names;
}

}  // namespace

hecke::LocalOperators load_operators(u64 p, u64 ell, unsigned k, u64 resource_bound, const Cache* cache) {
  if (cache)
    if (auto ops = cached_operators(p, ell, k, *cache)) return *ops;
  const unsigned n = hecke::default_precision(p);
  const auto space = modsym::LocalSymbolSpace::build(ell, k, p, n, resource_bound);
  auto ops = hecke::local_operators(*space);
  if (cache) {
    const std::string dir = "modsym/" + level_key(ell, k) + "/";
    const std::string tag = modulus_tag(p, n);
    for (std::size_t i = 0; i < ops.names.size(); ++i) {
      const std::string file = ops.names[i] == "w" ? "w" : "T_" + ops.names[i].substr(1);
      merge_put(*cache, dir + file + ".json", tag, to_json(ops.ops[i]));
    }
    // space.json last: its entry marks the operator files as complete
    merge_put(*cache, dir + "space.json", tag,
              {{"ell", ell},
               {"k", k},
               {"p", p},
               {"precision", n},
               {"modulus", std::to_string(space->modulus())},
               {"dim_full", space->dim(Subspace::Full)},
               {"dim_cuspidal", space->dim(Subspace::Cuspidal)},
               {"dim_plus", space->dim(Subspace::CuspidalPlus)},
               {"generators", ops.names}});
  }
  return ops;
}

hecke::EisensteinLocalReport local_report(u64 p, u64 ell, unsigned k, u64 resource_bound, const Cache* cache) {
  const std::string dir = "hecke/" + std::to_string(p) + "_" + level_key(ell, k) + "/";
  if (cache)
    if (auto j = cache->get(dir + "report.json")) {
      try {
        return hecke::EisensteinLocalReport::from_json(*j);
      } catch (const nlohmann::json::exception&) {
      }
    }
  const auto ops = load_operators(p, ell, k, resource_bound, cache);
  hecke::RegularAlgebra alg;
  const auto rep = hecke::eisenstein_local_report(ops, &alg);
  if (cache) {
    cache->put(dir + "algebra.json", rep.nonzero_localization ? alg.to_json() : nlohmann::json::object());
    cache->put(dir + "report.json", rep.to_json());
  }
  return rep;
}

// ---- records ----

const char* status_name(Status s) {
  switch (s) {
    case Status::Pass:
      return "pass";
    case Status::Fail:
      return "fail";
    case Status::NotApplicable:
      return "na";
  }
  return "?";
}

bool VerificationRecord::failed() const {
  return std::any_of(checks.begin(), checks.end(), [](const auto& c) { return c.second.status == Status::Fail; });
}

nlohmann::json VerificationRecord::to_json() const {
  nlohmann::json j;
  j["point"] = {{"p", point.p}, {"ell", point.ell}, {"k", point.k}, {"nu", point.nu}, {"vpk", point.vpk}};
  j["hypotheses"] = {{"p_gt_3", hypotheses.p_gt_3},
                     {"p_divides_ell_minus_1", hypotheses.p_divides_ell_minus_1},
                     {"k_even", hypotheses.k_even},
                     {"p_minus_1_ndiv_k", hypotheses.p_minus_1_ndiv_k},
                     {"p_regular", hypotheses.p_regular},
                     {"all_ok", hypotheses.all_ok}};
  if (prediction) {
    nlohmann::json inv;
    for (const auto& [name, v] : prediction->invariant_values) inv[name] = std::to_string(v.value());
    j["invariants"] = {{"values", inv},
                       {"merel_pth", prediction->merel_pth},
                       {"wake_pth", prediction->wake_pth},
                       {"lecouturier_pth", prediction->lecouturier_pth},
                       {"c0_cup_b0_nonzero", prediction->c0_cup_b0_nonzero},
                       {"c0_cup_a0_nonzero", prediction->c0_cup_a0_nonzero},
                       {"rank_gt_1_predicted", prediction->rank_gt_1_predicted},
                       {"eis_principal_predicted", prediction->eis_principal_predicted}};
  }
  if (hecke)
    j["hecke"] = hecke->to_json();
  else
    j["hecke"] = {{"skip_reason", skip_reason}};
  j["skip_reason"] = skip_reason;
  nlohmann::json c = nlohmann::json::object();
  for (const auto& [name, r] : checks) c[name] = {{"status", status_name(r.status)}, {"detail", r.detail}};
  j["checks"] = c;
  j["timings"] = timings;
  return j;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "p",        "ell",        "k",        "nu",           "vpk",           "hyp_ok",        "merel_val",
      "merel_pth", "wake_val",  "wake_pth", "lec_val",      "lec_pth",       "pred_rank_gt1", "pred_principal",
      "rank",     "index_val",  "min_gens", "tangent_dim",  "thmA_match",    "index_match",   "principality_match",
      "k2_consistency", "skip_reason"};
  return cols;
}

std::string csv_row(const VerificationRecord& r) {
  std::vector<std::string> f{std::to_string(r.point.p),  std::to_string(r.point.ell), std::to_string(r.point.k),
                             std::to_string(r.point.nu), std::to_string(r.point.vpk), flag(r.hypotheses.all_ok)};
  if (r.prediction) {
    const auto& pr = *r.prediction;
    f.push_back(std::to_string(pr.invariant_values.at("merel").value()));
    f.push_back(flag(pr.merel_pth));
    f.push_back(std::to_string(pr.invariant_values.at("wake").value()));
    f.push_back(flag(pr.wake_pth));
    f.push_back(std::to_string(pr.invariant_values.at("lecouturier").value()));
    f.push_back(flag(pr.lecouturier_pth));
    f.push_back(flag(pr.rank_gt_1_predicted));
    f.push_back(flag(pr.eis_principal_predicted));
  } else {
    f.insert(f.end(), 8, "");
  }
  if (r.hecke) {
    f.push_back(std::to_string(r.hecke->rank));
    f.push_back(std::to_string(r.hecke->index_valuation));
    f.push_back(std::to_string(r.hecke->min_gens));
    f.push_back(std::to_string(r.hecke->tangent_dim_T));
  } else {
    f.insert(f.end(), 4, "");
  }
  for (const char* name : {"thmA_match", "index_match", "principality_match", "k2_corollary_consistency"}) {
    auto it = r.checks.find(name);
    f.push_back(it == r.checks.end() ? "" : status_name(it->second.status));
  }
  std::string reason = r.skip_reason;
  if (reason.find_first_of(",\"") != std::string::npos) {
    std::string q = "\"";
    for (char ch : reason) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    reason = q + "\"";
  }
  f.push_back(reason);
  std::string line;
  for (std::size_t i = 0; i < f.size(); ++i) line += (i ? "," : "") + f[i];
  return line;
}

// ---- one point ----

VerificationRecord run_point(const ParameterPoint& pt, const SweepConfig& cfg, const Cache* cache) {
  VerificationRecord rec;
  rec.point = pt;
  rec.hypotheses = invariants::check_setup(pt);
  for (const auto& name : check_names()) rec.checks[name] = not_applicable("point skipped");
  if (!rec.hypotheses.all_ok) {
    rec.skip_reason = hypothesis_reason(rec.hypotheses);
    for (auto& [name, c] : rec.checks) c.detail = rec.skip_reason;
    return rec;
  }

  auto t0 = Clock::now();
  rec.prediction = invariants::predict(pt);
  rec.timings["invariants"] = since(t0);
  const auto& pr = *rec.prediction;
  if (pt.k == 2)
    rec.checks["k2_corollary_consistency"] =
        check(pr.merel_pth == pr.lecouturier_pth, "merel_pth " + flag(pr.merel_pth) + " vs lecouturier_pth " +
                                                      flag(pr.lecouturier_pth));
  else
    rec.checks["k2_corollary_consistency"] = not_applicable("k > 2");

  if (static_cast<u64>(pt.k) * (pt.ell + 1) > cfg.resource_bound) {
    rec.skip_reason = "resource";
    for (const char* name : {"thmA_match", "index_match", "principality_match", "weight_stabilization"})
      rec.checks[name] = not_applicable("resource");
    return rec;
  }

  t0 = Clock::now();
  rec.hecke = local_report(pt.p, pt.ell, pt.k, cfg.resource_bound, cache);
  rec.timings["hecke"] = since(t0);
  const auto& h = *rec.hecke;

  rec.checks["thmA_match"] =
      check((h.rank == 1) == !pr.rank_gt_1_predicted,
            "rank " + std::to_string(h.rank) + " vs rank_gt_1_predicted " + flag(pr.rank_gt_1_predicted));
  const unsigned expected = pt.nu + pt.vpk;
  rec.checks["index_match"] = check(h.index_valuation == expected, "index " + std::to_string(h.index_valuation) +
                                                                       " vs nu + v_p(k) = " + std::to_string(expected));
  rec.checks["principality_match"] =
      check((h.min_gens == 1) == pr.eis_principal_predicted, "min_gens " + std::to_string(h.min_gens) +
                                                                 " vs eis_principal_predicted " +
                                                                 flag(pr.eis_principal_predicted));

  if (!cfg.weight_stab) {
    rec.checks["weight_stabilization"] = not_applicable("not requested");
  } else if (pt.k == 2) {
    rec.checks["weight_stabilization"] = not_applicable("k = 2");
  } else {
    const unsigned k2 = pt.k + static_cast<unsigned>(pt.p - 1);
    if (static_cast<u64>(k2) * (pt.ell + 1) > cfg.resource_bound) {
      rec.checks["weight_stabilization"] = not_applicable("resource at k' = " + std::to_string(k2));
    } else {
      t0 = Clock::now();
      const auto r2 = hecke::eisenstein_rank(load_operators(pt.p, pt.ell, k2, cfg.resource_bound, cache));
      rec.timings["weight_stabilization"] = since(t0);
      rec.checks["weight_stabilization"] =
          check(r2 == h.rank, "rank " + std::to_string(h.rank) + " at k vs " + std::to_string(r2) + " at k' = " +
                                  std::to_string(k2));
    }
  }
  return rec;
}

// ---- sweeps ----

void SweepConfig::validate() const {
  if (primes.empty()) throw ParameterError("no primes p given");
  if (weights.empty()) throw ParameterError("empty weight list");
  if (jobs == 0) throw ParameterError("jobs must be positive");
  for (u64 p : primes) {
    if (p <= 3 || !arith::is_prime(p)) throw ParameterError("p must be a prime greater than 3, got " + std::to_string(p));
    u64 ell = p + 1;
    while (!arith::is_prime(ell)) ell += p;
    if (ell_max < ell)
      throw ParameterError("ell-max " + std::to_string(ell_max) + " is below the smallest l = 1 mod " +
                           std::to_string(p) + " (" + std::to_string(ell) + ")");
  }
  for (unsigned k : weights)
    if (k < 2 || k % 2 != 0) throw ParameterError("weights must be even and at least 2, got " + std::to_string(k));
}

std::vector<ParameterPoint> enumerate_points(const SweepConfig& cfg) {
  std::vector<u64> ps(cfg.primes);
  std::sort(ps.begin(), ps.end());
  ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  std::vector<unsigned> ks(cfg.weights);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  std::vector<ParameterPoint> out;
  for (u64 p : ps)
    for (u64 ell = p + 1; ell <= cfg.ell_max; ell += p)
      if (arith::is_prime(ell))
        for (unsigned k : ks) out.push_back(ParameterPoint::make(p, ell, k));
  return out;
}

bool SweepResult::any_failure() const {
  return std::any_of(records.begin(), records.end(), [](const auto& r) { return r.failed(); });
}

nlohmann::json SweepResult::summary() const {
  nlohmann::json s;
  std::size_t skipped = 0;
  for (const auto& name : check_names()) s["checks"][name] = {{"pass", 0}, {"fail", 0}, {"na", 0}};
  for (const auto& r : records) {
    if (!r.skip_reason.empty()) ++skipped;
    for (const auto& [name, c] : r.checks) {
      auto& slot = s["checks"][name][status_name(c.status)];
      slot = slot.get<std::size_t>() + 1;
    }
  }
  s["points"] = records.size();
  s["skipped"] = skipped;
  s["stopped_early"] = stopped_early;
  return s;
}

SweepResult sweep(const SweepConfig& cfg) {
  cfg.validate();
  const auto points = enumerate_points(cfg);
  std::optional<Cache> cache;
  if (!cfg.cache_dir.empty()) cache.emplace(cfg.cache_dir);
  const Cache* cp = cache ? &*cache : nullptr;

  std::vector<std::optional<VerificationRecord>> slots(points.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex err_mu;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next++;
      if (i >= points.size()) return;
      try {
        slots[i] = run_point(points[i], cfg, cp);
        if (cfg.strict && slots[i]->failed()) stop = true;
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  const unsigned n = std::min<std::size_t>(cfg.jobs, std::max<std::size_t>(points.size(), 1));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  SweepResult res;
  for (auto& s : slots)
    if (s)
      res.records.push_back(std::move(*s));
    else
      res.stopped_early = true;
  if (!cfg.report_path.empty()) write_reports(res, cfg.report_path);
  return res;
}

std::string render_csv(const SweepResult& result) {
  std::string out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  out += "\n";
  for (const auto& r : result.records) out += csv_row(r) + "\n";
  return out;
}

void write_reports(const SweepResult& result, const std::string& path) {
  std::filesystem::path base(path);
  const auto ext = base.extension().string();
  std::filesystem::path csv = base, json = base;
  if (ext == ".csv" || ext == ".json") {
    csv.replace_extension(".csv");
    json.replace_extension(".json");
  } else {
    csv += ".csv";
    json += ".json";
  }
  if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
  auto write = [](const std::filesystem::path& f, const std::string& body) {
    std::ofstream out(f, std::ios::binary | std::ios::trunc);
    if (!out || !(out << body) || !out.flush()) throw Error("cannot write report " + f.string());
  };
  write(csv, render_csv(result));
  nlohmann::json j;
  j["summary"] = result.summary();
  j["records"] = nlohmann::json::array();
  for (const auto& r : result.records) j["records"].push_back(r.to_json());
  write(json, j.dump(2) + "\n");
}

}  // namespace eisrank::harness
