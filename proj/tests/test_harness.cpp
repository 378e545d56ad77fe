#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "eisrank/harness.hpp"

using namespace eisrank;
using namespace eisrank::harness;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  static std::mt19937_64 rng(std::random_device{}());
  fs::path d = fs::temp_directory_path() / ("eisrank_test_" + name + "_" + std::to_string(rng()));
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepConfig config(std::vector<u64> ps, u64 ell_max, std::vector<unsigned> ks) {
  SweepConfig c;
  c.primes = std::move(ps);
  c.ell_max = ell_max;
  c.weights = std::move(ks);
  return c;
}

}  // namespace

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("cache round trip, tampering and concurrent writers") {
  const auto dir = fresh_dir("cache");
  Cache cache(dir);
  const nlohmann::json payload = {{"a", "123456789012345678901234567890"}, {"b", {1, 2, 3}}};
  CHECK_FALSE(cache.get("x/y.json"));
  cache.put("x/y.json", payload);
  REQUIRE(cache.get("x/y.json"));
  CHECK(*cache.get("x/y.json") == payload);

  std::vector<std::thread> ts;
  for (int i = 0; i < 4; ++i) ts.emplace_back([&] { cache.put("x/z.json", payload); });
  for (auto& t : ts) t.join();
  CHECK(*cache.get("x/z.json") == payload);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir / "x")) {
    (void)e;
    ++files;
  }
  CHECK(files == 2);  // no temporaries left behind

  std::string body = slurp(dir / "x/y.json");
  const auto pos = body.find("123");
  REQUIRE(pos != std::string::npos);
  body[pos] = '9';
  std::ofstream(dir / "x/y.json", std::ios::binary | std::ios::trunc) << body;
  const auto before = cache.warnings();
  CHECK_FALSE(cache.get("x/y.json"));
  CHECK(cache.warnings() == before + 1);
  std::ofstream(dir / "x/y.json", std::ios::binary | std::ios::trunc) << "not json";
  CHECK_FALSE(cache.get("x/y.json"));
  fs::remove_all(dir);
}

TEST_CASE("sweep configuration and enumeration") {
  auto c = config({5}, 100, {2});
  c.validate();
  const auto pts = enumerate_points(c);
  std::vector<u64> ells;
  for (const auto& p : pts) ells.push_back(p.ell);
  CHECK(ells == std::vector<u64>{11, 31, 41, 61, 71});

  CHECK_THROWS_AS(config({5}, 100, {}).validate(), ParameterError);
  CHECK_THROWS_AS(config({3}, 100, {2}).validate(), ParameterError);
  CHECK_THROWS_AS(config({5}, 100, {3}).validate(), ParameterError);
  CHECK_THROWS_AS(config({5}, 10, {2}).validate(), ParameterError);
  CHECK_THROWS_AS(config({}, 100, {2}).validate(), ParameterError);
  auto z = config({5}, 100, {2});
  z.jobs = 0;
  CHECK_THROWS_AS(z.validate(), ParameterError);
  // l in {11, 31, 41} for p = 5 and {29, 43} for p = 7, two weights each
  CHECK(enumerate_points(config({7, 5}, 50, {4, 2})).size() == 10);
}

TEST_CASE("run_point on known points") {
  const auto cfg = config({5}, 100, {2});
  const auto r = run_point(invariants::ParameterPoint::make(5, 11, 2), cfg, nullptr);
  REQUIRE(r.hecke);
  CHECK(r.skip_reason.empty());
  CHECK(r.hecke->rank == 1);
  CHECK(r.hecke->index_valuation == 1);
  CHECK(r.hecke->min_gens == 1);
  CHECK(r.checks.at("thmA_match").status == Status::Pass);
  CHECK(r.checks.at("index_match").status == Status::Pass);
  CHECK(r.checks.at("principality_match").status == Status::Pass);
  CHECK(r.checks.at("k2_corollary_consistency").status == Status::Pass);
  CHECK(csv_row(r) == "5,11,2,1,0,1,5,0,5,0,5,0,0,1,1,1,1,1,pass,pass,pass,pass,");

  const auto s = run_point(invariants::ParameterPoint::make(5, 11, 4), cfg, nullptr);
  CHECK_FALSE(s.hecke);
  CHECK(s.skip_reason == "hypothesis: p-1 divides k");
  CHECK_FALSE(s.failed());
  for (const auto& [name, c] : s.checks) CHECK(c.status == Status::NotApplicable);

  const auto t = run_point(invariants::ParameterPoint::make(7, 29, 2), cfg, nullptr);
  REQUIRE(t.hecke);
  for (const char* name : {"thmA_match", "index_match", "principality_match", "k2_corollary_consistency"})
    CHECK(t.checks.at(name).status == Status::Pass);

  auto small = config({5}, 100, {2});
  small.resource_bound = 100;
  const auto u = run_point(invariants::ParameterPoint::make(5, 101, 2), small, nullptr);
  CHECK(u.skip_reason == "resource");
  CHECK(u.prediction);
  CHECK(u.checks.at("thmA_match").status == Status::NotApplicable);

  auto ws = config({7}, 100, {4});
  ws.weight_stab = true;
  const auto w = run_point(invariants::ParameterPoint::make(7, 29, 4), ws, nullptr);
  CHECK(w.checks.at("weight_stabilization").status == Status::Pass);
}

TEST_CASE("warm cache performs no symbol builds and reports are deterministic") {
  const auto dir = fresh_dir("sweep");
  auto cfg = config({5, 7}, 80, {2, 4, 6});
  cfg.cache_dir = (dir / "cache").string();
  cfg.report_path = (dir / "report").string();
  const auto first = sweep(cfg);
  CHECK(first.records.size() == enumerate_points(cfg).size());
  CHECK_FALSE(first.any_failure());
  const std::string csv1 = slurp(dir / "report.csv");
  CHECK(csv1 == render_csv(first));
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "cache/modsym/29_4/space.json"));
  CHECK(fs::exists(dir / "cache/modsym/29_4/T_2.json"));
  CHECK(fs::exists(dir / "cache/modsym/29_4/w.json"));
  CHECK(fs::exists(dir / "cache/hecke/7_29_4/report.json"));
  CHECK(fs::exists(dir / "cache/hecke/7_29_4/algebra.json"));

  const auto builds = modsym::build_count();
  const auto second = sweep(cfg);
  CHECK(modsym::build_count() == builds);
  CHECK(render_csv(second) == csv1);

  // no cache, two workers: same body
  auto par = cfg;
  par.cache_dir.clear();
  par.report_path.clear();
  par.jobs = 2;
  CHECK(render_csv(sweep(par)) == csv1);

  // a tampered report is recomputed from the cached operators
  {
    std::string body = slurp(dir / "cache/hecke/7_29_4/report.json");
    body.insert(body.find("\"rank\":") + 7, "1");
    std::ofstream(dir / "cache/hecke/7_29_4/report.json", std::ios::binary | std::ios::trunc) << body;
  }
  const auto before = modsym::build_count();
  const auto third = sweep(cfg);
  CHECK(render_csv(third) == csv1);
  CHECK(modsym::build_count() == before);
  fs::remove_all(dir);
}

TEST_CASE("failed checks reach the summary") {
  SweepResult res;
  VerificationRecord r;
  r.point = invariants::ParameterPoint::make(5, 11, 2);
  r.checks["thmA_match"] = {Status::Fail, "rank 2 vs rank_gt_1_predicted 0"};
  res.records.push_back(r);
  CHECK(res.any_failure());
  CHECK(res.summary()["checks"]["thmA_match"]["fail"] == 1);
}
