#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eisrank/hecke.hpp"
#include "eisrank/invariants.hpp"

namespace eisrank::harness {

/// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string& data);

/// Write-once JSON cache. Every file is {"digest": sha256(payload), "payload": ...};
/// writes go to a temporary file that is then renamed into place.
class Cache {
 public:
  explicit Cache(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  /// Payload stored under `rel`, or nothing. A file whose digest does not
  /// match counts as a miss and logs a warning.
  std::optional<nlohmann::json> get(const std::string& rel) const;
  void put(const std::string& rel, const nlohmann::json& payload) const;
  std::size_t warnings() const { return warnings_.load(); }

 private:
  std::filesystem::path root_;
  mutable std::atomic<std::size_t> warnings_{0};
};

struct SweepConfig {
  std::vector<u64> primes;
  u64 ell_max = 0;
  std::vector<unsigned> weights;
  u64 resource_bound = 6000;
  unsigned jobs = 1;
  std::string cache_dir;    // empty: no cache
  std::string report_path;  // empty: no report files
  bool strict = false;
  bool weight_stab = false;

  /// Throws ParameterError on an invalid configuration.
  void validate() const;
};

enum class Status { Pass, Fail, NotApplicable };
const char* status_name(Status s);

struct CheckResult {
  Status status = Status::NotApplicable;
  std::string detail;  // reason when not applicable, both sides when failed
};

struct VerificationRecord {
  invariants::ParameterPoint point;
  invariants::HypothesisReport hypotheses;
  std::optional<invariants::Prediction> prediction;
  std::optional<hecke::EisensteinLocalReport> hecke;
  std::string skip_reason;
  std::map<std::string, CheckResult> checks;
  std::map<std::string, double> timings;  // seconds per stage

  bool failed() const;
  nlohmann::json to_json() const;
};

/// Fixed report columns.
const std::vector<std::string>& csv_columns();
std::string csv_row(const VerificationRecord& r);

/// Cache-aware Hecke operators on the cuspidal-plus symbols mod p^N.
hecke::LocalOperators load_operators(u64 p, u64 ell, unsigned k, u64 resource_bound, const Cache* cache);

/// Cache-aware report for one point (no hypothesis gate).
hecke::EisensteinLocalReport local_report(u64 p, u64 ell, unsigned k, u64 resource_bound, const Cache* cache);

VerificationRecord run_point(const invariants::ParameterPoint& pt, const SweepConfig& cfg, const Cache* cache);

struct SweepResult {
  std::vector<VerificationRecord> records;
  bool stopped_early = false;  // strict mode hit a failure

  bool any_failure() const;
  /// Counts of pass / fail / not applicable for each check, and skipped points.
  nlohmann::json summary() const;
};

/// Points (p, ell, k) with ell prime, ell = 1 mod p, ell <= ell_max, in order.
std::vector<invariants::ParameterPoint> enumerate_points(const SweepConfig& cfg);

SweepResult sweep(const SweepConfig& cfg);

/// Writes <stem>.csv and <stem>.json; a path ending in .csv or .json is used
/// as given for that format and its stem for the other.
void write_reports(const SweepResult& result, const std::string& path);

std::string render_csv(const SweepResult& result);

}  // namespace eisrank::harness
