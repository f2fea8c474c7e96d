#pragma once

// Seeded experiment driver: configuration, end-to-end runs with exact
// certification, comparison against the uniform baseline, and output files.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "relapprox/catalog.hpp"
#include "relapprox/construction.hpp"
#include "relapprox/generators.hpp"
#include "relapprox/plan.hpp"
#include "relapprox/verifier.hpp"

namespace relapprox {

inline constexpr int kReportSchemaVersion = 1;

struct ExperimentConfig {
  GeneratorKind generator = GeneratorKind::uniform_square;
  std::size_t n = 0;
  RangeFamily family;
  ApproxParams params;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> points_file;  // replaces the generator; same points for every seed
  bool force_large_n = false;
  std::size_t max_listed_violations = kDefaultMaxListed;
  std::string out_dir;

  // Rationals may be given as JSON numbers or strings ("1/16", "0.0625").
  // Seeds are a list or {"from": s, "count": k}.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

ExperimentConfig read_config_file(const std::string& path);

struct CheckResult {
  std::string name;
  bool must_pass = true;
  bool applicable = true;
  bool pass = false;
  std::string detail;
};

struct ComparisonRow {
  std::uint64_t seed = 0;
  std::string mode;
  std::size_t n = 0;
  std::size_t baseline_size = 0;
  bool baseline_pass = false;
  std::size_t support = 0;
  bool construct_pass = false;
  std::uint64_t resample_count = 0;
  std::size_t initial_retries = 0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  double median_baseline_size = 0;
  double median_support = 0;
  double median_resamples = 0;
  std::size_t baseline_passes = 0;
  std::size_t construct_passes = 0;

  void aggregate();
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

double median(std::vector<double> values);

struct SeedResult {
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error_stage;
  std::string error;
  nlohmann::json construction;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, Violation>> violations;
  ComparisonRow comparison;
};

struct Report {
  ExperimentConfig config;
  std::vector<SeedResult> seeds;
  ComparisonTable comparison;
  bool must_pass_ok = true;
  nlohmann::json timing;  // wall clock; excluded from the hash

  // Deterministic part of the report (no timing).
  nlohmann::json body() const;
  // FNV-1a-64 of body().dump(), as 16 hex digits.
  std::string reproducibility_hash() const;
  nlohmann::json to_json() const;

  std::string checks_csv() const;
  std::string violations_csv() const;
};

// Names of the per-seed checks, in output order.
std::span<const std::string_view> check_names();

// Runs one seed end to end against a prepared catalog of `points`.
SeedResult run_seed(const PointSet& points, const RangeCatalog& catalog_X, const ExperimentConfig& config,
                    std::uint64_t seed);

Report run(const ExperimentConfig& config);

// report.json, checks.csv, violations.csv, comparison.csv.
void write_outputs(const Report& report, const std::string& dir);

// Baseline vs. construction on a fixed point set, one row per seed.
ComparisonTable compare(const PointSet& points, const RangeFamily& family, const ApproxParams& params,
                        std::span<const std::uint64_t> seeds, const EnumerationOptions& options = {});

struct ProfileReport {
  RangeFamily family;
  std::size_t n = 0;
  std::vector<ProfileRow> rows;
  // max over k of count(k) / (n phi(n) k^c): the smallest constant the
  // well-behavedness bound needs on this input.
  double fitted_beta = 0;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

ProfileReport profile(const PointSet& points, const RangeFamily& family, std::span<const std::size_t> ks,
                      const EnumerationOptions& options = {});
ProfileReport profile(const RangeCatalog& catalog, std::span<const std::size_t> ks);

}  // namespace relapprox
