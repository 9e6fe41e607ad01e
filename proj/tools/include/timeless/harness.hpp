#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace timeless::harness {

enum class ScenarioKind { PwQuantum, ClassicalLiouville, Extended, HjCorrelation, Constraints };

std::string to_string(ScenarioKind kind);
const std::vector<ScenarioKind>& all_scenarios();
/// One-line summary for `timeless list-scenarios`.
std::string describe(ScenarioKind kind);

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::PwQuantum;
  std::string name;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  /// Multiplies every upper-bound tolerance; ratio windows are unaffected.
  double tol_scale = 1.0;
  std::filesystem::path output_dir = "out";
  /// Scenario parameters with every default filled in.
  nlohmann::json params;
};

/// Parse and validate a JSON document. Unknown keys, missing required keys,
/// bad types and out-of-range values throw Error(Config).
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig parse_config_file(const std::filesystem::path& path);
ScenarioConfig parse_config_document(const nlohmann::json& doc);

enum class Relation { Below, Above, Within, Holds };

struct CheckRecord {
  std::string name;
  double measured = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  Relation relation = Relation::Below;
  bool pass = false;
  double runtime_s = 0.0;
  std::string note;
};

struct VerificationReport {
  std::string scenario;
  std::string name;
  std::uint64_t seed = 0;
  double tol_scale = 1.0;
  std::vector<CheckRecord> checks;
  std::vector<std::string> artifacts;

  bool pass() const;
  /// With `include_runtime` false the document is a pure function of the
  /// config, so reruns compare byte for byte.
  nlohmann::json to_json(bool include_runtime = true) const;
};

/// Run the scenario's check suite, writing CSV tables and report.json into
/// cfg.output_dir. Core errors are rethrown with the scenario name prepended.
VerificationReport run_scenario(const ScenarioConfig& cfg);

void write_report(const VerificationReport& report, const std::filesystem::path& path);

/// Built-in configs covering every scenario, used by `timeless selftest`.
std::vector<ScenarioConfig> selftest_configs(const std::filesystem::path& root);

struct SelftestResult {
  std::vector<VerificationReport> reports;
  /// Files whose second run differed from the first.
  std::vector<std::string> nondeterministic;
  bool pass() const;
};

/// Run every built-in config twice under `root` (run1/, run2/) and compare
/// the outputs.
SelftestResult selftest(const std::filesystem::path& root, std::ostream& log);

}  // namespace timeless::harness
