#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "scenarios.hpp"
#include "timeless/error.hpp"
#include "timeless/harness.hpp"
#include "timeless/phase_space.hpp"

namespace timeless::harness {

using nlohmann::json;

namespace {

enum class Kind { Integer, Number, String, NumberList, Object };

struct Param {
  std::string key;
  Kind kind;
  json fallback;  // null when required
};

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Integer: return "an integer";
    case Kind::Number: return "a number";
    case Kind::String: return "a string";
    case Kind::NumberList: return "an array of numbers";
    case Kind::Object: return "an object";
  }
  return "?";
}

bool matches(const json& v, Kind k) {
  switch (k) {
    case Kind::Integer:
      return v.is_number_integer() ||
             (v.is_number_float() && std::nearbyint(v.get<double>()) == v.get<double>());
    case Kind::Number: return v.is_number();
    case Kind::String: return v.is_string();
    case Kind::NumberList:
      if (!v.is_array()) return false;
      for (const auto& x : v)
        if (!x.is_number()) return false;
      return true;
    case Kind::Object: return v.is_object();
  }
  return false;
}

const double kPi = std::numbers::pi;

std::vector<Param> schema(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::PwQuantum:
      return {{"d_s", Kind::Integer, nullptr},
              {"d", Kind::Integer, nullptr},
              {"dt", Kind::Number, nullptr},
              {"gap_multiple", Kind::Integer, 1},
              {"incommensurate_gap", Kind::Number, 1.0},
              {"degradation_sizes", Kind::NumberList, {8, 16, 32, 64}},
              {"degradation_min", Kind::Number, 1e-3},
              {"degradation_dt", Kind::Number, 0.5},
              {"vn_dt", Kind::Number, 0.1},
              {"vn_time", Kind::Number, 0.8},
              {"vn_window", Kind::NumberList, {3.5, 4.5}},
              {"reduced_entropy_min", Kind::Number, 0.5}};
    case ScenarioKind::ClassicalLiouville:
      return {{"system", Kind::String, nullptr},
              {"center", Kind::NumberList, {1.0, 0.0}},
              {"sigma", Kind::Number, 0.2},
              {"nodes", Kind::Integer, 21},
              {"span", Kind::Number, 5.0},
              {"bandwidth", Kind::Number, 0.1},
              {"t", Kind::Number, kPi / 2},
              {"dt", Kind::Number, 1e-3},
              {"snapshots", Kind::Integer, 8},
              {"center_tol", Kind::Number, 1e-4},
              {"mass_tol", Kind::Number, 1e-9},
              {"semigroup_tol", Kind::Number, 1e-6},
              {"det_tol", Kind::Number, 1e-6},
              {"drift_dt", Kind::Number, 0.02},
              {"drift_window", Kind::NumberList, {3.5, 4.5}},
              {"liouville_points", Kind::Integer, 16},
              {"liouville_step", Kind::Number, 1e-4},
              {"liouville_tol", Kind::Number, 1e-5},
              {"branches", Kind::Integer, 8},
              {"clock_system", Kind::String, "harmonic(1,1)"},
              {"clock_radius", Kind::Number, 14.0},
              {"clock_sigma", Kind::Number, 0.8},
              {"clock_bandwidth", Kind::Number, 0.6},
              {"branch_sigma", Kind::Number, 0.3},
              {"branch_bandwidth", Kind::Number, 0.15},
              {"branch_nodes", Kind::Integer, 15},
              {"branch_span", Kind::Number, 4.0},
              {"overlap_tol", Kind::Number, 1e-6},
              {"conditioning_tol", Kind::Number, 1e-6},
              {"sync_tol", Kind::Number, 1e-5}};
    case ScenarioKind::Extended:
      return {{"system", Kind::String, nullptr},
              {"initial", Kind::NumberList, {1.0, 0.0}},
              {"t0", Kind::Number, 0.0},
              {"steps", Kind::Integer, 1000000},
              {"dtau", Kind::Number, 1e-3},
              {"stride", Kind::Integer, 10000},
              {"constraint_tol", Kind::Number, 1e-9},
              {"constraint_drift_tol", Kind::Number, 1e-6},
              {"p0_tol", Kind::Number, 1e-12},
              {"clock_step_tol", Kind::Number, 1e-12},
              {"reduction_tol", Kind::Number, 1e-8}};
    case ScenarioKind::HjCorrelation:
      return {{"system", Kind::String, nullptr},
              {"q", Kind::NumberList, {0.0, 0.5}},
              {"e1", Kind::Number, 0.5},
              {"residual_tol", Kind::Number, 1e-6},
              {"closed_form_tol", Kind::Number, 1e-8},
              {"order_steps", Kind::NumberList, {0.04, 0.02}},
              {"order_window", Kind::NumberList, {3.5, 4.5}},
              {"exchange_deltas", Kind::NumberList, {1e-3, 1e-2}},
              {"exchange_tol", Kind::Number, 1e-6}};
    case ScenarioKind::Constraints:
      return {{"generator", Kind::String, "momentum_ring(8)"},
              {"clock_generator", Kind::String, ""},
              {"target", Kind::Number, 0.0},
              {"eig_tol", Kind::Number, 1e-8},
              {"shifts", Kind::Integer, 32},
              {"shift_range", Kind::NumberList, {-kPi, kPi}},
              {"covariance_tol", Kind::Number, 1e-10},
              {"cross_d", Kind::Integer, 8},
              {"cross_dt", Kind::Number, 0.5},
              {"cross_tol", Kind::Number, 1e-10},
              {"two_particle", Kind::NumberList, {1.0, 1.0, 1.0, 0.0}},
              {"tp_steps", Kind::Integer, 1000000},
              {"tp_dt", Kind::Number, 1e-3},
              {"momentum_tol", Kind::Number, 1e-12},
              {"cm_tol", Kind::Number, 1e-10}};
  }
  return {};
}

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorCode::Config, msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) config_error(msg);
}

void require_positive(const json& p, const std::string& key) {
  require(p.at(key).get<double>() > 0.0, "'" + key + "' must be positive");
}

void require_window(const json& p, const std::string& key) {
  const auto& w = p.at(key);
  require(w.size() == 2 && w[0].get<double>() < w[1].get<double>(),
          "'" + key + "' must be [lower, upper] with lower < upper");
}

void validate_system_id(const json& p, const std::string& key) {
  try {
    (void)parse_system_id(p.at(key).get<std::string>());
  } catch (const Error& e) {
    config_error("'" + key + "': " + e.what());
  }
}

void validate(ScenarioKind kind, const json& p) {
  for (const auto& [key, value] : p.items()) {
    if (key.ends_with("_tol") || key == "dt" || key == "dtau" || key == "sigma" ||
        key == "bandwidth" || key.ends_with("_sigma") || key.ends_with("_bandwidth")) {
      if (value.is_number()) require_positive(p, key);
    }
  }
  switch (kind) {
    case ScenarioKind::PwQuantum: {
      require(p["d"].get<long>() >= 2, "'d' must be at least 2 (a one-state clock cannot tick)");
      require(p["d_s"].get<long>() >= 2, "'d_s' must be at least 2");
      require(p["d"].get<long>() <= 128 && p["d_s"].get<long>() * p["d"].get<long>() <= 256,
              "'d_s' * 'd' must not exceed 256");
      require(!p["degradation_sizes"].empty(), "'degradation_sizes' must not be empty");
      for (const auto& d : p["degradation_sizes"]) {
        require(matches(d, Kind::Integer) && d.get<long>() >= 2 && d.get<long>() <= 128,
                "'degradation_sizes' entries must be integers in [2, 128]");
      }
      for (const char* key : {"vn_dt", "vn_time", "reduced_entropy_min", "degradation_min", "degradation_dt"})
        require_positive(p, key);
      require_window(p, "vn_window");
      break;
    }
    case ScenarioKind::ClassicalLiouville: {
      validate_system_id(p, "system");
      validate_system_id(p, "clock_system");
      require(p["center"].size() == 2, "'center' must be [q, p] for a one-degree-of-freedom system");
      for (const char* key : {"nodes", "branch_nodes", "snapshots", "liouville_points"})
        require(p[key].get<long>() >= 1, std::string("'") + key + "' must be at least 1");
      require(p["branches"].get<long>() >= 1, "'branches' must be at least 1");
      for (const char* key : {"span", "branch_span", "t", "drift_dt", "clock_radius", "liouville_step"})
        require_positive(p, key);
      require_window(p, "drift_window");
      break;
    }
    case ScenarioKind::Extended:
      validate_system_id(p, "system");
      require(p["initial"].size() == 2, "'initial' must be [q, p]");
      require(p["steps"].get<long>() >= 1, "'steps' must be at least 1");
      require(p["stride"].get<long>() >= 1, "'stride' must be at least 1");
      break;
    case ScenarioKind::HjCorrelation:
      validate_system_id(p, "system");
      require(!p["q"].empty(), "'q' must list at least one configuration");
      require(p["order_steps"].size() == 2, "'order_steps' must be [coarse, fine]");
      require_window(p, "order_window");
      break;
    case ScenarioKind::Constraints: {
      try {
        (void)parse_generator(p["generator"].get<std::string>());
        if (!p["clock_generator"].get<std::string>().empty())
          (void)parse_generator(p["clock_generator"].get<std::string>());
      } catch (const Error& e) {
        config_error(std::string("generator: ") + e.what());
      }
      require(p["shifts"].get<long>() >= 1, "'shifts' must be at least 1");
      require(p["shift_range"].size() == 2, "'shift_range' must be [lo, hi]");
      require(p["cross_d"].get<long>() >= 2, "'cross_d' must be at least 2");
      require(p["two_particle"].size() == 4, "'two_particle' must be [m1, m2, p1, p_total]");
      require(p["tp_steps"].get<long>() >= 1, "'tp_steps' must be at least 1");
      break;
    }
  }
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::PwQuantum: return "pw_quantum";
    case ScenarioKind::ClassicalLiouville: return "classical_liouville";
    case ScenarioKind::Extended: return "extended";
    case ScenarioKind::HjCorrelation: return "hj_correlation";
    case ScenarioKind::Constraints: return "constraints";
  }
  return "?";
}

const std::vector<ScenarioKind>& all_scenarios() {
  static const std::vector<ScenarioKind> kinds{
      ScenarioKind::PwQuantum, ScenarioKind::ClassicalLiouville, ScenarioKind::Extended,
      ScenarioKind::HjCorrelation, ScenarioKind::Constraints};
  return kinds;
}

std::string describe(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::PwQuantum:
      return "history state on a cyclic clock: conditional dynamics, stationarity, "
             "von Neumann order, clock degradation, entanglement entropy";
    case ScenarioKind::ClassicalLiouville:
      return "Liouville transport of a phase-space blob, flow-map checks, clock-branch "
             "conditioning, relational sync, joint entropy";
    case ScenarioKind::Extended:
      return "leapfrog on the extended phase space (q, t, p, p0) against the direct flow";
    case ScenarioKind::HjCorrelation:
      return "Hamilton-Jacobi times of a mirror pair, t1 + t2 at zero total energy";
    case ScenarioKind::Constraints:
      return "constraint eigenspaces, covariance sweep, energy-constraint equivalence, "
             "two-particle momentum constraint";
  }
  return "";
}

ScenarioConfig parse_config_document(const json& doc) {
  require(doc.is_object(), "config must be a JSON object");
  require(doc.contains("scenario"), "missing required key 'scenario'");
  require(doc["scenario"].is_string(), "'scenario' must be a string");
  const std::string scenario = doc["scenario"].get<std::string>();

  ScenarioConfig cfg;
  bool found = false;
  for (ScenarioKind k : all_scenarios()) {
    if (to_string(k) == scenario) {
      cfg.scenario = k;
      found = true;
    }
  }
  if (!found) {
    std::string names;
    for (ScenarioKind k : all_scenarios()) names += (names.empty() ? "" : ", ") + to_string(k);
    config_error("unknown scenario '" + scenario + "' (expected one of " + names + ")");
  }
  cfg.name = scenario;

  const std::vector<Param> params = schema(cfg.scenario);
  cfg.params = json::object();
  for (const auto& [key, value] : doc.items()) {
    if (key == "scenario") continue;
    if (key == "name") {
      require(value.is_string() && !value.get<std::string>().empty(), "'name' must be a non-empty string");
      cfg.name = value.get<std::string>();
    } else if (key == "seed") {
      require(value.is_number_unsigned() || (value.is_number_integer() && value.get<long long>() >= 0),
              "'seed' must be a non-negative integer");
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "tol") {
      require(value.is_number() && value.get<double>() > 0.0, "'tol' must be a positive number");
      cfg.tol = value.get<double>();
    } else if (key == "tol_scale") {
      require(value.is_number() && value.get<double>() > 0.0, "'tol_scale' must be a positive number");
      cfg.tol_scale = value.get<double>();
    } else if (key == "output_dir") {
      require(value.is_string(), "'output_dir' must be a string");
      cfg.output_dir = value.get<std::string>();
    } else {
      const auto it = std::find_if(params.begin(), params.end(), [&](const Param& p) { return p.key == key; });
      if (it == params.end()) config_error("unknown key '" + key + "' for scenario " + scenario);
      require(matches(value, it->kind), "'" + key + "' must be " + kind_name(it->kind));
      cfg.params[key] = value;
    }
  }
  for (const Param& p : params) {
    if (cfg.params.contains(p.key)) continue;
    if (p.fallback.is_null()) config_error("missing required key '" + p.key + "' for scenario " + scenario);
    cfg.params[p.key] = p.fallback;
  }
  validate(cfg.scenario, cfg.params);
  return cfg;
}

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  return parse_config_document(doc);
}

ScenarioConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace timeless::harness
