#include <fstream>
#include <iomanip>
#include <ostream>
#include <regex>
#include <sstream>

#include "scenarios.hpp"
#include "timeless/error.hpp"
#include "timeless/generalized_constraints.hpp"

namespace timeless::harness {

using nlohmann::json;

namespace {

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::Below: return "below";
    case Relation::Above: return "above";
    case Relation::Within: return "within";
    case Relation::Holds: return "holds";
  }
  return "?";
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json without_runtime(const std::filesystem::path& p) {
  json doc = json::parse(read_file(p));
  for (auto& c : doc["checks"]) c.erase("runtime_s");
  return doc;
}

}  // namespace

ComplexMatrix parse_generator(const std::string& spec) {
  static const std::regex call(R"(^\s*([a-z_]+)\s*\(\s*(.*?)\s*\)\s*$)");
  std::smatch m;
  if (!std::regex_match(spec, m, call)) {
    fail(ErrorCode::Config, "cannot parse generator '" + spec + "'");
  }
  const std::string name = m[1];
  const std::string arg = m[2];
  auto number = [&](const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size()) fail(ErrorCode::Config, what + " needs a numeric argument, got '" + arg + "'");
    return v;
  };
  if (name == "momentum_ring") {
    const double d = number("momentum_ring");
    if (d != std::nearbyint(d) || d < 2) {
      fail(ErrorCode::Config, "momentum_ring(d) needs an integer d >= 2, got '" + arg + "'");
    }
    return constraints::cyclic_translation_generator(static_cast<Eigen::Index>(d));
  }
  if (name == "sz") {
    try {
      return constraints::spin_z(number("sz"));
    } catch (const Error& e) {
      fail(ErrorCode::Config, std::string("sz(j): ") + e.what());
    }
  }
  if (name == "custom") {
    ComplexMatrix g = csv::read_complex_matrix_file(arg);
    if (g.rows() != g.cols() || !is_hermitian(g)) {
      fail(ErrorCode::Config, "custom generator " + arg + " is not a Hermitian square matrix");
    }
    return g;
  }
  fail(ErrorCode::Config, "unknown generator '" + name + "' (expected momentum_ring, sz or custom)");
}

bool VerificationReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

json VerificationReport::to_json(bool include_runtime) const {
  json doc;
  doc["scenario"] = scenario;
  doc["name"] = name;
  doc["seed"] = seed;
  doc["tol_scale"] = tol_scale;
  doc["pass"] = pass();
  doc["checks"] = json::array();
  for (const CheckRecord& c : checks) {
    json r;
    r["name"] = c.name;
    r["relation"] = relation_name(c.relation);
    r["measured"] = c.measured;
    switch (c.relation) {
      case Relation::Below: r["tolerance"] = c.upper; break;
      case Relation::Above: r["bound"] = c.lower; break;
      case Relation::Within: r["window"] = {c.lower, c.upper}; break;
      case Relation::Holds: break;
    }
    r["pass"] = c.pass;
    if (include_runtime) r["runtime_s"] = c.runtime_s;
    if (!c.note.empty()) r["note"] = c.note;
    doc["checks"].push_back(std::move(r));
  }
  doc["artifacts"] = artifacts;
  return doc;
}

void write_report(const VerificationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Config, "cannot write " + path.string());
  out << report.to_json().dump(2) << '\n';
}

VerificationReport run_scenario(const ScenarioConfig& cfg) {
  VerificationReport report;
  report.scenario = to_string(cfg.scenario);
  report.name = cfg.name;
  report.seed = cfg.seed;
  report.tol_scale = cfg.tol_scale;

  std::filesystem::create_directories(cfg.output_dir);
  Recorder recorder(report, cfg.tol_scale);
  Artifacts artifacts(report, cfg.output_dir);
  ScenarioContext ctx{cfg, recorder, artifacts};
  try {
    switch (cfg.scenario) {
      case ScenarioKind::PwQuantum: run_pw_quantum(ctx); break;
      case ScenarioKind::ClassicalLiouville: run_classical_liouville(ctx); break;
      case ScenarioKind::Extended: run_extended(ctx); break;
      case ScenarioKind::HjCorrelation: run_hj_correlation(ctx); break;
      case ScenarioKind::Constraints: run_constraints(ctx); break;
    }
  } catch (const Error& e) {
    fail(e.code(), "scenario '" + cfg.name + "': " + e.what());
  }
  report.artifacts.push_back("report.json");
  write_report(report, cfg.output_dir / "report.json");
  return report;
}

std::vector<ScenarioConfig> selftest_configs(const std::filesystem::path& root) {
  const std::vector<json> docs{
      {{"scenario", "pw_quantum"}, {"name", "pw_d8"}, {"d_s", 2}, {"d", 8}, {"dt", 0.5}},
      {{"scenario", "pw_quantum"}, {"name", "pw_d16"}, {"d_s", 2}, {"d", 16}, {"dt", 0.25}, {"gap_multiple", 3}},
      {{"scenario", "pw_quantum"}, {"name", "pw_d32"}, {"d_s", 2}, {"d", 32}, {"dt", 0.125}, {"gap_multiple", -5}},
      {{"scenario", "classical_liouville"}, {"name", "liouville_harmonic"}, {"system", "harmonic(1,1)"}},
      {{"scenario", "classical_liouville"},
       {"name", "liouville_free"},
       {"system", "free_particle(1)"},
       {"center", {0.0, 1.0}},
       {"t", 2.0}},
      {{"scenario", "extended"}, {"name", "extended_harmonic"}, {"system", "harmonic(1,1)"}},
      {{"scenario", "hj_correlation"}, {"name", "hj_free"}, {"system", "free_particle(1)"}, {"q", {0.0, 1.0, 3.0}}},
      {{"scenario", "hj_correlation"},
       {"name", "hj_harmonic"},
       {"system", "harmonic(1,1)"},
       {"q", {0.0, 0.3, 0.6, 0.9}},
       {"e1", 1.0}},
      {{"scenario", "constraints"}, {"name", "constraints_ring8"}},
  };
  std::vector<ScenarioConfig> out;
  for (const json& doc : docs) {
    ScenarioConfig cfg = parse_config_document(doc);
    cfg.output_dir = root / cfg.name;
    out.push_back(std::move(cfg));
  }
  return out;
}

bool SelftestResult::pass() const {
  if (!nondeterministic.empty()) return false;
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass(); });
}

SelftestResult selftest(const std::filesystem::path& root, std::ostream& log) {
  SelftestResult result;
  const auto first = selftest_configs(root / "run1");
  const auto second = selftest_configs(root / "run2");
  for (std::size_t i = 0; i < first.size(); ++i) {
    VerificationReport report = run_scenario(first[i]);
    for (const CheckRecord& c : report.checks) {
      log << (c.pass ? "PASS " : "FAIL ") << report.name << '/' << c.name << " = " << c.measured
          << '\n';
    }
    run_scenario(second[i]);
    for (const std::string& file : report.artifacts) {
      const auto a = first[i].output_dir / file;
      const auto b = second[i].output_dir / file;
      const bool same = file == "report.json" ? without_runtime(a) == without_runtime(b)
                                              : read_file(a) == read_file(b);
      if (!same) result.nondeterministic.push_back(report.name + "/" + file);
    }
    log << (report.pass() ? "PASS " : "FAIL ") << report.name << " (" << report.checks.size()
        << " checks)\n";
    result.reports.push_back(std::move(report));
  }
  for (const std::string& f : result.nondeterministic) log << "FAIL rerun differs: " << f << '\n';
  log << (result.nondeterministic.empty() ? "PASS " : "FAIL ")
      << "rerun with the same seed reproduces every artifact\n";
  return result;
}

}  // namespace timeless::harness
