#include <iostream>

#include <CLI11.hpp>

#include "timeless/error.hpp"
#include "timeless/harness.hpp"

namespace {

using namespace timeless::harness;

int print_report(const VerificationReport& report) {
  for (const CheckRecord& c : report.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << c.measured << '\n';
  }
  std::cout << (report.pass() ? "PASS " : "FAIL ") << report.name << '\n';
  return report.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"timeless: relational-time simulations and their invariant checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  double tol_scale = 1.0;
  auto* run = app.add_subcommand("run", "Run one scenario from a JSON config");
  run->add_option("config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  auto* out_opt = run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  auto* seed_opt = run->add_option("--seed", seed, "RNG seed (overrides seed)");
  auto* scale_opt =
      run->add_option("--tol-scale", tol_scale, "Multiply every tolerance")->check(CLI::PositiveNumber);

  app.add_subcommand("list-scenarios", "List available scenarios");

  std::string selftest_dir = "timeless-selftest";
  auto* selftest_cmd = app.add_subcommand("selftest", "Run the built-in invariant suite twice and compare");
  selftest_cmd->add_option("--out", selftest_dir, "Working directory for selftest outputs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list-scenarios")) {
      for (ScenarioKind k : all_scenarios()) std::cout << to_string(k) << "  " << describe(k) << '\n';
      return 0;
    }
    if (app.got_subcommand("selftest")) {
      const SelftestResult result = selftest(selftest_dir, std::cout);
      std::cout << (result.pass() ? "selftest passed" : "selftest FAILED") << '\n';
      return result.pass() ? 0 : 1;
    }
    ScenarioConfig cfg = parse_config_file(config_path);
    if (*out_opt) cfg.output_dir = out_dir;
    if (*seed_opt) cfg.seed = seed;
    if (*scale_opt) cfg.tol_scale = tol_scale;
    return print_report(run_scenario(cfg));
  } catch (const timeless::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
