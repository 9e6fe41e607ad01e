#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>

#include "timeless/csv.hpp"
#include "timeless/harness.hpp"
#include "timeless/linalg.hpp"

namespace timeless::harness {

/// "momentum_ring(d)", "sz(j)" or "custom(path-to-matrix-csv)".
ComplexMatrix parse_generator(const std::string& spec);

class Recorder {
 public:
  Recorder(VerificationReport& report, double tol_scale) : report_(report), scale_(tol_scale) {}

  /// measured < tol * tol_scale
  template <class F>
  double below(std::string name, double tol, F&& measure, std::string note = {}) {
    return record(std::move(name), Relation::Below, 0.0, tol * scale_, std::forward<F>(measure),
                  std::move(note));
  }
  /// measured > bound
  template <class F>
  double above(std::string name, double bound, F&& measure, std::string note = {}) {
    return record(std::move(name), Relation::Above, bound, 0.0, std::forward<F>(measure),
                  std::move(note));
  }
  /// lower <= measured <= upper
  template <class F>
  double within(std::string name, double lower, double upper, F&& measure, std::string note = {}) {
    return record(std::move(name), Relation::Within, lower, upper, std::forward<F>(measure),
                  std::move(note));
  }
  /// measure() returns a bool
  template <class F>
  bool holds(std::string name, F&& measure, std::string note = {}) {
    return record(std::move(name), Relation::Holds, 0.0, 0.0,
                  [&] { return measure() ? 1.0 : 0.0; }, std::move(note)) == 1.0;
  }

 private:
  template <class F>
  double record(std::string name, Relation relation, double lower, double upper, F&& measure,
                std::string note) {
    const auto start = std::chrono::steady_clock::now();
    const double value = measure();
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    CheckRecord c;
    c.name = std::move(name);
    c.measured = value;
    c.lower = lower;
    c.upper = upper;
    c.relation = relation;
    c.runtime_s = elapsed.count();
    c.note = std::move(note);
    switch (relation) {
      case Relation::Below: c.pass = value < upper; break;
      case Relation::Above: c.pass = value > lower; break;
      case Relation::Within: c.pass = value >= lower && value <= upper; break;
      case Relation::Holds: c.pass = value == 1.0; break;
    }
    report_.checks.push_back(std::move(c));
    return value;
  }

  VerificationReport& report_;
  double scale_;
};

class Artifacts {
 public:
  Artifacts(VerificationReport& report, std::filesystem::path dir)
      : report_(report), dir_(std::move(dir)) {}
  void save(const csv::Table& table, const std::string& file) {
    table.save((dir_ / file).string());
    report_.artifacts.push_back(file);
  }
  std::filesystem::path path(const std::string& file) {
    report_.artifacts.push_back(file);
    return dir_ / file;
  }

 private:
  VerificationReport& report_;
  std::filesystem::path dir_;
};

struct ScenarioContext {
  const ScenarioConfig& cfg;
  Recorder& check;
  Artifacts& out;
};

void run_pw_quantum(ScenarioContext& ctx);
void run_classical_liouville(ScenarioContext& ctx);
void run_extended(ScenarioContext& ctx);
void run_hj_correlation(ScenarioContext& ctx);
void run_constraints(ScenarioContext& ctx);

}  // namespace timeless::harness
