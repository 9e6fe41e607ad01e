#include <cmath>

#include "scenarios.hpp"
#include "timeless/quantum_pw.hpp"
#include "timeless/random.hpp"

namespace timeless::harness {

namespace {

ComplexMatrix diagonal(const RealVector& e) {
  return e.cast<Complex>().asDiagonal();
}

}  // namespace

void run_pw_quantum(ScenarioContext& ctx) {
  const auto& p = ctx.cfg.params;
  const auto d_s = p["d_s"].get<Eigen::Index>();
  const auto d = p["d"].get<Eigen::Index>();
  const double dt = p["dt"].get<double>();
  const long multiple = p["gap_multiple"].get<long>();
  const double tol = ctx.cfg.tol;
  Rng rng(ctx.cfg.seed);

  // Commensurate spectrum j * multiple * w in a random eigenbasis.
  const pw::ClockModel clock = pw::build_cyclic_clock(d, dt);
  RealVector levels(d_s);
  for (Eigen::Index j = 0; j < d_s; ++j) {
    levels(j) = static_cast<double>(j * multiple) * clock.frequency();
  }
  const ComplexMatrix basis = hermitian_eigen(rng.hermitian(d_s)).vectors;
  const ComplexMatrix hs = basis * diagonal(levels) * basis.adjoint();
  // Equal weights on every level with random phases.
  ComplexVector weights(d_s);
  for (Eigen::Index j = 0; j < d_s; ++j) {
    weights(j) = std::polar(1.0 / std::sqrt(static_cast<double>(d_s)), rng.uniform(0.0, 6.283185307179586));
  }
  const ComplexVector phi0 = basis * weights;
  const pw::HistoryState history = pw::build_history_state(hs, phi0, clock);
  const HermitianEigen hs_eig = hermitian_eigen(hs);

  std::vector<std::string> header{"k", "t", "fidelity"};
  for (Eigen::Index j = 0; j < d_s; ++j) header.push_back("population_" + std::to_string(j));
  csv::Table fidelities(header);
  ctx.check.below("conditional_infidelity_max", tol, [&] {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double t = static_cast<double>(k) * dt;
      const ComplexVector conditioned = pw::condition_on_clock(history, k);
      const ComplexVector exact = unitary_evolution(hs_eig, t) * phi0;
      const double f = fidelity(conditioned, exact);
      worst = std::max(worst, 1.0 - f);
      std::vector<double> row{static_cast<double>(k), t, f};
      for (Eigen::Index j = 0; j < d_s; ++j) row.push_back(std::norm(conditioned(j)));
      fidelities.row(row);
    }
    return worst;
  });
  ctx.out.save(fidelities, "conditional_fidelity.csv");

  ctx.check.below("stationarity_residual", tol, [&] { return pw::stationarity_residual(history, hs); });

  // Second-order finite difference of the conditional density matrix.
  const double vn_dt = p["vn_dt"].get<double>();
  const double vn_time = p["vn_time"].get<double>();
  csv::Table vn({"level", "d", "dt", "k", "residual", "under_resolved"});
  double residual[2] = {0.0, 0.0};
  for (int level = 0; level < 2; ++level) {
    const double step = vn_dt / std::pow(2.0, level);
    const auto k = static_cast<Eigen::Index>(std::llround(vn_time / step));
    const Eigen::Index dim = k + 2;
    const pw::HistoryState fine = pw::build_history_state(hs, phi0, pw::build_cyclic_clock(dim, step));
    const pw::VonNeumannResidual r = pw::von_neumann_residual(fine, hs, k);
    residual[level] = r.residual;
    vn.row(std::vector<double>{static_cast<double>(level), static_cast<double>(dim), step,
                               static_cast<double>(k), r.residual, r.under_resolved ? 1.0 : 0.0});
  }
  ctx.out.save(vn, "von_neumann.csv");
  ctx.check.within("von_neumann_order", p["vn_window"][0].get<double>(), p["vn_window"][1].get<double>(),
                   [&] { return residual[0] / residual[1]; }, "residual ratio when dt halves");

  // Incommensurate qubit on growing clocks at fixed spacing.
  const double degradation_dt = p["degradation_dt"].get<double>();
  ComplexMatrix h_off = ComplexMatrix::Zero(2, 2);
  h_off(1, 1) = p["incommensurate_gap"].get<double>();
  ComplexVector plus = ComplexVector::Constant(2, 1.0 / std::sqrt(2.0));
  csv::Table degradation({"d", "residual"});
  std::vector<double> residuals;
  for (const auto& size : p["degradation_sizes"]) {
    const auto dim = size.get<Eigen::Index>();
    const pw::HistoryState h = pw::build_history_state(h_off, plus, pw::build_cyclic_clock(dim, degradation_dt));
    residuals.push_back(pw::stationarity_residual(h, h_off));
    degradation.row(std::vector<double>{static_cast<double>(dim), residuals.back()});
  }
  ctx.out.save(degradation, "clock_degradation.csv");
  ctx.check.above("degradation_coarsest_residual", p["degradation_min"].get<double>(),
                  [&] { return residuals.front(); });
  ctx.check.holds("degradation_strictly_decreasing", [&] {
    for (std::size_t i = 1; i < residuals.size(); ++i)
      if (!(residuals[i] < residuals[i - 1])) return false;
    return true;
  });

  // Pure global state, mixed reduced state.
  const pw::DensityMatrix global = pw::DensityMatrix::pure(history.psi);
  const double s_global = pw::von_neumann_entropy(global);
  const double s_reduced =
      pw::von_neumann_entropy(pw::partial_trace(global, d_s, d, pw::Subsystem::System));
  csv::Table entropy({"state", "entropy_bits"});
  entropy.row(std::vector<std::string>{"global", csv::format_double(s_global)});
  entropy.row(std::vector<std::string>{"system", csv::format_double(s_reduced)});
  ctx.out.save(entropy, "entropy.csv");
  ctx.check.below("global_entropy_bits", tol, [&] { return s_global; });
  ctx.check.above("reduced_entropy_bits", p["reduced_entropy_min"].get<double>(), [&] { return s_reduced; });
}

}  // namespace timeless::harness
