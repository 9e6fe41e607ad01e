#include <cmath>
#include <numbers>

#include "scenarios.hpp"
#include "timeless/generalized_constraints.hpp"
#include "timeless/quantum_pw.hpp"
#include "timeless/random.hpp"

namespace timeless::harness {

using namespace constraints;

void run_constraints(ScenarioContext& ctx) {
  const auto& p = ctx.cfg.params;
  Rng rng(ctx.cfg.seed);
  const std::string gen_name = p["generator"].get<std::string>();
  const std::string clock_name =
      p["clock_generator"].get<std::string>().empty() ? gen_name : p["clock_generator"].get<std::string>();
  const ConstraintSpec spec{parse_generator(gen_name), parse_generator(clock_name), p["target"].get<double>(),
                            gen_name + " + " + clock_name};
  const double cov_tol = p["covariance_tol"].get<double>();

  if (gen_name.starts_with("momentum_ring")) {
    const Eigen::Index d = spec.system_dim();
    ctx.check.below("translation_generator_shift", cov_tol, [&] {
      return max_abs(unitary_evolution(spec.system_generator, 2.0 * std::numbers::pi / static_cast<double>(d)) -
                     cyclic_shift(d));
    });
  }

  const auto states = build_constraint_state(spec, p["eig_tol"].get<double>());
  ctx.check.above("constraint_space_dimension", 0.0, [&] { return static_cast<double>(states.size()); });
  ctx.check.below("constraint_residual_max", cov_tol, [&] {
    double worst = 0.0;
    for (const auto& s : states) worst = std::max(worst, constraint_residual(s.psi, spec));
    return worst;
  });

  const long shifts = p["shifts"].get<long>();
  const double lo = p["shift_range"][0].get<double>();
  const double hi = p["shift_range"][1].get<double>();
  csv::Table covariance({"state", "shift", "residual"});
  ctx.check.below("covariance_residual_max", cov_tol, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      for (long j = 0; j < shifts; ++j) {
        const double s = shifts == 1 ? lo : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(shifts - 1);
        const double r = covariance_check(states[i], spec, s);
        worst = std::max(worst, r);
        covariance.row(std::vector<double>{static_cast<double>(i), s, r});
      }
    }
    return worst;
  });
  ctx.out.save(covariance, "covariance.csv");

  // Energy constraint on a qubit and cyclic clock, read out both ways.
  const auto d = p["cross_d"].get<Eigen::Index>();
  const double dt = p["cross_dt"].get<double>();
  const pw::ClockModel clock = pw::build_cyclic_clock(d, dt);
  const ComplexMatrix basis = hermitian_eigen(rng.hermitian(2)).vectors;
  ComplexMatrix hs = ComplexMatrix::Zero(2, 2);
  hs(1, 1) = clock.frequency();
  hs = basis * hs * basis.adjoint();
  const ComplexVector phi0 = rng.unit_vector(2);
  const pw::HistoryState history = pw::build_history_state(hs, phi0, clock);
  const ConstraintSpec energy{hs, clock.hamiltonian, 0.0, "energy"};
  const Readout readout = relational_readout(ConstraintState{history.psi, {energy}}, clock.time_states,
                                             pw::Subsystem::Clock);
  csv::Table cross({"k", "fidelity_readout", "fidelity_pw", "difference"});
  ctx.check.below("energy_constraint_residual", cov_tol, [&] { return constraint_residual(history.psi, energy); });
  ctx.check.below("cross_module_fidelity_difference", p["cross_tol"].get<double>(), [&] {
    if (readout.branches.size() != static_cast<std::size_t>(d)) return 1.0;
    double worst = 0.0;
    for (const auto& b : readout.branches) {
      const ComplexVector exact = unitary_evolution(hs, dt * static_cast<double>(b.outcome)) * phi0;
      const double f_readout = fidelity(b.state, exact);
      const double f_pw = fidelity(pw::condition_on_clock(history, static_cast<Eigen::Index>(b.outcome)), exact);
      worst = std::max(worst, std::abs(f_readout - f_pw));
      cross.row(std::vector<double>{static_cast<double>(b.outcome), f_readout, f_pw, f_readout - f_pw});
    }
    return worst;
  });
  ctx.out.save(cross, "cross_module.csv");

  // Classical two-particle momentum constraint.
  const auto& tp = p["two_particle"];
  const TwoParticleScenario scenario =
      classical_momentum_constraint(tp[0].get<double>(), tp[1].get<double>(), tp[2].get<double>(), tp[3].get<double>());
  const double tp_dt = p["tp_dt"].get<double>();
  const TwoParticleRun run = simulate(scenario, tp_dt * static_cast<double>(p["tp_steps"].get<long>()), tp_dt);
  csv::Table two({"steps", "q1", "q2", "p1", "p2", "total_momentum_drift", "center_of_mass_drift",
                  "relative_velocity", "expected_relative_velocity"});
  two.row(std::vector<double>{static_cast<double>(run.steps), run.final_state(0), run.final_state(1),
                              run.final_state(2), run.final_state(3), run.max_total_momentum_drift,
                              run.max_center_of_mass_drift, run.relative_velocity, run.expected_relative_velocity});
  ctx.out.save(two, "two_particle.csv");
  ctx.check.below("total_momentum_drift", p["momentum_tol"].get<double>(), [&] { return run.max_total_momentum_drift; });
  ctx.check.below("center_of_mass_drift", p["cm_tol"].get<double>(), [&] { return run.max_center_of_mass_drift; });
  ctx.check.below("relative_velocity_error", p["cm_tol"].get<double>(), [&] {
    return std::abs(run.relative_velocity - run.expected_relative_velocity);
  });
}

}  // namespace timeless::harness
