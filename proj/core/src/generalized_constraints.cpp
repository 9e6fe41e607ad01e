#include "timeless/generalized_constraints.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "timeless/classical_liouville.hpp"
#include "timeless/error.hpp"

namespace timeless::constraints {

ComplexMatrix ConstraintSpec::total() const {
  return kron_sum(system_generator, clock_generator);
}

void ConstraintSpec::validate() const {
  require_hermitian(system_generator, ("system generator of " + label).c_str());
  require_hermitian(clock_generator, ("clock generator of " + label).c_str());
  if (!std::isfinite(target)) fail(ErrorCode::InvalidParameter, "constraint target must be finite");
}

ComplexMatrix cyclic_translation_generator(Eigen::Index d) {
  if (d < 2) {
    fail(ErrorCode::InvalidParameter, "ring needs at least 2 sites, got " + std::to_string(d));
  }
  const Eigen::Index k_min = -(d / 2);
  const Eigen::Index k_max = (d + 1) / 2 - 1;
  ComplexMatrix g = ComplexMatrix::Zero(d, d);
  for (Eigen::Index k = k_min; k <= k_max; ++k) {
    ComplexVector mode(d);
    for (Eigen::Index n = 0; n < d; ++n) {
      const Eigen::Index phase = ((k * n) % d + d) % d;
      mode(n) = std::polar(1.0 / std::sqrt(static_cast<double>(d)),
                           2.0 * std::numbers::pi * static_cast<double>(phase) /
                               static_cast<double>(d));
    }
    g += static_cast<double>(k) * mode * mode.adjoint();
  }
  return 0.5 * (g + g.adjoint());
}

ComplexMatrix cyclic_shift(Eigen::Index d) {
  if (d < 1) fail(ErrorCode::InvalidParameter, "shift needs d >= 1");
  ComplexMatrix s = ComplexMatrix::Zero(d, d);
  for (Eigen::Index n = 0; n < d; ++n) s((n + 1) % d, n) = 1.0;
  return s;
}

ComplexMatrix spin_z(double j) {
  const double twice = 2.0 * j;
  if (j < 0.0 || std::abs(twice - std::round(twice)) > 1e-12) {
    fail(ErrorCode::InvalidParameter, "spin must be a non-negative multiple of 1/2");
  }
  const auto dim = static_cast<Eigen::Index>(std::llround(twice)) + 1;
  ComplexMatrix sz = ComplexMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) sz(i, i) = j - static_cast<double>(i);
  return sz;
}

double constraint_residual(const ComplexVector& psi, const ConstraintSpec& spec) {
  const ComplexMatrix total = spec.total();
  if (psi.size() != total.rows()) {
    fail(ErrorCode::DimensionMismatch, "state does not live on the constraint's product space");
  }
  return (total * psi - spec.target * psi).norm();
}

std::vector<ConstraintState> build_constraint_state(const ConstraintSpec& spec, double tol) {
  return build_constraint_states({spec}, tol);
}

std::vector<ConstraintState> build_constraint_states(const std::vector<ConstraintSpec>& specs,
                                                     double tol) {
  if (specs.empty()) fail(ErrorCode::InvalidParameter, "need at least one constraint");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidParameter, "eigenvalue tolerance must be positive");
  std::vector<ComplexMatrix> totals;
  for (const ConstraintSpec& spec : specs) {
    spec.validate();
    if (spec.system_dim() != specs.front().system_dim() ||
        spec.clock_dim() != specs.front().clock_dim()) {
      fail(ErrorCode::DimensionMismatch, "constraints act on different product spaces");
    }
    totals.push_back(spec.total());
  }
  for (std::size_t a = 0; a < totals.size(); ++a) {
    for (std::size_t b = a + 1; b < totals.size(); ++b) {
      const double c = max_abs(commutator(totals[a], totals[b]));
      if (c > 1e-10) {
        fail(ErrorCode::NonCommuting, "constraints '" + specs[a].label + "' and '" +
                                          specs[b].label + "' do not commute (max |[A,B]| = " +
                                          std::to_string(c) + ")");
      }
    }
  }

  // Restrict each successive generator to the eigenspace found so far.
  ComplexMatrix basis = eigenspace(totals.front(), specs.front().target, tol);
  for (std::size_t i = 1; i < totals.size() && basis.cols() > 0; ++i) {
    const ComplexMatrix restricted = basis.adjoint() * totals[i] * basis;
    const ComplexMatrix inner = eigenspace(0.5 * (restricted + restricted.adjoint()),
                                           specs[i].target, tol);
    basis = basis * inner;
  }

  std::vector<ConstraintState> out;
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    out.push_back(ConstraintState{basis.col(c), specs});
  }
  return out;
}

double covariance_check(const ConstraintState& state, const ConstraintSpec& spec, double shift,
                        double precondition_tol) {
  const double violation = constraint_residual(state.psi, spec);
  if (violation > precondition_tol) {
    fail(ErrorCode::Precondition, "state violates constraint '" + spec.label + "' by " +
                                      std::to_string(violation));
  }
  const Eigen::Index ds = spec.system_dim();
  const Eigen::Index dc = spec.clock_dim();
  const ComplexMatrix forward = unitary_evolution(spec.system_generator, shift);
  const ComplexMatrix backward = unitary_evolution(spec.clock_generator, -shift);
  const ComplexVector lhs = kron(forward, ComplexMatrix::Identity(dc, dc)) * state.psi;
  const ComplexVector rhs = std::polar(1.0, -spec.target * shift) *
                            (kron(ComplexMatrix::Identity(ds, ds), backward) * state.psi);
  return (lhs - rhs).norm();
}

Readout relational_readout(const ComplexVector& psi, Eigen::Index d_system, Eigen::Index d_clock,
                           const ComplexMatrix& basis, pw::Subsystem reference) {
  if (psi.size() != d_system * d_clock) {
    fail(ErrorCode::DimensionMismatch, "state does not factor as d_system x d_clock");
  }
  const Eigen::Index d_ref = reference == pw::Subsystem::Clock ? d_clock : d_system;
  const Eigen::Index d_rest = reference == pw::Subsystem::Clock ? d_system : d_clock;
  if (basis.rows() != d_ref) {
    fail(ErrorCode::DimensionMismatch, "conditioning basis lives on the wrong subsystem");
  }
  const ComplexMatrix gram = basis.adjoint() * basis;
  if (max_abs(gram - ComplexMatrix::Identity(basis.cols(), basis.cols())) > 1e-10) {
    fail(ErrorCode::InvalidParameter, "conditioning basis is not orthonormal");
  }

  // Reshape psi(s * d_clock + c) into an d_system x d_clock matrix.
  ComplexMatrix amplitudes(d_system, d_clock);
  for (Eigen::Index s = 0; s < d_system; ++s) {
    amplitudes.row(s) = psi.segment(s * d_clock, d_clock).transpose();
  }

  Readout out;
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    ComplexVector branch(d_rest);
    if (reference == pw::Subsystem::Clock) {
      branch = amplitudes * basis.col(j).conjugate();
    } else {
      branch = amplitudes.transpose() * basis.col(j).conjugate();
    }
    const double probability = branch.squaredNorm();
    const auto outcome = static_cast<std::size_t>(j);
    if (probability < 1e-14) {
      out.empty_outcomes.push_back(outcome);
      continue;
    }
    out.branches.push_back(ReadoutBranch{outcome, probability, branch / std::sqrt(probability)});
  }
  return out;
}

Readout relational_readout(const ConstraintState& state, const ComplexMatrix& basis,
                           pw::Subsystem reference) {
  if (state.specs.empty()) fail(ErrorCode::InvalidParameter, "constraint state has no specs");
  const ConstraintSpec& spec = state.specs.front();
  return relational_readout(state.psi, spec.system_dim(), spec.clock_dim(), basis, reference);
}

TwoParticleScenario classical_momentum_constraint(double m1, double m2, double p1, double p_total,
                                                  double q1, double q2) {
  if (!(m1 > 0.0) || !(m2 > 0.0)) {
    fail(ErrorCode::InvalidParameter, "particle masses must be positive");
  }
  TwoParticleScenario s;
  s.m1 = m1;
  s.m2 = m2;
  s.p_total = p_total;
  s.field = compose(free_particle(m1), free_particle(m2));
  s.initial.resize(4);
  s.initial << q1, q2, p1, p_total - p1;
  return s;
}

TwoParticleRun simulate(const TwoParticleScenario& scenario, double t, double dt) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidParameter, "dt must be positive");
  TwoParticleRun run;
  run.steps = classical::step_count(t, dt);
  const double step = run.steps > 0 ? t / static_cast<double>(run.steps) : 0.0;
  const double total_mass = scenario.m1 + scenario.m2;
  auto center = [&](const PhaseSpacePoint& z) {
    return (scenario.m1 * z(0) + scenario.m2 * z(1)) / total_mass;
  };
  PhaseSpacePoint z = scenario.initial;
  const double cm0 = center(z);
  for (long i = 1; i <= run.steps; ++i) {
    classical::leapfrog_step(scenario.field, z, step);
    const double elapsed = step * static_cast<double>(i);
    run.max_total_momentum_drift =
        std::max(run.max_total_momentum_drift, std::abs(z(2) + z(3) - scenario.p_total));
    run.max_p1_drift = std::max(run.max_p1_drift, std::abs(z(2) - scenario.initial(2)));
    run.max_p2_drift = std::max(run.max_p2_drift, std::abs(z(3) - scenario.initial(3)));
    run.max_center_of_mass_drift =
        std::max(run.max_center_of_mass_drift,
                 std::abs(center(z) - cm0 - scenario.p_total * elapsed / total_mass));
  }
  run.expected_relative_velocity =
      scenario.initial(2) / scenario.m1 - scenario.initial(3) / scenario.m2;
  if (t != 0.0) {
    run.relative_velocity =
        ((z(0) - z(1)) - (scenario.initial(0) - scenario.initial(1))) / t;
  }
  run.final_state = z;
  return run;
}

}  // namespace timeless::constraints
