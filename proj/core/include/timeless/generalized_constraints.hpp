#pragma once

#include <string>
#include <vector>

#include "timeless/linalg.hpp"
#include "timeless/phase_space.hpp"
#include "timeless/quantum_pw.hpp"

namespace timeless::constraints {

/// A pair of Hermitian generators whose sum on the product space should
/// take the eigenvalue `target`.
struct ConstraintSpec {
  ComplexMatrix system_generator;
  ComplexMatrix clock_generator;
  double target = 0.0;
  std::string label = "custom";

  Eigen::Index system_dim() const { return system_generator.rows(); }
  Eigen::Index clock_dim() const { return clock_generator.rows(); }
  /// G_s (x) I + I (x) G_c.
  ComplexMatrix total() const;
  void validate() const;
};

struct ConstraintState {
  ComplexVector psi;
  std::vector<ConstraintSpec> specs;
};

/// Momentum generator on a d-site ring. Its eigenvectors are the Fourier
/// states |k> = d^{-1/2} sum_n exp(2 pi i k n / d) |n> with integer k in
/// {-floor(d/2), ..., ceil(d/2) - 1}, so exp(-i G 2 pi / d) maps |n> to
/// |n + 1 mod d>.
ComplexMatrix cyclic_translation_generator(Eigen::Index d);

/// Permutation |n> -> |n + 1 mod d>.
ComplexMatrix cyclic_shift(Eigen::Index d);

/// S_z for spin j: diag(j, j - 1, ..., -j). j must be a non-negative
/// multiple of 1/2.
ComplexMatrix spin_z(double j);

/// ||(G_s (x) I + I (x) G_c - target) psi||.
double constraint_residual(const ComplexVector& psi, const ConstraintSpec& spec);

/// Orthonormal basis of the target eigenspace of the total generator,
/// within `tol`. Empty when no eigenvalue is close enough.
std::vector<ConstraintState> build_constraint_state(const ConstraintSpec& spec, double tol);

/// Simultaneous eigenspace of several constraints. The total generators
/// must commute pairwise; otherwise NonCommuting is thrown.
std::vector<ConstraintState> build_constraint_states(const std::vector<ConstraintSpec>& specs,
                                                     double tol);

/// ||(exp(-i G_s s) (x) I) psi - exp(-i target s) (I (x) exp(i G_c s)) psi||.
/// Throws Precondition if psi violates the constraint by more than
/// `precondition_tol`.
double covariance_check(const ConstraintState& state, const ConstraintSpec& spec, double shift,
                        double precondition_tol = 1e-10);

struct ReadoutBranch {
  std::size_t outcome = 0;
  double probability = 0.0;
  ComplexVector state;
};

struct Readout {
  std::vector<ReadoutBranch> branches;
  /// Outcomes whose conditional branch had (numerically) zero probability.
  std::vector<std::size_t> empty_outcomes;
};

/// Condition `psi` (on d_system * d_clock, system first) on each column of
/// `basis`, taken on the `reference` factor. Columns must be orthonormal.
Readout relational_readout(const ComplexVector& psi, Eigen::Index d_system, Eigen::Index d_clock,
                           const ComplexMatrix& basis, pw::Subsystem reference);
Readout relational_readout(const ConstraintState& state, const ComplexMatrix& basis,
                           pw::Subsystem reference);

// ---------------------------------------------------------------------------
// Classical two-particle momentum constraint

struct TwoParticleScenario {
  double m1 = 1.0;
  double m2 = 1.0;
  double p_total = 0.0;
  HamiltonianField field;
  /// (q1, q2, p1, p2)
  PhaseSpacePoint initial;
};

/// Free particles with p2 = p_total - p1 enforced at construction.
TwoParticleScenario classical_momentum_constraint(double m1, double m2, double p1,
                                                  double p_total = 0.0, double q1 = 0.0,
                                                  double q2 = 0.0);

struct TwoParticleRun {
  long steps = 0;
  double max_total_momentum_drift = 0.0;
  double max_p1_drift = 0.0;
  double max_p2_drift = 0.0;
  /// max |Q_cm(t) - Q_cm(0) - p_total t / (m1 + m2)|.
  double max_center_of_mass_drift = 0.0;
  double relative_velocity = 0.0;
  double expected_relative_velocity = 0.0;
  PhaseSpacePoint final_state;
};

TwoParticleRun simulate(const TwoParticleScenario& scenario, double t, double dt);

}  // namespace timeless::constraints
