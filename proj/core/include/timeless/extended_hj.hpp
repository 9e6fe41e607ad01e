#pragma once

#include <optional>
#include <vector>

#include "timeless/phase_space.hpp"

namespace timeless::hj {

/// (q, p, t, p0) with t a dynamical coordinate and p0 its conjugate momentum.
struct ExtendedPhaseState {
  RealVector q;
  RealVector p;
  double t = 0.0;
  double p0 = 0.0;
};

/// Pack into unified coordinates of the extended field: (q, t, p, p0).
PhaseSpacePoint pack(const ExtendedPhaseState& x);
ExtendedPhaseState unpack(const PhaseSpacePoint& omega, int dof);

/// H(q, p) + p0 on the (2k + 2)-dimensional extended phase space.
HamiltonianField extend(const HamiltonianField& h);

/// H(q, p) + p0 evaluated at x; zero on the constraint surface.
double constraint_value(const HamiltonianField& h, const ExtendedPhaseState& x);

struct ExtendedTrajectory {
  /// Every `stride`-th state, both ends included.
  std::vector<ExtendedPhaseState> states;
  long steps = 0;
  double step = 0.0;
  /// max over steps of |(t_{n+1} - t_n) - step|.
  double max_clock_step_error = 0.0;
  /// |p0(end) - p0(start)|.
  double p0_drift = 0.0;
};

/// Leapfrog in the fictitious time tau under the extended field `ext`
/// (built by extend()). `dof` is the degrees of freedom of the original H.
ExtendedTrajectory extended_flow(const HamiltonianField& ext, const ExtendedPhaseState& x0,
                                 double tau, double dtau, long stride = 1);

/// max over every step of |(q, p)_extended - (q, p)_direct| when the extended
/// flow and flow_map of `h` are stepped side by side with the same step.
double reduction_deviation(const HamiltonianField& h, const ExtendedPhaseState& x0, double tau,
                           double dtau);

// ---------------------------------------------------------------------------
// Hamilton-Jacobi

enum class ActionMethod { Auto, Analytic, Quadrature };

/// Allowed q interval at energy E for the positive-momentum branch that
/// starts at q_ref = 0; nullopt when the energy admits no motion at all.
struct Interval {
  double lower;
  double upper;
};
std::optional<Interval> action_domain(const SystemId& system, double energy);

/// Abbreviated action S(q, E) = int_0^q sqrt(2m(E - V(q'))) dq'. Mirrored
/// systems use S(q, E) = S_base(q, -E).
double hj_action(const SystemId& system, double q, double energy,
                 ActionMethod method = ActionMethod::Auto);

/// Central difference (S(E + dE) - S(E - dE)) / (2 dE).
double hj_time_fd(const SystemId& system, double q, double energy, double energy_step,
                  ActionMethod method = ActionMethod::Auto);

/// dS/dE in closed form, where one exists (free particle, harmonic).
std::optional<double> hj_time_analytic(const SystemId& system, double q, double energy);

/// 1e-6 * max(|E|, 1).
double default_energy_step(double energy);

/// t = dS/dE. Returns the closed form where available, the central
/// difference otherwise, after cross-checking the two routes (for systems
/// without a closed form the second route is a quadrature of m / p).
/// Throws NumericalConsistency when they disagree by more than
/// `consistency_tol` relative to max(1, |t|).
double hj_time(const SystemId& system, double q, double energy, double energy_step,
               double consistency_tol = 1e-6);

/// Subsystem pair with H2 = -H1.
struct MirrorPair {
  SystemId first;
  SystemId second;
};
MirrorPair make_mirror_pair(const SystemId& system);
MirrorPair make_mirror_pair(const std::string& system_id);

struct TimeCorrelation {
  double t1 = 0.0;
  double t2 = 0.0;
  /// t1 + t2 at the shared reference configuration q1 = q2 = 0.
  double constant = 0.0;
  double residual = 0.0;
};

/// t1 = dS1/dE1 at (q1, E1), t2 = dS2/dE2 at (q2, -E1), residual
/// |t1 + t2 - c| with c calibrated at q_ref = 0.
TimeCorrelation time_correlation_check(const MirrorPair& pair, double q1, double q2, double e1,
                                       std::optional<double> energy_step = std::nullopt);

}  // namespace timeless::hj
