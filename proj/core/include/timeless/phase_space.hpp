#pragma once

#include <functional>
#include <string>
#include <vector>

#include "timeless/linalg.hpp"

namespace timeless {

/// Unified coordinates: the first k entries are positions, the next k the
/// conjugate momenta.
using PhaseSpacePoint = RealVector;

using ScalarFn = std::function<double(const PhaseSpacePoint&)>;
using VectorFn = std::function<RealVector(const RealVector&)>;

/// A differentiable function on a 2k-dimensional phase space. Hamiltonians,
/// observables and densities all use this shape.
///
/// When `kinetic_gradient` and `potential_gradient` are both set the field is
/// H = T(p) + V(q); the split is what the leapfrog integrator consumes.
struct HamiltonianField {
  std::string name;
  int dof = 1;
  ScalarFn evaluate;
  VectorFn gradient;
  /// dT/dp as a function of p alone.
  VectorFn kinetic_gradient;
  /// dV/dq as a function of q alone.
  VectorFn potential_gradient;

  bool separable() const { return kinetic_gradient && potential_gradient; }
  Eigen::Index dim() const { return 2 * dof; }
};

/// Throws unless z has length 2k with finite entries.
void require_phase_point(const PhaseSpacePoint& z, int dof);

/// epsilon = [[0, I], [-I, 0]] in unified coordinates.
struct SymplecticForm {
  RealMatrix epsilon;

  explicit SymplecticForm(int dof);
  int dof() const { return static_cast<int>(epsilon.rows() / 2); }
};

/// Canonical Poisson bracket {a, b} = grad(a)^T epsilon grad(b)
///   = sum_i (da/dq_i db/dp_i - da/dp_i db/dq_i).
double poisson_bracket(const HamiltonianField& a, const HamiltonianField& b,
                       const PhaseSpacePoint& z);

/// The Liouvillian action (tilde H) f at z: the rate of change of f along
/// the flow of H, {f, H}. tilde_apply(H, q) = dH/dp, tilde_apply(H, p) = -dH/dq.
double tilde_apply(const HamiltonianField& h, const HamiltonianField& f,
                   const PhaseSpacePoint& z);

/// dz/dt = epsilon grad H.
RealVector hamiltonian_vector_field(const HamiltonianField& h, const PhaseSpacePoint& z);

/// Central finite-difference gradient of an arbitrary scalar function.
RealVector numerical_gradient(const ScalarFn& f, const PhaseSpacePoint& z, double step);

/// Central finite-difference gradient of a function of (z, t) in z.
RealVector numerical_gradient(const std::function<double(const PhaseSpacePoint&, double)>& f,
                              const PhaseSpacePoint& z, double t, double step);

// Library systems. All take masses/frequencies in natural units.

HamiltonianField free_particle(double mass, int dof = 1);
HamiltonianField harmonic_oscillator(double mass, double omega, int dof = 1);
/// V(q) = lambda q^4 per degree of freedom.
HamiltonianField quartic_oscillator(double mass, double lambda, int dof = 1);
/// H' = -H, keeping the separable split.
HamiltonianField mirror(const HamiltonianField& h);
/// Sum of two independent fields on the concatenated phase space
/// (q_a, q_b, p_a, p_b).
HamiltonianField compose(const HamiltonianField& a, const HamiltonianField& b);

/// A generic differentiable observable with an analytic gradient.
HamiltonianField observable(std::string name, int dof, ScalarFn f, VectorFn grad);

/// Parsed form of a library-system id such as "harmonic(1,2)" or
/// "mirror(free_particle(1))".
struct SystemId {
  enum class Kind { FreeParticle, Harmonic, Quartic };
  Kind kind = Kind::FreeParticle;
  double mass = 1.0;
  double omega = 1.0;   // Harmonic only
  double lambda = 1.0;  // Quartic only
  bool mirrored = false;

  /// V(q) for one degree of freedom, with the mirror sign applied.
  double potential(double q) const;
  std::string to_string() const;
};

SystemId parse_system_id(const std::string& id);
HamiltonianField make_system(const SystemId& id, int dof = 1);
HamiltonianField make_system(const std::string& id, int dof = 1);

}  // namespace timeless
