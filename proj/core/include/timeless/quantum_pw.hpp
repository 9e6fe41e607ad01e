#pragma once

#include <vector>

#include "timeless/linalg.hpp"

namespace timeless::pw {

/// Finite cyclic clock: d orthonormal time states on a grid of spacing dt,
/// advanced one step by exp(-i H_c dt).
///
/// H_c is diagonal in the computational basis |i>. Basis index i carries the
/// frequency label n(i) = i for i <= d/2 and i - d above that, so the
/// spectrum sits symmetrically around zero. Since n(i) = i (mod d) the time
/// states |t_k> = d^{-1/2} sum_i exp(-i n(i) w k dt) |i> and the one-step
/// propagator are the same as with labels 0..d-1; the centred labels are
/// what lets a commensurate system spectrum pair up into an exact zero
/// eigenvalue of H_s + H_c.
struct ClockModel {
  Eigen::Index dim = 0;
  double dt = 0.0;
  ComplexMatrix hamiltonian;
  /// Column k is |t_k>.
  ComplexMatrix time_states;

  double period() const { return static_cast<double>(dim) * dt; }
  double frequency() const;
  ComplexVector time_state(Eigen::Index k) const { return time_states.col(k); }
};

/// Integer frequency label of clock basis index i.
long clock_label(Eigen::Index i, Eigen::Index dim);

ClockModel build_cyclic_clock(Eigen::Index d, double dt);

/// |Psi> = d^{-1/2} sum_k exp(-i H_s k dt)|phi0> (x) |t_k>, system factor first.
struct HistoryState {
  ComplexVector psi;
  ClockModel clock;
  Eigen::Index system_dim = 0;
};

HistoryState build_history_state(const ComplexMatrix& hs, const ComplexVector& phi0,
                                 const ClockModel& clock);

/// H_s (x) I + I (x) H_c for the history state's clock.
ComplexMatrix total_hamiltonian(const HistoryState& hs, const ComplexMatrix& h_system);

/// min_E ||(H_tot - E) psi||, attained at E = <psi|H_tot|psi>.
double stationarity_residual(const HistoryState& hs, const ComplexMatrix& h_system);

/// Normalized <t_k|Psi>.
ComplexVector condition_on_clock(const HistoryState& hs, Eigen::Index k);

/// Orthonormal basis of the (|eigenvalue| < tol) eigenspace of
/// H_s (x) I + I (x) H_c. An empty result is a valid answer.
std::vector<ComplexVector> kernel_constraint_states(const ComplexMatrix& h_system,
                                                    const ComplexMatrix& h_clock, double tol);

class DensityMatrix {
 public:
  /// Validates Hermiticity, unit trace and positivity.
  explicit DensityMatrix(ComplexMatrix mat);
  static DensityMatrix pure(const ComplexVector& psi);

  const ComplexMatrix& matrix() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }
  double trace() const { return mat_.trace().real(); }
  RealVector eigenvalues() const;

 private:
  ComplexMatrix mat_;
};

enum class Subsystem { System, Clock };

/// Trace out one factor of a (d_s * d_c)-dimensional state, system first.
DensityMatrix partial_trace(const DensityMatrix& rho, Eigen::Index d_system,
                            Eigen::Index d_clock, Subsystem keep);

double von_neumann_entropy(const DensityMatrix& rho, double base = 2.0);

struct VonNeumannResidual {
  double residual = 0.0;
  /// Set when ||H_s|| dt > 1; the finite difference no longer resolves H_s.
  bool under_resolved = false;
};

/// max-norm of (rho_{k+1} - rho_{k-1}) / (2 dt) + i [H_s, rho_k], where
/// rho_k is the projector onto the state conditioned on clock index k.
VonNeumannResidual von_neumann_residual(const HistoryState& hs, const ComplexMatrix& h_system,
                                        Eigen::Index k);

}  // namespace timeless::pw
