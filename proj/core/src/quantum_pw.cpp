#include "timeless/quantum_pw.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "timeless/error.hpp"

namespace timeless::pw {

namespace {

void require_system_dims(const HistoryState& hs, const ComplexMatrix& h_system) {
  if (h_system.rows() != hs.system_dim || h_system.cols() != hs.system_dim) {
    fail(ErrorCode::DimensionMismatch,
         "system Hamiltonian is " + std::to_string(h_system.rows()) + "x" +
             std::to_string(h_system.cols()) + ", history state has d_s = " +
             std::to_string(hs.system_dim));
  }
}

ComplexMatrix projector(const ComplexVector& v) { return v * v.adjoint(); }

}  // namespace

double ClockModel::frequency() const {
  return 2.0 * std::numbers::pi / period();
}

long clock_label(Eigen::Index i, Eigen::Index dim) {
  return i <= dim / 2 ? static_cast<long>(i) : static_cast<long>(i - dim);
}

ClockModel build_cyclic_clock(Eigen::Index d, double dt) {
  if (d < 2) {
    fail(ErrorCode::DegenerateClock,
         "clock needs at least 2 states, got d = " + std::to_string(d));
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    fail(ErrorCode::InvalidParameter, "clock spacing dt must be positive and finite");
  }
  ClockModel clock;
  clock.dim = d;
  clock.dt = dt;
  const double omega = clock.frequency();

  clock.hamiltonian = ComplexMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    clock.hamiltonian(i, i) = static_cast<double>(clock_label(i, d)) * omega;
  }

  // The phase uses the index i directly: exp(-2 pi i i k / d) is exact to
  // rounding, and matches the centred label modulo 2 pi.
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  clock.time_states.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto phase_index = (i * k) % d;
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(phase_index) /
                           static_cast<double>(d);
      clock.time_states(i, k) = std::polar(norm, angle);
    }
  }
  return clock;
}

HistoryState build_history_state(const ComplexMatrix& hs, const ComplexVector& phi0,
                                 const ClockModel& clock) {
  require_hermitian(hs, "system Hamiltonian");
  if (phi0.size() != hs.rows()) {
    fail(ErrorCode::DimensionMismatch, "initial state dimension does not match H_s");
  }
  if (!is_normalized(phi0)) {
    fail(ErrorCode::InvalidParameter, "initial system state is not normalized");
  }
  if (clock.time_states.rows() != clock.dim || clock.time_states.cols() != clock.dim) {
    fail(ErrorCode::DimensionMismatch, "clock model is malformed");
  }

  const HermitianEigen eig = hermitian_eigen(hs);
  const ComplexVector phi0_eigen = eig.vectors.adjoint() * phi0;
  const Eigen::Index ds = hs.rows();
  const Eigen::Index d = clock.dim;
  const double weight = 1.0 / std::sqrt(static_cast<double>(d));

  HistoryState out;
  out.clock = clock;
  out.system_dim = ds;
  out.psi = ComplexVector::Zero(ds * d);
  ComplexVector phase_evolved(ds);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double t = static_cast<double>(k) * clock.dt;
    for (Eigen::Index j = 0; j < ds; ++j) {
      phase_evolved(j) = std::polar(1.0, -eig.values(j) * t) * phi0_eigen(j);
    }
    const ComplexVector phi_k = eig.vectors * phase_evolved;
    out.psi += weight * kron(phi_k, ComplexVector(clock.time_states.col(k)));
  }
  // Orthonormal time states make this a no-op up to rounding.
  out.psi /= out.psi.norm();
  return out;
}

ComplexMatrix total_hamiltonian(const HistoryState& hs, const ComplexMatrix& h_system) {
  require_system_dims(hs, h_system);
  return kron_sum(h_system, hs.clock.hamiltonian);
}

double stationarity_residual(const HistoryState& hs, const ComplexMatrix& h_system) {
  const ComplexMatrix h_total = total_hamiltonian(hs, h_system);
  if (h_total.rows() != hs.psi.size()) {
    fail(ErrorCode::DimensionMismatch, "history state size does not match d_s * d");
  }
  const ComplexVector h_psi = h_total * hs.psi;
  const double energy = hs.psi.dot(h_psi).real() / hs.psi.squaredNorm();
  return (h_psi - energy * hs.psi).norm();
}

ComplexVector condition_on_clock(const HistoryState& hs, Eigen::Index k) {
  const Eigen::Index d = hs.clock.dim;
  if (k < 0 || k >= d) {
    fail(ErrorCode::OutOfRange,
         "clock index " + std::to_string(k) + " outside [0, " + std::to_string(d) + ")");
  }
  if (hs.psi.size() != hs.system_dim * d) {
    fail(ErrorCode::DimensionMismatch, "history state size does not match d_s * d");
  }
  const ComplexVector tk = hs.clock.time_states.col(k);
  ComplexVector out(hs.system_dim);
  for (Eigen::Index s = 0; s < hs.system_dim; ++s) {
    out(s) = tk.dot(hs.psi.segment(s * d, d));
  }
  const double norm = out.norm();
  if (norm < 1e-12) {
    fail(ErrorCode::ZeroNorm, "conditional state at clock index " + std::to_string(k) +
                                  " vanishes; clock states are mismatched or not orthogonal");
  }
  return out / norm;
}

std::vector<ComplexVector> kernel_constraint_states(const ComplexMatrix& h_system,
                                                    const ComplexMatrix& h_clock, double tol) {
  require_hermitian(h_system, "system Hamiltonian");
  require_hermitian(h_clock, "clock Hamiltonian");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidParameter, "kernel tolerance must be positive");
  return columns(eigenspace(kron_sum(h_system, h_clock), 0.0, tol));
}

DensityMatrix::DensityMatrix(ComplexMatrix mat) : mat_(std::move(mat)) {
  require_hermitian(mat_, "density matrix");
  if (std::abs(trace() - 1.0) > 1e-12) {
    fail(ErrorCode::InvalidParameter,
         "density matrix trace is " + std::to_string(trace()) + ", expected 1");
  }
  if (eigenvalues().minCoeff() < -1e-10) {
    fail(ErrorCode::InvalidParameter, "density matrix is not positive semidefinite");
  }
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  const double norm = psi.norm();
  if (norm == 0.0) fail(ErrorCode::ZeroNorm, "cannot build a projector from the zero vector");
  const ComplexVector unit = psi / norm;
  return DensityMatrix(projector(unit));
}

RealVector DensityMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (mat_ + mat_.adjoint()),
                                                      Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

DensityMatrix partial_trace(const DensityMatrix& rho, Eigen::Index d_system, Eigen::Index d_clock,
                            Subsystem keep) {
  if (d_system < 1 || d_clock < 1 || rho.dim() != d_system * d_clock) {
    fail(ErrorCode::DimensionMismatch, "density matrix of size " + std::to_string(rho.dim()) +
                                           " does not factor as " + std::to_string(d_system) +
                                           " x " + std::to_string(d_clock));
  }
  const ComplexMatrix& m = rho.matrix();
  ComplexMatrix out;
  if (keep == Subsystem::System) {
    out = ComplexMatrix::Zero(d_system, d_system);
    for (Eigen::Index a = 0; a < d_system; ++a) {
      for (Eigen::Index b = 0; b < d_system; ++b) {
        out(a, b) = m.block(a * d_clock, b * d_clock, d_clock, d_clock).trace();
      }
    }
  } else {
    out = ComplexMatrix::Zero(d_clock, d_clock);
    for (Eigen::Index s = 0; s < d_system; ++s) {
      out += m.block(s * d_clock, s * d_clock, d_clock, d_clock);
    }
  }
  // Remove the rounding-level asymmetry the block sums accumulate.
  return DensityMatrix(0.5 * (out + out.adjoint()));
}

double von_neumann_entropy(const DensityMatrix& rho, double base) {
  return spectral_entropy(rho.eigenvalues(), base);
}

VonNeumannResidual von_neumann_residual(const HistoryState& hs, const ComplexMatrix& h_system,
                                        Eigen::Index k) {
  require_system_dims(hs, h_system);
  const Eigen::Index d = hs.clock.dim;
  if (k < 1 || k > d - 2) {
    fail(ErrorCode::BoundaryIndex, "central difference needs 1 <= k <= d - 2, got k = " +
                                       std::to_string(k));
  }
  const double dt = hs.clock.dt;
  const ComplexMatrix before = projector(condition_on_clock(hs, k - 1));
  const ComplexMatrix here = projector(condition_on_clock(hs, k));
  const ComplexMatrix after = projector(condition_on_clock(hs, k + 1));

  const ComplexMatrix derivative = (after - before) / (2.0 * dt);
  const ComplexMatrix generator = Complex(0.0, -1.0) * commutator(h_system, here);

  VonNeumannResidual out;
  out.residual = max_abs(derivative - generator);
  const double op_norm = hermitian_eigen(h_system).values.cwiseAbs().maxCoeff();
  out.under_resolved = op_norm * dt > 1.0;
  return out;
}

}  // namespace timeless::pw
