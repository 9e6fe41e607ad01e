#include "timeless/linalg.hpp"

#include <cmath>
#include <string>

#include "timeless/error.hpp"

namespace timeless {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::DegenerateClock: return "degenerate-clock";
    case ErrorCode::NotHermitian: return "not-hermitian";
    case ErrorCode::OutOfRange: return "out-of-range";
    case ErrorCode::ZeroNorm: return "zero-norm";
    case ErrorCode::BoundaryIndex: return "boundary-index";
    case ErrorCode::NumericalDomain: return "numerical-domain";
    case ErrorCode::UnsupportedSystem: return "unsupported-system";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::NonOrthogonalClock: return "non-orthogonal-clock";
    case ErrorCode::NumericalConsistency: return "numerical-consistency";
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::EmptySupport: return "empty-support";
    case ErrorCode::NonCommuting: return "non-commuting";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) < tol;
}

bool is_unitary(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m.adjoint() * m - ComplexMatrix::Identity(m.rows(), m.cols())) < tol;
}

bool is_normalized(const ComplexVector& v, double tol) {
  return std::abs(v.norm() - 1.0) < tol;
}

void require_hermitian(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    fail(ErrorCode::DimensionMismatch, std::string(what) + " must be a non-empty square matrix");
  }
  if (!m.allFinite()) {
    fail(ErrorCode::NumericalDomain, std::string(what) + " has non-finite entries");
  }
  if (!is_hermitian(m)) {
    fail(ErrorCode::NotHermitian, std::string(what) + " is not Hermitian");
  }
}

HermitianEigen hermitian_eigen(const ComplexMatrix& h) {
  require_hermitian(h, "matrix");
  // Symmetrize so rounding-level anti-Hermitian parts never reach the solver.
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::NumericalDomain, "Hermitian eigendecomposition did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix unitary_evolution(const HermitianEigen& eig, double t) {
  const Eigen::Index n = eig.values.size();
  if (t == 0.0) return ComplexMatrix::Identity(n, n);
  ComplexVector phases(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phases(i) = std::polar(1.0, -eig.values(i) * t);
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

ComplexMatrix unitary_evolution(const ComplexMatrix& h, double t) {
  return unitary_evolution(hermitian_eigen(h), t);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a(i) * b;
  }
  return out;
}

ComplexMatrix kron_sum(const ComplexMatrix& a, const ComplexMatrix& b) {
  return kron(a, ComplexMatrix::Identity(b.rows(), b.cols())) +
         kron(ComplexMatrix::Identity(a.rows(), a.cols()), b);
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

double fidelity(const ComplexVector& a, const ComplexVector& b) {
  if (a.size() != b.size()) {
    fail(ErrorCode::DimensionMismatch, "fidelity: vector sizes differ");
  }
  const double na = a.squaredNorm();
  const double nb = b.squaredNorm();
  if (na == 0.0 || nb == 0.0) {
    fail(ErrorCode::ZeroNorm, "fidelity: zero vector");
  }
  return std::norm(a.dot(b)) / (na * nb);
}

double spectral_entropy(const RealVector& eigenvalues, double base) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double lambda = eigenvalues(i);
    if (lambda > 1e-15) s -= lambda * std::log(lambda);
  }
  return s / std::log(base);
}

ComplexMatrix eigenspace(const ComplexMatrix& h, double target, double tol) {
  const HermitianEigen eig = hermitian_eigen(h);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (std::abs(eig.values(i) - target) < tol) keep.push_back(i);
  }
  ComplexMatrix basis(h.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    basis.col(static_cast<Eigen::Index>(c)) = eig.vectors.col(keep[c]);
  }
  return basis;
}

std::vector<ComplexVector> columns(const ComplexMatrix& m) {
  std::vector<ComplexVector> out;
  out.reserve(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out.emplace_back(m.col(c));
  return out;
}

}  // namespace timeless
