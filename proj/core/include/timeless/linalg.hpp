#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace timeless {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kNormTol = 1e-12;

/// Eigenvalues in ascending order; columns of `vectors` are orthonormal.
struct HermitianEigen {
  RealVector values;
  ComplexMatrix vectors;
};

double max_abs(const ComplexMatrix& m);

bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol);
bool is_unitary(const ComplexMatrix& m, double tol = kUnitaryTol);
bool is_normalized(const ComplexVector& v, double tol = kNormTol);

/// Throws NotHermitian (or DimensionMismatch for non-square input).
void require_hermitian(const ComplexMatrix& m, const char* what);

HermitianEigen hermitian_eigen(const ComplexMatrix& h);

/// exp(-i h t) for Hermitian h, through the spectral decomposition.
ComplexMatrix unitary_evolution(const HermitianEigen& eig, double t);
ComplexMatrix unitary_evolution(const ComplexMatrix& h, double t);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector kron(const ComplexVector& a, const ComplexVector& b);

/// A (x) I_right + I_left (x) B.
ComplexMatrix kron_sum(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// |<a|b>|^2 / (||a||^2 ||b||^2); insensitive to global phase.
double fidelity(const ComplexVector& a, const ComplexVector& b);

/// Shannon entropy of a spectrum; eigenvalues below 1e-15 contribute 0.
/// `base` 2 gives bits, e gives nats.
double spectral_entropy(const RealVector& eigenvalues, double base);

/// Orthonormal basis of the eigenspace of `h` whose eigenvalues lie within
/// `tol` of `target`. Columns of the returned matrix.
ComplexMatrix eigenspace(const ComplexMatrix& h, double target, double tol);

std::vector<ComplexVector> columns(const ComplexMatrix& m);

}  // namespace timeless
