#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "timeless/error.hpp"
#include "timeless/quantum_pw.hpp"
#include "timeless/random.hpp"

namespace {

using namespace timeless;
using namespace timeless::pw;
constexpr double kPi = std::numbers::pi;

ComplexVector plus_state() {
  ComplexVector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

ComplexMatrix diag2(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected timeless::Error";
  return ErrorCode::Config;
}

TEST(CyclicClock, TwoStateClockIsTheHadamardBasis) {
  const ClockModel clock = build_cyclic_clock(2, 1.0);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(clock.time_states(0, 0) - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(clock.time_states(1, 0) - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(clock.time_states(0, 1) - r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(clock.time_states(1, 1) + r), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(clock.hamiltonian(0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(clock.hamiltonian(1, 1) - kPi), 0.0, 1e-15);
}

TEST(CyclicClock, TimeStatesAreOrthonormal) {
  const ClockModel clock = build_cyclic_clock(8, 0.5);
  const ComplexMatrix gram = clock.time_states.adjoint() * clock.time_states;
  double off = 0.0;
  for (int j = 0; j < 8; ++j) {
    EXPECT_NEAR(std::abs(gram(j, j) - 1.0), 0.0, 1e-12);
    for (int k = 0; k < 8; ++k) {
      if (j != k) off = std::max(off, std::abs(gram(j, k)));
    }
  }
  EXPECT_LT(off, 1e-12);
}

TEST(CyclicClock, MatchesFourierDefinitionAndStepsCyclically) {
  for (int d : {2, 3, 8, 13}) {
    const double dt = 0.37;
    const ClockModel clock = build_cyclic_clock(d, dt);
    EXPECT_LT(max_abs(clock.time_states - oracle::fourier_time_states(d, dt)), 1e-12) << d;
    const ComplexMatrix step = oracle::propagator(clock.hamiltonian, dt);
    for (int k = 0; k < d; ++k) {
      const ComplexVector next = step * clock.time_states.col(k);
      EXPECT_LT((next - clock.time_states.col((k + 1) % d)).norm(), 1e-10) << d << " " << k;
    }
  }
}

TEST(CyclicClock, RejectsDegenerateOrInvalidParameters) {
  EXPECT_EQ(error_code_of([] { build_cyclic_clock(1, 1.0); }), ErrorCode::DegenerateClock);
  EXPECT_EQ(error_code_of([] { build_cyclic_clock(4, 0.0); }), ErrorCode::InvalidParameter);
  EXPECT_EQ(error_code_of([] { build_cyclic_clock(4, -1.0); }), ErrorCode::InvalidParameter);
}

TEST(HistoryState, TrivialSystemFactorizes) {
  const ClockModel clock = build_cyclic_clock(6, 0.3);
  Rng rng(7);
  const ComplexVector phi0 = rng.unit_vector(3);
  const HistoryState hs = build_history_state(ComplexMatrix::Zero(3, 3), phi0, clock);
  const ComplexVector uniform = clock.time_states.rowwise().sum() / std::sqrt(6.0);
  EXPECT_LT((hs.psi - kron(phi0, uniform)).norm(), 1e-12);
  EXPECT_NEAR(hs.psi.norm(), 1.0, 1e-12);
}

TEST(HistoryState, AgreesWithPadePropagatorConstruction) {
  const ClockModel clock = build_cyclic_clock(8, 0.5);
  Rng rng(11);
  const ComplexMatrix h = rng.hermitian(3);
  const ComplexVector phi0 = rng.unit_vector(3);
  ComplexVector expected = ComplexVector::Zero(24);
  for (int k = 0; k < 8; ++k) {
    const ComplexVector phi_k = oracle::propagator(h, k * 0.5) * phi0;
    expected += kron(phi_k, ComplexVector(clock.time_states.col(k))) / std::sqrt(8.0);
  }
  const HistoryState hs = build_history_state(h, phi0, clock);
  EXPECT_LT((hs.psi - expected).norm(), 1e-12);
}

TEST(HistoryState, CommensurateQubitIsStationary) {
  const int d = 8;
  const double dt = 0.5;
  const double wc = 2.0 * kPi / (d * dt);
  for (int m : {-4, -1, 1, 2, 3}) {
    const ComplexMatrix h = diag2(0.0, m * wc);
    const HistoryState hs = build_history_state(h, plus_state(), build_cyclic_clock(d, dt));
    // Direct check: H_tot psi = E psi with E from the Rayleigh quotient.
    const ComplexMatrix total = kron_sum(h, hs.clock.hamiltonian);
    const ComplexVector h_psi = total * hs.psi;
    const Complex e = hs.psi.dot(h_psi);
    EXPECT_LT((h_psi - e * hs.psi).norm(), 1e-10) << m;
    EXPECT_LT(stationarity_residual(hs, h), 1e-10) << m;
  }
}

TEST(HistoryState, RejectsBadInputs) {
  const ClockModel clock = build_cyclic_clock(4, 1.0);
  ComplexVector unnormalized(2);
  unnormalized << 1.0, 1.0;
  EXPECT_EQ(error_code_of([&] { build_history_state(diag2(0, 1), unnormalized, clock); }),
            ErrorCode::InvalidParameter);
  ComplexMatrix skew = diag2(0, 1);
  skew(0, 1) = 1.0;
  EXPECT_EQ(error_code_of([&] { build_history_state(skew, plus_state(), clock); }),
            ErrorCode::NotHermitian);
  EXPECT_EQ(error_code_of([&] {
              build_history_state(ComplexMatrix::Zero(3, 3), plus_state(), clock);
            }),
            ErrorCode::DimensionMismatch);
}

TEST(StationarityResidual, ZeroForIdleSystemAndLargeForIncommensurate) {
  const HistoryState idle =
      build_history_state(ComplexMatrix::Zero(2, 2), plus_state(), build_cyclic_clock(4, 1.0));
  EXPECT_LT(stationarity_residual(idle, ComplexMatrix::Zero(2, 2)), 1e-12);

  const ComplexMatrix h = diag2(0.0, 1.0);
  const HistoryState hs = build_history_state(h, plus_state(), build_cyclic_clock(8, 0.5));
  EXPECT_GT(stationarity_residual(hs, h), 1e-3);
  EXPECT_EQ(error_code_of([&] { stationarity_residual(hs, ComplexMatrix::Zero(3, 3)); }),
            ErrorCode::DimensionMismatch);
}

TEST(StationarityResidual, InvariantUnderEnergyOffset) {
  const int d = 8;
  const double dt = 0.5;
  const double wc = 2.0 * kPi / (d * dt);
  // Shifting H_s by a multiple of the clock frequency keeps the state an
  // eigenstate; only the eigenvalue moves.
  const ComplexMatrix h = diag2(0.0, wc) + 2.0 * wc * ComplexMatrix::Identity(2, 2);
  const HistoryState hs = build_history_state(h, plus_state(), build_cyclic_clock(d, dt));
  EXPECT_LT(stationarity_residual(hs, h), 1e-10);
}

TEST(ConditionOnClock, ReferenceIndexReturnsInitialState) {
  Rng rng(3);
  const ComplexMatrix h = rng.hermitian(3);
  const ComplexVector phi0 = rng.unit_vector(3);
  const HistoryState hs = build_history_state(h, phi0, build_cyclic_clock(5, 0.2));
  EXPECT_GT(fidelity(condition_on_clock(hs, 0), phi0), 1.0 - 1e-12);
}

TEST(ConditionOnClock, HalfPeriodMatchesClosedFormPrecession) {
  const int d = 8;
  const double dt = 0.5;
  const double omega = 2.0 * kPi / (d * dt);
  const ComplexMatrix h = 0.5 * omega * oracle::pauli_z();
  const HistoryState hs = build_history_state(h, plus_state(), build_cyclic_clock(d, dt));
  for (int k = 0; k < d; ++k) {
    const ComplexVector expected = oracle::precessed_qubit(plus_state(), omega, k * dt);
    EXPECT_GT(oracle::overlap_fidelity(condition_on_clock(hs, k), expected), 1.0 - 1e-10) << k;
  }
  EXPECT_EQ(error_code_of([&] { condition_on_clock(hs, d); }), ErrorCode::OutOfRange);
  EXPECT_EQ(error_code_of([&] { condition_on_clock(hs, -1); }), ErrorCode::OutOfRange);
}

TEST(ConditionOnClock, ZeroConditionalIsReported) {
  HistoryState hs = build_history_state(ComplexMatrix::Zero(2, 2), plus_state(),
                                        build_cyclic_clock(4, 1.0));
  // Replace the state with one that has no support on |t_2>.
  hs.psi = kron(plus_state(), ComplexVector(hs.clock.time_states.col(0)));
  EXPECT_EQ(error_code_of([&] { condition_on_clock(hs, 2); }), ErrorCode::ZeroNorm);
}

TEST(KernelConstraintStates, MirroredSpectra) {
  auto kernel = kernel_constraint_states(diag2(0, 1), diag2(0, -1), 1e-8);
  ASSERT_EQ(kernel.size(), 2u);
  // Projector onto the kernel must be |00><00| + |11><11|.
  ComplexMatrix p = ComplexMatrix::Zero(4, 4);
  for (const auto& v : kernel) p += v * v.adjoint();
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected(0, 0) = 1.0;
  expected(3, 3) = 1.0;
  EXPECT_LT(max_abs(p - expected), 1e-12);

  EXPECT_EQ(kernel_constraint_states(oracle::pauli_z(), -oracle::pauli_z(), 1e-8).size(), 2u);
  // 0 + 0 is still a zero sum: only |00> survives.
  const auto single = kernel_constraint_states(diag2(0, 1), diag2(0, -0.5), 1e-8);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_NEAR(std::abs(single[0](0)), 1.0, 1e-12);
  EXPECT_TRUE(kernel_constraint_states(diag2(1, 2), diag2(0.5, -0.5 + 1e-3), 1e-8).empty());
}

TEST(KernelConstraintStates, StatesAreOrthonormalAndAnnihilated) {
  const ClockModel clock = build_cyclic_clock(8, 0.5);
  const double wc = clock.frequency();
  const ComplexMatrix h = diag2(0.0, wc);
  const auto kernel = kernel_constraint_states(h, clock.hamiltonian, 1e-8);
  ASSERT_FALSE(kernel.empty());
  const ComplexMatrix total = kron_sum(h, clock.hamiltonian);
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    EXPECT_LT((total * kernel[i]).norm(), 1e-10);
    for (std::size_t j = 0; j < kernel.size(); ++j) {
      EXPECT_NEAR(std::abs(kernel[i].dot(kernel[j])), i == j ? 1.0 : 0.0, 1e-12);
    }
  }
  ComplexMatrix skew = diag2(0, 1);
  skew(1, 0) = 2.0;
  EXPECT_EQ(error_code_of([&] { kernel_constraint_states(skew, diag2(0, 1), 1e-8); }),
            ErrorCode::NotHermitian);
}

TEST(PartialTrace, ProductStateReturnsFactor) {
  Rng rng(5);
  const ComplexVector a = rng.unit_vector(3);
  const ComplexVector b = rng.unit_vector(4);
  const ComplexVector c = rng.unit_vector(4);
  const ComplexMatrix rho_s = a * a.adjoint();
  const ComplexMatrix rho_c = 0.3 * b * b.adjoint() + 0.7 * c * c.adjoint();
  const DensityMatrix joint(kron(rho_s, rho_c));
  EXPECT_LT(max_abs(partial_trace(joint, 3, 4, Subsystem::System).matrix() - rho_s), 1e-12);
  EXPECT_LT(max_abs(partial_trace(joint, 3, 4, Subsystem::Clock).matrix() - rho_c), 1e-12);
}

TEST(PartialTrace, BellStateIsMaximallyMixed) {
  ComplexVector bell = ComplexVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const DensityMatrix reduced =
      partial_trace(DensityMatrix::pure(bell), 2, 2, Subsystem::System);
  EXPECT_LT(max_abs(reduced.matrix() - 0.5 * ComplexMatrix::Identity(2, 2)), 1e-12);
  EXPECT_NEAR(von_neumann_entropy(reduced), 1.0, 1e-12);
}

TEST(PartialTrace, HistoryStateGivesTimeAveragedMixture) {
  Rng rng(9);
  const ComplexMatrix h = rng.hermitian(2);
  const ComplexVector phi0 = rng.unit_vector(2);
  const int d = 6;
  const double dt = 0.4;
  const HistoryState hs = build_history_state(h, phi0, build_cyclic_clock(d, dt));
  ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
  for (int k = 0; k < d; ++k) {
    const ComplexVector phi = oracle::propagator(h, k * dt) * phi0;
    expected += phi * phi.adjoint() / double(d);
  }
  const DensityMatrix reduced =
      partial_trace(DensityMatrix::pure(hs.psi), 2, d, Subsystem::System);
  EXPECT_LT(max_abs(reduced.matrix() - expected), 1e-12);
  EXPECT_EQ(error_code_of([&] { partial_trace(DensityMatrix::pure(hs.psi), 5, 3, Subsystem::System); }),
            ErrorCode::DimensionMismatch);
}

TEST(VonNeumannResidual, VanishesForIdleSystem) {
  const HistoryState hs =
      build_history_state(ComplexMatrix::Zero(2, 2), plus_state(), build_cyclic_clock(8, 0.5));
  EXPECT_LT(von_neumann_residual(hs, ComplexMatrix::Zero(2, 2), 3).residual, 1e-12);
}

TEST(VonNeumannResidual, SecondOrderInClockSpacing) {
  const double omega = 1.0;
  const ComplexMatrix h = 0.5 * omega * oracle::pauli_x();
  ComplexVector up = ComplexVector::Zero(2);
  up(0) = 1.0;
  const double t = 0.8;
  double previous = 0.0;
  for (int level = 0; level < 4; ++level) {
    const double dt = 0.1 / std::pow(2.0, level);
    const int d = 16 << level;
    const auto k = static_cast<Eigen::Index>(std::llround(t / dt));
    const HistoryState hs = build_history_state(h, up, build_cyclic_clock(d, dt));
    const double r = von_neumann_residual(hs, h, k).residual;
    if (level > 0) {
      EXPECT_GT(previous / r, 3.5) << level;
      EXPECT_LT(previous / r, 4.5) << level;
    }
    previous = r;
  }
}

TEST(VonNeumannResidual, BoundaryAndResolutionDiagnostics) {
  const ComplexMatrix h = 2.0 * oracle::pauli_z();
  const HistoryState hs = build_history_state(h, plus_state(), build_cyclic_clock(8, 0.75));
  EXPECT_EQ(error_code_of([&] { von_neumann_residual(hs, h, 0); }), ErrorCode::BoundaryIndex);
  EXPECT_EQ(error_code_of([&] { von_neumann_residual(hs, h, 7); }), ErrorCode::BoundaryIndex);
  EXPECT_TRUE(von_neumann_residual(hs, h, 3).under_resolved);
  const HistoryState fine = build_history_state(h, plus_state(), build_cyclic_clock(8, 0.1));
  EXPECT_FALSE(von_neumann_residual(fine, h, 3).under_resolved);
}

// ---------------------------------------------------------------------------
// Properties

TEST(QuantumPwProperty, ClockCovariance) {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ds = static_cast<Eigen::Index>(rng.integer(2, 5));
    const auto d = static_cast<Eigen::Index>(rng.integer(3, 16));
    const double dt = rng.uniform(0.05, 0.6);
    const ComplexMatrix h = rng.hermitian(ds);
    const HistoryState hs = build_history_state(h, rng.unit_vector(ds), build_cyclic_clock(d, dt));
    const ComplexMatrix step = oracle::propagator(h, dt);
    for (Eigen::Index k = 0; k + 1 < d; ++k) {
      const double f = fidelity(condition_on_clock(hs, k + 1), step * condition_on_clock(hs, k));
      EXPECT_GT(f, 1.0 - 1e-10) << trial << " " << k;
    }
  }
}

TEST(QuantumPwProperty, CommensurateSpectraGiveStationaryStates) {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto d = static_cast<Eigen::Index>(4 << rng.integer(0, 3));
    const double dt = rng.uniform(0.1, 1.0);
    const auto ds = static_cast<Eigen::Index>(rng.integer(2, 4));
    const ClockModel clock = build_cyclic_clock(d, dt);
    // Integer frequencies within the band the clock can absorb.
    RealVector levels(ds);
    const long lo = -static_cast<long>(d / 2);
    const long hi = static_cast<long>((d + 1) / 2 - 1);
    for (Eigen::Index j = 0; j < ds; ++j) {
      levels(j) = static_cast<double>(rng.integer(lo, hi)) * clock.frequency();
    }
    // Rotate into a random basis so H_s is not diagonal.
    const HermitianEigen basis = hermitian_eigen(rng.hermitian(ds));
    const ComplexMatrix h = basis.vectors * levels.cast<Complex>().asDiagonal() *
                            basis.vectors.adjoint();
    const HistoryState hs = build_history_state(h, rng.unit_vector(ds), clock);
    EXPECT_LT(stationarity_residual(hs, h), 1e-10) << trial;
  }
}

TEST(QuantumPwProperty, PureGlobalStateWithMixedReducedState) {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const auto d = static_cast<Eigen::Index>(rng.integer(2, 12));
    const ComplexMatrix h = rng.hermitian(2);
    const HistoryState hs = build_history_state(h, rng.unit_vector(2), build_cyclic_clock(d, 0.7));
    const DensityMatrix global = DensityMatrix::pure(hs.psi);
    EXPECT_LT(von_neumann_entropy(global), 1e-10);
    const DensityMatrix reduced = partial_trace(global, 2, d, Subsystem::System);
    EXPECT_NEAR(reduced.trace(), 1.0, 1e-12);
    // Conditional states differ, so the time average is mixed.
    EXPECT_GT(von_neumann_entropy(reduced), 0.0) << trial;
    EXPECT_NEAR(partial_trace(global, 2, d, Subsystem::Clock).trace(), 1.0, 1e-12);
  }
}

TEST(QuantumPwProperty, PartialTraceKeepsUnitTrace) {
  Rng rng(4);
  for (int trial = 0; trial < 25; ++trial) {
    const auto ds = static_cast<Eigen::Index>(rng.integer(1, 5));
    const auto dc = static_cast<Eigen::Index>(rng.integer(1, 5));
    // Random mixed state: normalized Gram of a random matrix.
    ComplexMatrix a(ds * dc, ds * dc);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = Complex(rng.normal(), rng.normal());
    ComplexMatrix rho = a * a.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint());
    const DensityMatrix state(rho);
    EXPECT_NEAR(partial_trace(state, ds, dc, Subsystem::System).trace(), 1.0, 1e-12);
    EXPECT_NEAR(partial_trace(state, ds, dc, Subsystem::Clock).trace(), 1.0, 1e-12);
  }
}

}  // namespace
