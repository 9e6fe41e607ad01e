#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "timeless/classical_liouville.hpp"
#include "timeless/error.hpp"

namespace {

using namespace timeless;
using namespace timeless::classical;
constexpr double kPi = std::numbers::pi;

PhaseSpacePoint point(double q, double p) {
  PhaseSpacePoint z(2);
  z << q, p;
  return z;
}

BoundingBox box2(double lo, double hi) {
  BoundingBox b;
  b.lower = RealVector::Constant(2, lo);
  b.upper = RealVector::Constant(2, hi);
  return b;
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

HamiltonianField coordinate_q() {
  return observable("q", 1, [](const PhaseSpacePoint& z) { return z(0); },
                    [](const RealVector&) { return point(1.0, 0.0); });
}

HamiltonianField coordinate_p() {
  return observable("p", 1, [](const PhaseSpacePoint& z) { return z(1); },
                    [](const RealVector&) { return point(0.0, 1.0); });
}

HamiltonianField radius_squared() {
  return observable("q^2+p^2", 1, [](const PhaseSpacePoint& z) { return z.squaredNorm(); },
                    [](const RealVector& z) -> RealVector { return 2.0 * z; });
}

/// (q, p) -> (q cos t + p sin t, -q sin t + p cos t), the exact m = w = 1 flow.
PhaseSpacePoint rotated(const PhaseSpacePoint& z, double t) {
  return point(z(0) * std::cos(t) + z(1) * std::sin(t), -z(0) * std::sin(t) + z(1) * std::cos(t));
}

// ---------------------------------------------------------------------------

TEST(SymplecticForm, IsAntisymmetricAndSquaresToMinusIdentity) {
  for (int k : {1, 2, 3}) {
    const SymplecticForm form(k);
    EXPECT_TRUE(form.epsilon.isApprox(-form.epsilon.transpose(), 0.0));
    EXPECT_EQ(form.epsilon * form.epsilon, -RealMatrix::Identity(2 * k, 2 * k));
  }
}

TEST(HamiltonianField, AnalyticGradientsMatchFiniteDifferences) {
  Rng rng(1);
  for (const char* id : {"free_particle(2)", "harmonic(1.5,0.7)", "quartic(1,0.25)",
                         "mirror(harmonic(1,1))"}) {
    const HamiltonianField h = make_system(id);
    for (int i = 0; i < 50; ++i) {
      const PhaseSpacePoint z = point(rng.uniform(-3, 3), rng.uniform(-3, 3));
      const RealVector exact = h.gradient(z);
      const RealVector approx = numerical_gradient(h.evaluate, z, 1e-5);
      EXPECT_LT((exact - approx).norm(), 1e-6 * std::max(1.0, exact.norm())) << id;
    }
  }
}

TEST(TildeApply, MatchesHamiltonEquations) {
  const HamiltonianField kinetic = free_particle(1.0);
  Rng rng(2);
  for (int i = 0; i < 10; ++i) {
    const PhaseSpacePoint z = point(rng.uniform(-5, 5), rng.uniform(-5, 5));
    EXPECT_DOUBLE_EQ(tilde_apply(kinetic, coordinate_q(), z), z(1));
    const HamiltonianField osc = harmonic_oscillator(2.0, 3.0);
    // dq/dt = p/m, dp/dt = -m w^2 q
    EXPECT_NEAR(tilde_apply(osc, coordinate_q(), z), z(1) / 2.0, 1e-14);
    EXPECT_NEAR(tilde_apply(osc, coordinate_p(), z), -18.0 * z(0), 1e-12);
  }
}

TEST(TildeApply, ConservedQuantitiesAndAntisymmetry) {
  Rng rng(3);
  const HamiltonianField osc = harmonic_oscillator(1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const PhaseSpacePoint z = point(rng.uniform(-4, 4), rng.uniform(-4, 4));
    EXPECT_NEAR(tilde_apply(osc, radius_squared(), z), 0.0, 1e-12);
    for (const char* id : {"free_particle(1)", "harmonic(2,0.5)", "quartic(1,1)"}) {
      const HamiltonianField h = make_system(id);
      EXPECT_EQ(tilde_apply(h, h, z), 0.0);
      EXPECT_NEAR(tilde_apply(h, radius_squared(), z), -tilde_apply(radius_squared(), h, z), 1e-12);
    }
  }
}

TEST(TildeApply, RejectsNonFiniteGradients) {
  const HamiltonianField bad = observable(
      "bad", 1, [](const PhaseSpacePoint&) { return 0.0; },
      [](const RealVector&) { return point(std::nan(""), 0.0); });
  EXPECT_EQ(error_code_of([&] { tilde_apply(free_particle(1), bad, point(0, 0)); }),
            ErrorCode::NumericalDomain);
}

TEST(FlowMap, FreeParticleTranslates) {
  const PhaseSpacePoint z = flow_map(free_particle(1.0), point(0, 1), 3.0, 1e-3);
  EXPECT_NEAR(z(0), 3.0, 1e-12);
  EXPECT_NEAR(z(1), 1.0, 1e-12);
}

TEST(FlowMap, HarmonicOscillatorReturnsAfterOnePeriod) {
  const HamiltonianField osc = harmonic_oscillator(1.0, 1.0);
  const PhaseSpacePoint z = flow_map(osc, point(1, 0), 2 * kPi, 1e-3);
  EXPECT_LT((z - point(1, 0)).cwiseAbs().maxCoeff(), 1e-5);
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    const PhaseSpacePoint z0 = point(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const double t = rng.uniform(-5, 5);
    EXPECT_LT((flow_map(osc, z0, t, 1e-3) - rotated(z0, t)).norm(), 1e-5);
  }
}

TEST(FlowMap, RejectsBadSteps) {
  const HamiltonianField osc = harmonic_oscillator(1.0, 1.0);
  EXPECT_EQ(error_code_of([&] { flow_map(osc, point(1, 0), 1.0, 0.0); }), ErrorCode::InvalidParameter);
  EXPECT_EQ(error_code_of([&] { flow_map(radius_squared(), point(1, 0), 1.0, 0.1); }),
            ErrorCode::UnsupportedSystem);
  EXPECT_EQ(error_code_of([&] { flow_map(osc, PhaseSpacePoint::Zero(3), 1.0, 0.1); }),
            ErrorCode::DimensionMismatch);
}

TEST(FlowMap, StepCountHonoursExactMultiples) {
  EXPECT_EQ(step_count(kPi / 4, kPi / 4 / 1000), 1000);
  EXPECT_EQ(step_count(1.0, 0.3), 4);
  EXPECT_EQ(step_count(0.0, 0.1), 0);
  EXPECT_EQ(step_count(-1.0, 0.25), 4);
}

TEST(FlowMap, EnergyDriftIsSecondOrder) {
  for (const char* id : {"harmonic(1,1)", "quartic(1,0.5)"}) {
    const HamiltonianField h = make_system(id);
    const double coarse = max_energy_drift(h, point(1, 0.2), 2 * kPi, 0.02);
    const double fine = max_energy_drift(h, point(1, 0.2), 2 * kPi, 0.01);
    EXPECT_GT(coarse / fine, 3.5) << id;
    EXPECT_LT(coarse / fine, 4.5) << id;
  }
}

TEST(FlowMap, PhaseSpaceAreaIsPreserved) {
  for (const char* id : {"harmonic(1,1)", "quartic(1,0.5)", "mirror(harmonic(2,0.5))"}) {
    const RealMatrix jac = flow_jacobian(make_system(id), point(0.7, -0.3), 2 * kPi, 1e-3);
    EXPECT_NEAR(jac.determinant(), 1.0, 1e-6) << id;
  }
}

TEST(FlowMap, ComposedSystemsEvolveIndependently) {
  const HamiltonianField both = compose(harmonic_oscillator(1, 1), free_particle(2));
  PhaseSpacePoint z(4);
  z << 1.0, 0.5, 0.0, 4.0;
  const PhaseSpacePoint out = flow_map(both, z, 1.0, 1e-3);
  const PhaseSpacePoint a = flow_map(harmonic_oscillator(1, 1), point(1.0, 0.0), 1.0, 1e-3);
  EXPECT_NEAR(out(0), a(0), 1e-14);
  EXPECT_NEAR(out(2), a(1), 1e-14);
  EXPECT_NEAR(out(1), 2.5, 1e-12);
  EXPECT_EQ(out(3), 4.0);
}

// ---------------------------------------------------------------------------

TEST(PropagateDensity, ZeroTimeIsIdentity) {
  const PhaseSpaceDensity blob = gaussian_samples(point(1, 0), 0.2, 11, 4.0, 0.1);
  const Propagation same = propagate_density(harmonic_oscillator(1, 1), blob, 0.0, 1e-3);
  EXPECT_EQ(same.density.samples().points, blob.samples().points);
  EXPECT_EQ(same.density.samples().weights, blob.samples().weights);
}

TEST(PropagateDensity, HarmonicBlobRotatesQuarterTurn) {
  const PhaseSpaceDensity blob = gaussian_samples(point(1, 0), 0.2, 21, 5.0, 0.1);
  const Propagation moved = propagate_density(harmonic_oscillator(1, 1), blob, kPi / 2, 1e-3);
  EXPECT_LT((moved.density.center() - point(0, -1)).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_NEAR(moved.density.total_mass(), blob.total_mass(), 1e-9);
  EXPECT_FALSE(moved.escaped());
}

TEST(PropagateDensity, FreeBlobTranslates) {
  const PhaseSpaceDensity blob = gaussian_samples(point(0, 1), 0.1, 11, 4.0, 0.1);
  const Propagation moved = propagate_density(free_particle(1), blob, 2.0, 1e-3);
  EXPECT_LT((moved.density.center() - point(2, 1)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PropagateDensity, ReportsEscapedMass) {
  const PhaseSpaceDensity blob = gaussian_samples(point(0, 1), 0.1, 11, 4.0, 0.1);
  const Propagation moved = propagate_density(free_particle(1), blob, 2.0, 1e-3, box2(-1, 1.5));
  EXPECT_GT(moved.escaped_mass_fraction, 0.99);
  const Propagation kept = propagate_density(free_particle(1), blob, 0.1, 1e-3, box2(-1, 2));
  EXPECT_EQ(kept.escaped_mass_fraction, 0.0);
}

TEST(PropagateDensity, GridPullbackTracksAnalyticRotation) {
  const BoundingBox box = box2(-3, 3);
  const std::vector<int> res{120, 120};
  const PhaseSpaceDensity grid = gaussian_grid(point(1, 0), 0.4, box, res);
  const Propagation moved = propagate_density(harmonic_oscillator(1, 1), grid, kPi / 2, 1e-3);
  const PhaseSpaceDensity exact = gaussian_grid(point(0, -1), 0.4, box, res);
  EXPECT_LT(l1_distance(moved.density, exact, box, res), 5e-3);
  EXPECT_LT((moved.density.center() - point(0, -1)).norm(), 1e-3);
  EXPECT_LT(moved.escaped_mass_fraction, 1e-3);
}

TEST(PropagateDensity, SemigroupProperty) {
  const HamiltonianField osc = harmonic_oscillator(1, 1);
  const PhaseSpaceDensity blob = gaussian_samples(point(1, 0.3), 0.3, 21, 5.0, 0.15);
  const double half = kPi / 4;
  const double dt = half / 1000;
  const PhaseSpaceDensity once = propagate_density(osc, blob, 2 * half, dt).density;
  const PhaseSpaceDensity twice =
      propagate_density(osc, propagate_density(osc, blob, half, dt).density, half, dt).density;
  EXPECT_LT(l1_distance(once, twice, box2(-3, 3), {80, 80}), 1e-6);
}

TEST(PropagateDensity, SemigroupPropertyRandomized) {
  Rng rng(6);
  for (const char* id : {"harmonic(1,1.3)", "quartic(1,0.2)", "free_particle(0.5)"}) {
    const HamiltonianField h = make_system(id);
    const double t1 = rng.uniform(0.1, 1.0);
    const double t2 = rng.uniform(0.1, 1.0);
    const double dt = 1e-4;
    const PhaseSpaceDensity blob =
        random_gaussian_samples(point(rng.uniform(-1, 1), rng.uniform(-1, 1)), 0.2, 400, rng, 0.15);
    const PhaseSpaceDensity once = propagate_density(h, blob, t1 + t2, dt).density;
    const PhaseSpaceDensity twice =
        propagate_density(h, propagate_density(h, blob, t1, dt).density, t2, dt).density;
    // Different step sizes: O(dt^2) positional error, smoothed by the kernel.
    EXPECT_LT(l1_distance(once, twice, box2(-5, 5), {100, 100}), 1e-6) << id;
  }
}

// ---------------------------------------------------------------------------

TEST(LiouvilleResidual, FunctionsOfTheHamiltonianAreStationary) {
  const HamiltonianField osc = harmonic_oscillator(1, 1);
  const TimeDependentDensity rho = [&](const PhaseSpacePoint& z, double) {
    return std::exp(-osc.evaluate(z));
  };
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const PhaseSpacePoint z = point(rng.uniform(-2, 2), rng.uniform(-2, 2));
    EXPECT_LT(liouville_residual(osc, rho, z, 0.3, 1e-3).residual, 1e-6);
  }
}

TEST(LiouvilleResidual, UniformDensityUnderFreeFlight) {
  const TimeDependentDensity uniform = [](const PhaseSpacePoint&, double) { return 0.25; };
  EXPECT_LT(liouville_residual(free_particle(1), uniform, point(0.3, 2.0), 1.0, 1e-3).residual,
            1e-12);
}

TEST(LiouvilleResidual, TransportedBlobPassesAndFrozenBlobFails) {
  const HamiltonianField osc = harmonic_oscillator(1, 1);
  auto gaussian = [](const PhaseSpacePoint& z, const PhaseSpacePoint& c) {
    return std::exp(-(z - c).squaredNorm() / (2 * 0.25)) / (2 * kPi * 0.25);
  };
  // rho(z, t) = rho0(Phi_{-t} z) with the exact rotation.
  const TimeDependentDensity moving = [&](const PhaseSpacePoint& z, double t) {
    return gaussian(rotated(z, -t), point(1, 0));
  };
  const TimeDependentDensity frozen = [&](const PhaseSpacePoint& z, double) {
    return gaussian(z, point(1, 0));
  };
  const PhaseSpacePoint z = point(1.2, -0.3);
  EXPECT_LT(liouville_residual(osc, moving, rotated(z, 0.5), 0.5, 1e-3).residual, 1e-6);
  EXPECT_GT(liouville_residual(osc, frozen, rotated(z, 0.5), 0.5, 1e-3).residual, 1e-2);
}

TEST(LiouvilleResidual, FlagsPointsOutsideSupport) {
  const TimeDependentDensity boxed = [](const PhaseSpacePoint& z, double) {
    return z.norm() < 1.0 ? 1.0 / kPi : 0.0;
  };
  const LiouvilleResidual r = liouville_residual(free_particle(1), boxed, point(5, 5), 0.0, 1e-3);
  EXPECT_TRUE(r.outside_support);
  EXPECT_EQ(r.residual, 0.0);
}

// ---------------------------------------------------------------------------

TEST(Overlap, GaussianOverlapMatchesClosedForm) {
  const BoundingBox box = box2(-8, 11);
  const std::vector<int> res{300, 300};
  const double sigma = 1.0;
  for (double separation : {0.0, 1.0, 3.0}) {
    const PhaseSpaceDensity a = gaussian_grid(point(0, 0), sigma, box, res);
    const PhaseSpaceDensity b = gaussian_grid(point(separation, 0), sigma, box, res);
    const double expected = std::exp(-separation * separation / (4 * sigma * sigma)) /
                            (4 * kPi * sigma * sigma);
    EXPECT_NEAR(overlap(a, b), expected, 1e-4 * expected) << separation;
  }
  // Sample pairs use the closed-form kernel convolution; compare with a grid render.
  const PhaseSpaceDensity s = gaussian_samples(point(0, 0), 0.5, 9, 3.0, 0.4);
  const PhaseSpaceDensity t = gaussian_samples(point(0.8, 0.1), 0.5, 9, 3.0, 0.4);
  const GridDensity ts = render(t, box2(-6, 6), {240, 240});
  EXPECT_NEAR(overlap(s, t), overlap(s, PhaseSpaceDensity(ts)), 1e-6);
}

class RingScenario : public ::testing::Test {
 protected:
  // Eight clock branches on a circle of radius 14 sigma: chord 2R sin(pi/8)
  // = 10.7 sigma between neighbours.
  static constexpr int kBranches = 8;
  static constexpr double kRadius = 14.0;
  static constexpr double kTau = 2 * kPi / kBranches;

  HamiltonianField system = harmonic_oscillator(1, 1);
  HamiltonianField clock = harmonic_oscillator(1, 1);

  PhaseSpaceDensity system_at(double t) const {
    return propagate_density(system, gaussian_samples(point(1.0, 0.0), 0.3, 15, 4.0, 0.15), t,
                             kTau / 200)
        .density;
  }
  PhaseSpaceDensity clock_at(double t) const {
    return propagate_density(clock, gaussian_samples(point(kRadius, 0.0), 0.8, 15, 4.0, 0.6), t,
                             kTau / 200)
        .density;
  }
  JointDensity ring(double offset = 0.0) const {
    std::vector<Branch> branches;
    const auto p = uniform_probabilities(kBranches);
    for (int k = 0; k < kBranches; ++k) {
      const double t = offset + k * kTau;
      branches.push_back(Branch{p[static_cast<std::size_t>(k)], system_at(t), clock_at(t), t});
    }
    return build_joint_density(std::move(branches));
  }
};

TEST_F(RingScenario, ClockBranchesAreNearlyDisjoint) {
  const JointDensity joint = ring();
  EXPECT_LT(joint.max_clock_overlap(), 1e-6);
  double mass = 0.0;
  for (const auto& b : joint.branches()) mass += b.probability * b.system.total_mass() * b.clock.total_mass();
  EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST_F(RingScenario, ConditioningRecoversEveryBranch) {
  const JointDensity joint = ring();
  for (std::size_t k = 0; k < joint.size(); ++k) {
    const PhaseSpaceDensity recovered = condition_on_clock_density(joint, k);
    EXPECT_LT(l1_distance(recovered, joint.branches()[k].system, box2(-3, 3), {60, 60}), 1e-6) << k;
  }
  EXPECT_EQ(error_code_of([&] { condition_on_clock_density(joint, joint.size()); }),
            ErrorCode::OutOfRange);
}

TEST_F(RingScenario, RelationalSync) {
  const JointDensity shifted = propagate_branches(ring(), system, clock, kTau, kTau / 200);
  const JointDensity relabelled = ring(kTau);
  const double bound = joint_l1_upper_bound(shifted, relabelled, box2(-3, 3), {60, 60},
                                            box2(-19, 19), {95, 95});
  EXPECT_LT(bound, 1e-5);
}

TEST_F(RingScenario, JointStateIsMoreMixedThanItsBranches) {
  const JointDensity joint = ring();
  const double joint_h = joint_entropy(joint, box2(-3, 3), {48, 48}, box2(-19, 19), {95, 95});
  for (const auto& b : joint.branches()) {
    EXPECT_GE(joint_h, mixedness(b.system).entropy);
    EXPECT_LE(joint_purity(joint), branch_purity(b));
  }
  EXPECT_GE(joint_h, mixedness(system_marginal(joint)).entropy);
}

TEST(JointDensity, SingleBranchIsAProduct) {
  const PhaseSpaceDensity s = gaussian_samples(point(0, 0), 0.5, 9, 3.0, 0.3);
  const PhaseSpaceDensity c = gaussian_samples(point(2, 1), 0.5, 9, 3.0, 0.3);
  std::vector<Branch> branches{Branch{1.0, s, c, 0.0}};
  const JointDensity joint = build_joint_density(branches);
  const PhaseSpacePoint zs = point(0.1, -0.2);
  const PhaseSpacePoint zc = point(1.7, 0.9);
  EXPECT_DOUBLE_EQ(joint.evaluate(zs, zc), s.evaluate(zs) * c.evaluate(zc));
  const PhaseSpaceDensity recovered = condition_on_clock_density(joint, 0);
  EXPECT_EQ(recovered.samples().points, s.samples().points);
  EXPECT_LT((recovered.samples().weights - s.samples().weights).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(JointDensity, IdenticalClockBranchesAreRejected) {
  const PhaseSpaceDensity s = gaussian_samples(point(0, 0), 0.5, 9, 3.0, 0.3);
  const PhaseSpaceDensity c = gaussian_samples(point(2, 1), 0.5, 9, 3.0, 0.3);
  std::vector<Branch> branches{Branch{0.5, s, c, 0.0}, Branch{0.5, s, c, 1.0}};
  EXPECT_EQ(error_code_of([&] { build_joint_density(branches); }), ErrorCode::NonOrthogonalClock);
  branches[0].probability = 0.6;
  EXPECT_EQ(error_code_of([&] { build_joint_density(branches); }), ErrorCode::InvalidParameter);
}

// ---------------------------------------------------------------------------

TEST(Mixedness, UniformUnitBoxHasZeroEntropy) {
  GridDensity g;
  g.box = box2(0, 1);
  g.resolution = {10, 10};
  g.values = RealVector::Ones(100);
  const Mixedness m = mixedness(PhaseSpaceDensity(g));
  EXPECT_NEAR(m.entropy, 0.0, 1e-12);
  EXPECT_NEAR(m.renyi2, 0.0, 1e-12);
  EXPECT_EQ(m.bandwidth, 0.0);
}

TEST(Mixedness, StandardGaussianEntropy) {
  const PhaseSpaceDensity g = gaussian_grid(point(0, 0), 1.0, box2(-8, 8), {200, 200});
  const double expected = std::log(2 * kPi * std::exp(1.0));
  EXPECT_NEAR(mixedness(g).entropy, expected, 0.05);
  EXPECT_NEAR(mixedness(g).renyi2, std::log(4 * kPi), 1e-3);

  Rng rng(8);
  const PhaseSpaceDensity s = random_gaussian_samples(point(0, 0), 1.0, 4000, rng, 0.2);
  const Mixedness m = mixedness(s);
  EXPECT_NEAR(m.entropy, expected, 0.1);
  EXPECT_EQ(m.bandwidth, 0.2);
}

TEST(Mixedness, EmptySupportIsAnError) {
  GridDensity g;
  g.box = box2(0, 1);
  g.resolution = {4, 4};
  g.values = RealVector::Zero(16);
  EXPECT_EQ(error_code_of([&] { mixedness(PhaseSpaceDensity(g)); }), ErrorCode::EmptySupport);
}

TEST(PhaseSpaceDensity, RejectsNegativeWeights) {
  SampleDensity s;
  s.points = RealMatrix::Zero(2, 2);
  s.weights = RealVector(2);
  s.weights << 0.5, -0.5;
  EXPECT_EQ(error_code_of([&] { PhaseSpaceDensity{s}; }), ErrorCode::InvalidParameter);
}

}  // namespace
