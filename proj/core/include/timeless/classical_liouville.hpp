#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "timeless/phase_space.hpp"
#include "timeless/random.hpp"

namespace timeless::classical {

// ---------------------------------------------------------------------------
// Hamiltonian flow

/// One Stormer-Verlet (kick-drift-kick) step of size h, in place.
void leapfrog_step(const HamiltonianField& h, PhaseSpacePoint& z, double step);

/// Number of leapfrog steps used to cover |t| with steps no longer than dt.
long step_count(double t, double dt);

/// z(t) by leapfrog with step t / step_count(t, dt). Negative t runs the
/// flow backwards.
PhaseSpacePoint flow_map(const HamiltonianField& h, const PhaseSpacePoint& z0, double t,
                         double dt);

/// Every `stride`-th point of the leapfrog trajectory, including both ends.
std::vector<PhaseSpacePoint> flow_trajectory(const HamiltonianField& h, const PhaseSpacePoint& z0,
                                             double t, double dt, long stride = 1);

/// max over the trajectory of |H(z(s)) - H(z0)|.
double max_energy_drift(const HamiltonianField& h, const PhaseSpacePoint& z0, double t, double dt);

/// Finite-difference Jacobian of z0 -> flow_map(h, z0, t, dt).
RealMatrix flow_jacobian(const HamiltonianField& h, const PhaseSpacePoint& z0, double t,
                         double dt, double eps = 1e-5);

// ---------------------------------------------------------------------------
// Densities

struct BoundingBox {
  RealVector lower;
  RealVector upper;

  bool contains(const PhaseSpacePoint& z) const;
  Eigen::Index dim() const { return lower.size(); }
};

/// Weighted point cloud. Pointwise values come from an isotropic Gaussian
/// kernel of standard deviation `bandwidth`.
struct SampleDensity {
  /// One column per sample.
  RealMatrix points;
  RealVector weights;
  double bandwidth = 0.1;

  Eigen::Index size() const { return points.cols(); }
  double evaluate(const PhaseSpacePoint& z) const;
};

/// Cell-centred values on a regular grid; the last axis varies fastest.
/// Pointwise values use multilinear interpolation and are zero outside the box.
struct GridDensity {
  BoundingBox box;
  std::vector<int> resolution;
  RealVector values;

  Eigen::Index cells() const { return values.size(); }
  double spacing(Eigen::Index axis) const;
  double cell_volume() const;
  PhaseSpacePoint cell_center(Eigen::Index flat) const;
  double evaluate(const PhaseSpacePoint& z) const;
  bool same_layout(const GridDensity& other) const;
};

class PhaseSpaceDensity {
 public:
  using Representation = std::variant<SampleDensity, GridDensity>;

  /// Validates non-negativity and shape; does not normalize.
  explicit PhaseSpaceDensity(Representation rep);

  const Representation& representation() const { return rep_; }
  bool is_samples() const { return std::holds_alternative<SampleDensity>(rep_); }
  const SampleDensity& samples() const { return std::get<SampleDensity>(rep_); }
  const GridDensity& grid() const { return std::get<GridDensity>(rep_); }

  Eigen::Index dim() const;
  double total_mass() const;
  double evaluate(const PhaseSpacePoint& z) const;
  /// Weighted mean position in phase space.
  PhaseSpacePoint center() const;
  PhaseSpaceDensity normalized() const;

 private:
  Representation rep_;
};

/// Deterministic lattice quadrature of a Gaussian: `nodes_per_axis` points
/// spanning +-span sigmas on each axis, weights proportional to the pdf.
PhaseSpaceDensity gaussian_samples(const PhaseSpacePoint& center, double sigma,
                                   int nodes_per_axis, double span, double bandwidth);

/// Monte Carlo draw of n equally weighted Gaussian samples.
PhaseSpaceDensity random_gaussian_samples(const PhaseSpacePoint& center, double sigma, long n,
                                          Rng& rng, double bandwidth);

/// Evaluate `f` at cell centres. Not normalized.
GridDensity render(const std::function<double(const PhaseSpacePoint&)>& f, const BoundingBox& box,
                   const std::vector<int>& resolution);
GridDensity render(const PhaseSpaceDensity& rho, const BoundingBox& box,
                   const std::vector<int>& resolution);

/// Normalized Gaussian tabulated on a grid.
PhaseSpaceDensity gaussian_grid(const PhaseSpacePoint& center, double sigma, const BoundingBox& box,
                                const std::vector<int>& resolution);

/// Integral of |a - b| after rendering both on the given grid.
double l1_distance(const PhaseSpaceDensity& a, const PhaseSpaceDensity& b, const BoundingBox& box,
                   const std::vector<int>& resolution);

/// Integral of a * b. Exact for pairs of sample densities (Gaussian kernels
/// convolve in closed form), a cell sum otherwise.
double overlap(const PhaseSpaceDensity& a, const PhaseSpaceDensity& b);

/// sum_i c_i rho_i. All terms must be sample densities with a shared
/// bandwidth, or grids with a shared layout.
PhaseSpaceDensity linear_combination(const std::vector<double>& coefficients,
                                     const std::vector<const PhaseSpaceDensity*>& terms);

// ---------------------------------------------------------------------------
// Propagation and the Liouville equation

struct Propagation {
  PhaseSpaceDensity density;
  /// Fraction of mass outside the configured box (0 when no box was given).
  double escaped_mass_fraction = 0.0;
  bool escaped() const { return escaped_mass_fraction > 0.0; }
};

/// rho(z, t) = rho0(Phi_{-t}(z)) by characteristics. Samples are pushed
/// forward by flow_map; grids are pulled back cell by cell.
Propagation propagate_density(const HamiltonianField& h, const PhaseSpaceDensity& rho0, double t,
                              double dt, const std::optional<BoundingBox>& box = std::nullopt);

using TimeDependentDensity = std::function<double(const PhaseSpacePoint&, double)>;

struct LiouvilleResidual {
  double residual = 0.0;
  /// Every stencil value was zero: the point sits outside the support and
  /// the residual carries no information.
  bool outside_support = false;
};

/// |d rho/dt - {H, rho}| at (z, t), with central differences of step dt in
/// both time and phase space.
LiouvilleResidual liouville_residual(const HamiltonianField& h, const TimeDependentDensity& rho,
                                     const PhaseSpacePoint& z, double t, double dt);

// ---------------------------------------------------------------------------
// Correlated system-clock densities

struct Branch {
  double probability = 0.0;
  PhaseSpaceDensity system;
  PhaseSpaceDensity clock;
  double label = 0.0;
};

inline constexpr double kClockOverlapTol = 1e-6;

/// rho_sc(w_s, w_c) = sum_t p_t rho_s(w_s, t) rho_c(w_c, t).
class JointDensity {
 public:
  const std::vector<Branch>& branches() const { return branches_; }
  std::size_t size() const { return branches_.size(); }
  double evaluate(const PhaseSpacePoint& system, const PhaseSpacePoint& clock) const;
  /// max over t != t' of overlap(c_t, c_t') / overlap(c_t, c_t).
  double max_clock_overlap() const { return max_clock_overlap_; }

 private:
  friend JointDensity build_joint_density(std::vector<Branch> branches);
  std::vector<Branch> branches_;
  double max_clock_overlap_ = 0.0;
};

/// Throws NonOrthogonalClock when clock branches overlap beyond
/// kClockOverlapTol, InvalidParameter when probabilities do not sum to 1.
JointDensity build_joint_density(std::vector<Branch> branches);

/// Uniform branch probabilities.
std::vector<double> uniform_probabilities(std::size_t n);

/// The system state read off at clock branch `index`:
///   int dw_c rho_c(w_c, t) rho_sc(w_s, w_c) / (p_t int rho_c(., t)^2).
PhaseSpaceDensity condition_on_clock_density(const JointDensity& joint, std::size_t index);

/// sum_t p_t rho_s(., t).
PhaseSpaceDensity system_marginal(const JointDensity& joint);

/// Propagate every branch by tau (system under h_system, clock under
/// h_clock) and shift the labels by tau.
JointDensity propagate_branches(const JointDensity& joint, const HamiltonianField& h_system,
                                const HamiltonianField& h_clock, double tau, double dt);

/// sum_t p_t (L1(s_t, s'_t) + L1(c_t, c'_t)); bounds the joint L1 distance
/// for unit-mass branches.
double joint_l1_upper_bound(const JointDensity& a, const JointDensity& b,
                            const BoundingBox& system_box, const std::vector<int>& system_res,
                            const BoundingBox& clock_box, const std::vector<int>& clock_res);

// ---------------------------------------------------------------------------
// Mixedness

struct Mixedness {
  /// -int rho ln rho, in nats.
  double entropy = 0.0;
  /// -ln int rho^2.
  double renyi2 = 0.0;
  /// Kernel bandwidth for sample densities, 0 for grids.
  double bandwidth = 0.0;
};

/// Grid densities: cell sums. Sample densities: resubstitution estimate
/// -sum_i w_i ln rho_h(x_i) with the density's own kernel.
Mixedness mixedness(const PhaseSpaceDensity& rho);

/// Differential entropy of the joint density, integrated on the product of
/// a system grid and a clock grid.
double joint_entropy(const JointDensity& joint, const BoundingBox& system_box,
                     const std::vector<int>& system_res, const BoundingBox& clock_box,
                     const std::vector<int>& clock_res);

/// int rho_sc^2 = sum_{t,t'} p_t p_t' <s_t, s_t'> <c_t, c_t'>.
double joint_purity(const JointDensity& joint);

/// <s_t, s_t> <c_t, c_t> for one branch.
double branch_purity(const Branch& branch);

}  // namespace timeless::classical
