#include "timeless/classical_liouville.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "timeless/error.hpp"

namespace timeless::classical {

// ---------------------------------------------------------------------------
// Hamiltonian flow

void leapfrog_step(const HamiltonianField& h, PhaseSpacePoint& z, double step) {
  const Eigen::Index k = h.dof;
  z.tail(k) -= 0.5 * step * h.potential_gradient(z.head(k));
  z.head(k) += step * h.kinetic_gradient(z.tail(k));
  z.tail(k) -= 0.5 * step * h.potential_gradient(z.head(k));
}

long step_count(double t, double dt) {
  if (t == 0.0) return 0;
  const double ratio = std::abs(t) / dt;
  const double nearest = std::round(ratio);
  // Treat t = n * dt (up to rounding) as exactly n steps.
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio) && nearest >= 1.0) {
    return static_cast<long>(nearest);
  }
  return std::max(1L, static_cast<long>(std::ceil(ratio)));
}

namespace {

void require_flow_inputs(const HamiltonianField& h, const PhaseSpacePoint& z0, double t,
                         double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    fail(ErrorCode::InvalidParameter, "integrator step dt must be positive and finite");
  }
  if (!std::isfinite(t)) fail(ErrorCode::InvalidParameter, "flow time must be finite");
  if (!h.separable()) {
    fail(ErrorCode::UnsupportedSystem,
         h.name + " is not separable as T(p) + V(q); leapfrog cannot integrate it");
  }
  require_phase_point(z0, h.dof);
}

}  // namespace

PhaseSpacePoint flow_map(const HamiltonianField& h, const PhaseSpacePoint& z0, double t,
                         double dt) {
  require_flow_inputs(h, z0, t, dt);
  const long n = step_count(t, dt);
  PhaseSpacePoint z = z0;
  if (n == 0) return z;
  const double step = t / static_cast<double>(n);
  for (long i = 0; i < n; ++i) leapfrog_step(h, z, step);
  return z;
}

std::vector<PhaseSpacePoint> flow_trajectory(const HamiltonianField& h, const PhaseSpacePoint& z0,
                                             double t, double dt, long stride) {
  require_flow_inputs(h, z0, t, dt);
  if (stride < 1) fail(ErrorCode::InvalidParameter, "trajectory stride must be >= 1");
  const long n = step_count(t, dt);
  std::vector<PhaseSpacePoint> out{z0};
  if (n == 0) return out;
  const double step = t / static_cast<double>(n);
  PhaseSpacePoint z = z0;
  for (long i = 1; i <= n; ++i) {
    leapfrog_step(h, z, step);
    if (i % stride == 0 || i == n) out.push_back(z);
  }
  return out;
}

double max_energy_drift(const HamiltonianField& h, const PhaseSpacePoint& z0, double t,
                        double dt) {
  require_flow_inputs(h, z0, t, dt);
  const long n = step_count(t, dt);
  const double e0 = h.evaluate(z0);
  double drift = 0.0;
  if (n == 0) return drift;
  const double step = t / static_cast<double>(n);
  PhaseSpacePoint z = z0;
  for (long i = 0; i < n; ++i) {
    leapfrog_step(h, z, step);
    drift = std::max(drift, std::abs(h.evaluate(z) - e0));
  }
  return drift;
}

RealMatrix flow_jacobian(const HamiltonianField& h, const PhaseSpacePoint& z0, double t,
                         double dt, double eps) {
  require_flow_inputs(h, z0, t, dt);
  const Eigen::Index n = z0.size();
  RealMatrix jac(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    PhaseSpacePoint up = z0;
    PhaseSpacePoint down = z0;
    up(j) += eps;
    down(j) -= eps;
    jac.col(j) = (flow_map(h, up, t, dt) - flow_map(h, down, t, dt)) / (2.0 * eps);
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Densities

bool BoundingBox::contains(const PhaseSpacePoint& z) const {
  return z.size() == lower.size() && (z.array() >= lower.array()).all() &&
         (z.array() <= upper.array()).all();
}

namespace {

double gaussian_norm(double variance, Eigen::Index dim) {
  return std::pow(2.0 * std::numbers::pi * variance, -0.5 * static_cast<double>(dim));
}

// sum_j w_j exp(-|x_j - z|^2 / (2 variance))
double kernel_sum(const RealMatrix& points, const RealVector& weights, const PhaseSpacePoint& z,
                  double variance) {
  const RealVector d2 = (points.colwise() - z).colwise().squaredNorm().transpose();
  return weights.dot((-d2.array() / (2.0 * variance)).exp().matrix());
}

Eigen::Index grid_cells(const std::vector<int>& resolution) {
  Eigen::Index n = 1;
  for (int r : resolution) n *= r;
  return n;
}

void require_grid_spec(const BoundingBox& box, const std::vector<int>& resolution) {
  if (box.lower.size() != box.upper.size() ||
      static_cast<std::size_t>(box.lower.size()) != resolution.size() || resolution.empty()) {
    fail(ErrorCode::DimensionMismatch, "grid box and resolution disagree on dimension");
  }
  for (std::size_t a = 0; a < resolution.size(); ++a) {
    const auto axis = static_cast<Eigen::Index>(a);
    if (resolution[a] < 1) fail(ErrorCode::InvalidParameter, "grid resolution must be >= 1");
    if (!(box.upper(axis) > box.lower(axis))) {
      fail(ErrorCode::InvalidParameter, "grid box must have upper > lower on every axis");
    }
  }
}

}  // namespace

double SampleDensity::evaluate(const PhaseSpacePoint& z) const {
  const double variance = bandwidth * bandwidth;
  return gaussian_norm(variance, points.rows()) * kernel_sum(points, weights, z, variance);
}

double GridDensity::spacing(Eigen::Index axis) const {
  return (box.upper(axis) - box.lower(axis)) /
         static_cast<double>(resolution[static_cast<std::size_t>(axis)]);
}

double GridDensity::cell_volume() const {
  double v = 1.0;
  for (Eigen::Index a = 0; a < box.dim(); ++a) v *= spacing(a);
  return v;
}

PhaseSpacePoint GridDensity::cell_center(Eigen::Index flat) const {
  const Eigen::Index d = box.dim();
  PhaseSpacePoint c(d);
  for (Eigen::Index a = d - 1; a >= 0; --a) {
    const int n = resolution[static_cast<std::size_t>(a)];
    const Eigen::Index i = flat % n;
    flat /= n;
    c(a) = box.lower(a) + (static_cast<double>(i) + 0.5) * spacing(a);
  }
  return c;
}

double GridDensity::evaluate(const PhaseSpacePoint& z) const {
  const Eigen::Index d = box.dim();
  if (!box.contains(z)) return 0.0;
  std::vector<Eigen::Index> base(static_cast<std::size_t>(d));
  std::vector<double> frac(static_cast<std::size_t>(d));
  for (Eigen::Index a = 0; a < d; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    const int n = resolution[ua];
    const double s = (z(a) - box.lower(a)) / spacing(a) - 0.5;
    auto i0 = static_cast<Eigen::Index>(std::floor(s));
    double f = s - static_cast<double>(i0);
    // Within half a cell of the wall: hold the edge value.
    if (i0 < 0) {
      i0 = 0;
      f = 0.0;
    } else if (i0 >= n - 1) {
      i0 = n - 1;
      f = 0.0;
    }
    base[ua] = i0;
    frac[ua] = f;
  }
  double value = 0.0;
  const unsigned corners = 1u << static_cast<unsigned>(d);
  for (unsigned corner = 0; corner < corners; ++corner) {
    double w = 1.0;
    Eigen::Index flat = 0;
    for (Eigen::Index a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const bool upper = (corner >> static_cast<unsigned>(a)) & 1u;
      if (upper && frac[ua] == 0.0) {
        w = 0.0;
        break;
      }
      w *= upper ? frac[ua] : 1.0 - frac[ua];
      flat = flat * resolution[ua] + base[ua] + (upper ? 1 : 0);
    }
    if (w != 0.0) value += w * values(flat);
  }
  return value;
}

bool GridDensity::same_layout(const GridDensity& other) const {
  return resolution == other.resolution && box.lower == other.box.lower &&
         box.upper == other.box.upper;
}

PhaseSpaceDensity::PhaseSpaceDensity(Representation rep) : rep_(std::move(rep)) {
  if (const auto* s = std::get_if<SampleDensity>(&rep_)) {
    if (s->points.cols() != s->weights.size()) {
      fail(ErrorCode::DimensionMismatch, "sample count and weight count differ");
    }
    if (s->points.rows() == 0 || s->points.rows() % 2 != 0) {
      fail(ErrorCode::DimensionMismatch, "phase-space samples must have even, non-zero length");
    }
    if (!s->points.allFinite()) fail(ErrorCode::NumericalDomain, "non-finite sample position");
    if (!s->weights.allFinite() || (s->weights.array() < 0.0).any()) {
      fail(ErrorCode::InvalidParameter, "sample weights must be finite and non-negative");
    }
    if (!(s->bandwidth > 0.0)) fail(ErrorCode::InvalidParameter, "kernel bandwidth must be positive");
  } else {
    const auto& g = std::get<GridDensity>(rep_);
    require_grid_spec(g.box, g.resolution);
    if (g.box.dim() % 2 != 0) {
      fail(ErrorCode::DimensionMismatch, "phase-space grid must have an even number of axes");
    }
    if (g.values.size() != grid_cells(g.resolution)) {
      fail(ErrorCode::DimensionMismatch, "grid value count does not match the resolution");
    }
    if (!g.values.allFinite() || (g.values.array() < 0.0).any()) {
      fail(ErrorCode::InvalidParameter, "grid values must be finite and non-negative");
    }
  }
}

Eigen::Index PhaseSpaceDensity::dim() const {
  return is_samples() ? samples().points.rows() : grid().box.dim();
}

double PhaseSpaceDensity::total_mass() const {
  if (is_samples()) return samples().weights.sum();
  return grid().values.sum() * grid().cell_volume();
}

double PhaseSpaceDensity::evaluate(const PhaseSpacePoint& z) const {
  if (z.size() != dim()) fail(ErrorCode::DimensionMismatch, "evaluation point has wrong length");
  return is_samples() ? samples().evaluate(z) : grid().evaluate(z);
}

PhaseSpacePoint PhaseSpaceDensity::center() const {
  if (is_samples()) {
    const auto& s = samples();
    const double mass = s.weights.sum();
    if (mass <= 0.0) fail(ErrorCode::EmptySupport, "density has zero mass");
    return s.points * s.weights / mass;
  }
  const auto& g = grid();
  const double mass = g.values.sum();
  if (mass <= 0.0) fail(ErrorCode::EmptySupport, "density has zero mass");
  PhaseSpacePoint c = PhaseSpacePoint::Zero(g.box.dim());
  for (Eigen::Index i = 0; i < g.cells(); ++i) c += g.values(i) * g.cell_center(i);
  return c / mass;
}

PhaseSpaceDensity PhaseSpaceDensity::normalized() const {
  const double mass = total_mass();
  if (!(mass > 0.0)) fail(ErrorCode::EmptySupport, "cannot normalize a density with zero mass");
  if (is_samples()) {
    SampleDensity s = samples();
    s.weights /= mass;
    return PhaseSpaceDensity(std::move(s));
  }
  GridDensity g = grid();
  g.values /= mass;
  return PhaseSpaceDensity(std::move(g));
}

PhaseSpaceDensity gaussian_samples(const PhaseSpacePoint& center, double sigma,
                                   int nodes_per_axis, double span, double bandwidth) {
  if (!(sigma > 0.0) || !(span > 0.0)) {
    fail(ErrorCode::InvalidParameter, "Gaussian width and span must be positive");
  }
  if (nodes_per_axis < 2) fail(ErrorCode::InvalidParameter, "need at least 2 nodes per axis");
  const Eigen::Index d = center.size();
  RealVector offsets(nodes_per_axis);
  RealVector axis_weights(nodes_per_axis);
  for (int j = 0; j < nodes_per_axis; ++j) {
    const double x = -span + 2.0 * span * j / (nodes_per_axis - 1);
    offsets(j) = sigma * x;
    axis_weights(j) = std::exp(-0.5 * x * x);
  }
  Eigen::Index n = 1;
  for (Eigen::Index a = 0; a < d; ++a) n *= nodes_per_axis;

  SampleDensity s;
  s.bandwidth = bandwidth;
  s.points.resize(d, n);
  s.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index rest = i;
    double w = 1.0;
    for (Eigen::Index a = d - 1; a >= 0; --a) {
      const Eigen::Index j = rest % nodes_per_axis;
      rest /= nodes_per_axis;
      s.points(a, i) = center(a) + offsets(j);
      w *= axis_weights(j);
    }
    s.weights(i) = w;
  }
  s.weights /= s.weights.sum();
  return PhaseSpaceDensity(std::move(s));
}

PhaseSpaceDensity random_gaussian_samples(const PhaseSpacePoint& center, double sigma, long n,
                                          Rng& rng, double bandwidth) {
  if (n < 1) fail(ErrorCode::InvalidParameter, "need at least one sample");
  if (!(sigma > 0.0)) fail(ErrorCode::InvalidParameter, "Gaussian width must be positive");
  SampleDensity s;
  s.bandwidth = bandwidth;
  s.points.resize(center.size(), n);
  for (long i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < center.size(); ++a) {
      s.points(a, i) = center(a) + sigma * rng.normal();
    }
  }
  s.weights = RealVector::Constant(n, 1.0 / static_cast<double>(n));
  return PhaseSpaceDensity(std::move(s));
}

GridDensity render(const std::function<double(const PhaseSpacePoint&)>& f, const BoundingBox& box,
                   const std::vector<int>& resolution) {
  require_grid_spec(box, resolution);
  GridDensity g;
  g.box = box;
  g.resolution = resolution;
  g.values.resize(grid_cells(resolution));
  for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values(i) = f(g.cell_center(i));
  return g;
}

GridDensity render(const PhaseSpaceDensity& rho, const BoundingBox& box,
                   const std::vector<int>& resolution) {
  return render([&rho](const PhaseSpacePoint& z) { return rho.evaluate(z); }, box, resolution);
}

PhaseSpaceDensity gaussian_grid(const PhaseSpacePoint& center, double sigma, const BoundingBox& box,
                                const std::vector<int>& resolution) {
  if (!(sigma > 0.0)) fail(ErrorCode::InvalidParameter, "Gaussian width must be positive");
  const double variance = sigma * sigma;
  GridDensity g = render(
      [&](const PhaseSpacePoint& z) {
        return std::exp(-(z - center).squaredNorm() / (2.0 * variance));
      },
      box, resolution);
  const double mass = g.values.sum() * g.cell_volume();
  if (!(mass > 0.0)) fail(ErrorCode::EmptySupport, "Gaussian has no mass inside the grid box");
  g.values /= mass;
  return PhaseSpaceDensity(std::move(g));
}

double l1_distance(const PhaseSpaceDensity& a, const PhaseSpaceDensity& b, const BoundingBox& box,
                   const std::vector<int>& resolution) {
  const GridDensity ga = render(a, box, resolution);
  const GridDensity gb = render(b, box, resolution);
  return (ga.values - gb.values).cwiseAbs().sum() * ga.cell_volume();
}

double overlap(const PhaseSpaceDensity& a, const PhaseSpaceDensity& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::DimensionMismatch, "overlap of densities of different dimension");
  if (a.is_samples() && b.is_samples()) {
    const auto& sa = a.samples();
    const auto& sb = b.samples();
    // The convolution of two Gaussian kernels is a Gaussian with summed variances.
    const double variance = sa.bandwidth * sa.bandwidth + sb.bandwidth * sb.bandwidth;
    double total = 0.0;
    for (Eigen::Index i = 0; i < sa.size(); ++i) {
      if (sa.weights(i) == 0.0) continue;
      total += sa.weights(i) * kernel_sum(sb.points, sb.weights, sa.points.col(i), variance);
    }
    return gaussian_norm(variance, a.dim()) * total;
  }
  if (!a.is_samples() && !b.is_samples() && a.grid().same_layout(b.grid())) {
    return a.grid().values.dot(b.grid().values) * a.grid().cell_volume();
  }
  const GridDensity& g = a.is_samples() ? b.grid() : a.grid();
  const PhaseSpaceDensity& other = a.is_samples() ? a : b;
  double total = 0.0;
  for (Eigen::Index i = 0; i < g.cells(); ++i) {
    if (g.values(i) != 0.0) total += g.values(i) * other.evaluate(g.cell_center(i));
  }
  return total * g.cell_volume();
}

PhaseSpaceDensity linear_combination(const std::vector<double>& coefficients,
                                     const std::vector<const PhaseSpaceDensity*>& terms) {
  if (coefficients.size() != terms.size() || terms.empty()) {
    fail(ErrorCode::DimensionMismatch, "linear combination needs one coefficient per term");
  }
  for (double c : coefficients) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      fail(ErrorCode::InvalidParameter, "density combinations need non-negative coefficients");
    }
  }
  const PhaseSpaceDensity& first = *terms.front();
  if (first.is_samples()) {
    const double bandwidth = first.samples().bandwidth;
    Eigen::Index total = 0;
    for (const auto* t : terms) {
      if (!t->is_samples() || t->samples().bandwidth != bandwidth || t->dim() != first.dim()) {
        fail(ErrorCode::InvalidParameter,
             "sample densities can only be combined with a shared bandwidth and dimension");
      }
      total += t->samples().size();
    }
    SampleDensity out;
    out.bandwidth = bandwidth;
    out.points.resize(first.dim(), total);
    out.weights.resize(total);
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const auto& s = terms[i]->samples();
      out.points.middleCols(at, s.size()) = s.points;
      out.weights.segment(at, s.size()) = coefficients[i] * s.weights;
      at += s.size();
    }
    return PhaseSpaceDensity(std::move(out));
  }
  GridDensity out = first.grid();
  out.values.setZero();
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i]->is_samples() || !terms[i]->grid().same_layout(out)) {
      fail(ErrorCode::InvalidParameter, "grid densities can only be combined on a shared layout");
    }
    out.values += coefficients[i] * terms[i]->grid().values;
  }
  return PhaseSpaceDensity(std::move(out));
}

// ---------------------------------------------------------------------------
// Propagation and the Liouville equation

Propagation propagate_density(const HamiltonianField& h, const PhaseSpaceDensity& rho0, double t,
                              double dt, const std::optional<BoundingBox>& box) {
  if (rho0.dim() != h.dim()) {
    fail(ErrorCode::DimensionMismatch, "density and Hamiltonian live on different phase spaces");
  }
  if (rho0.is_samples()) {
    SampleDensity s = rho0.samples();
    double escaped = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const PhaseSpacePoint moved = flow_map(h, s.points.col(i), t, dt);
      s.points.col(i) = moved;
      if (box && !box->contains(moved)) escaped += s.weights(i);
    }
    const double mass = s.weights.sum();
    PhaseSpaceDensity out(std::move(s));
    return {std::move(out), mass > 0.0 ? escaped / mass : 0.0};
  }

  const GridDensity& g0 = rho0.grid();
  GridDensity g = g0;
  for (Eigen::Index i = 0; i < g.cells(); ++i) {
    g.values(i) = g0.evaluate(flow_map(h, g0.cell_center(i), -t, dt));
  }
  // A grid is its own box; report the mass it lost through the walls and
  // interpolation.
  const double before = g0.values.sum();
  const double after = g.values.sum();
  const double lost = before > 0.0 ? std::max(0.0, 1.0 - after / before) : 0.0;
  return {PhaseSpaceDensity(std::move(g)), lost};
}

LiouvilleResidual liouville_residual(const HamiltonianField& h, const TimeDependentDensity& rho,
                                     const PhaseSpacePoint& z, double t, double dt) {
  require_phase_point(z, h.dof);
  if (!(dt > 0.0)) fail(ErrorCode::InvalidParameter, "difference step must be positive");
  const double later = rho(z, t + dt);
  const double earlier = rho(z, t - dt);
  const RealVector grad_rho = numerical_gradient(rho, z, t, dt);
  const RealVector grad_h = h.gradient(z);
  if (!grad_h.allFinite() || !grad_rho.allFinite()) {
    fail(ErrorCode::NumericalDomain, "non-finite gradient in Liouville residual");
  }
  const Eigen::Index k = h.dof;
  const double bracket = grad_h.head(k).dot(grad_rho.tail(k)) - grad_h.tail(k).dot(grad_rho.head(k));
  const double rate = (later - earlier) / (2.0 * dt);

  LiouvilleResidual out;
  out.residual = std::abs(rate - bracket);
  out.outside_support = later == 0.0 && earlier == 0.0 && grad_rho.isZero(0.0) && rho(z, t) == 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Correlated system-clock densities

double JointDensity::evaluate(const PhaseSpacePoint& system, const PhaseSpacePoint& clock) const {
  double total = 0.0;
  for (const Branch& b : branches_) {
    const double c = b.clock.evaluate(clock);
    if (c != 0.0) total += b.probability * b.system.evaluate(system) * c;
  }
  return total;
}

std::vector<double> uniform_probabilities(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

namespace {

RealMatrix clock_gram(const std::vector<Branch>& branches) {
  const auto n = static_cast<Eigen::Index>(branches.size());
  RealMatrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      gram(i, j) = overlap(branches[static_cast<std::size_t>(i)].clock,
                           branches[static_cast<std::size_t>(j)].clock);
      gram(j, i) = gram(i, j);
    }
  }
  return gram;
}

}  // namespace

JointDensity build_joint_density(std::vector<Branch> branches) {
  if (branches.empty()) fail(ErrorCode::InvalidParameter, "joint density needs at least one branch");
  double total = 0.0;
  for (const Branch& b : branches) {
    if (!(b.probability >= 0.0)) fail(ErrorCode::InvalidParameter, "negative branch probability");
    if (b.system.dim() != branches.front().system.dim() ||
        b.clock.dim() != branches.front().clock.dim()) {
      fail(ErrorCode::DimensionMismatch, "branches live on different phase spaces");
    }
    total += b.probability;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    fail(ErrorCode::InvalidParameter,
         "branch probabilities sum to " + std::to_string(total) + ", expected 1");
  }

  const RealMatrix gram = clock_gram(branches);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    if (!(gram(i, i) > 0.0)) fail(ErrorCode::EmptySupport, "clock branch has zero norm");
    for (Eigen::Index j = 0; j < gram.cols(); ++j) {
      if (i != j) worst = std::max(worst, gram(i, j) / gram(i, i));
    }
  }
  if (worst > kClockOverlapTol) {
    fail(ErrorCode::NonOrthogonalClock,
         "clock branches overlap: max relative overlap " + std::to_string(worst) +
             " exceeds " + std::to_string(kClockOverlapTol));
  }
  JointDensity joint;
  joint.branches_ = std::move(branches);
  joint.max_clock_overlap_ = worst;
  return joint;
}

PhaseSpaceDensity condition_on_clock_density(const JointDensity& joint, std::size_t index) {
  const auto& branches = joint.branches();
  if (index >= branches.size()) {
    fail(ErrorCode::OutOfRange, "clock branch " + std::to_string(index) + " outside [0, " +
                                    std::to_string(branches.size()) + ")");
  }
  const Branch& target = branches[index];
  if (!(target.probability > 0.0)) {
    fail(ErrorCode::ZeroNorm, "clock branch " + std::to_string(index) + " has zero probability");
  }
  const double self = overlap(target.clock, target.clock);
  std::vector<double> coefficients;
  std::vector<const PhaseSpaceDensity*> systems;
  for (const Branch& b : branches) {
    const double c = &b == &target ? self : overlap(target.clock, b.clock);
    coefficients.push_back(b.probability * c / (target.probability * self));
    systems.push_back(&b.system);
  }
  return linear_combination(coefficients, systems);
}

PhaseSpaceDensity system_marginal(const JointDensity& joint) {
  std::vector<double> coefficients;
  std::vector<const PhaseSpaceDensity*> systems;
  for (const Branch& b : joint.branches()) {
    coefficients.push_back(b.probability);
    systems.push_back(&b.system);
  }
  return linear_combination(coefficients, systems);
}

JointDensity propagate_branches(const JointDensity& joint, const HamiltonianField& h_system,
                                const HamiltonianField& h_clock, double tau, double dt) {
  std::vector<Branch> moved;
  moved.reserve(joint.size());
  for (const Branch& b : joint.branches()) {
    moved.push_back(Branch{b.probability, propagate_density(h_system, b.system, tau, dt).density,
                           propagate_density(h_clock, b.clock, tau, dt).density, b.label + tau});
  }
  return build_joint_density(std::move(moved));
}

double joint_l1_upper_bound(const JointDensity& a, const JointDensity& b,
                            const BoundingBox& system_box, const std::vector<int>& system_res,
                            const BoundingBox& clock_box, const std::vector<int>& clock_res) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "joint densities differ in branch count");
  double bound = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const Branch& x = a.branches()[t];
    const Branch& y = b.branches()[t];
    const double ls = l1_distance(x.system, y.system, system_box, system_res);
    const double lc = l1_distance(x.clock, y.clock, clock_box, clock_res);
    bound += std::abs(x.probability - y.probability) * x.system.total_mass() * x.clock.total_mass() +
             y.probability * (ls * x.clock.total_mass() + y.system.total_mass() * lc);
  }
  return bound;
}

// ---------------------------------------------------------------------------
// Mixedness

Mixedness mixedness(const PhaseSpaceDensity& rho) {
  Mixedness out;
  if (rho.is_samples()) {
    const auto& s = rho.samples();
    const double mass = s.weights.sum();
    if (!(mass > 0.0) || s.size() == 0) fail(ErrorCode::EmptySupport, "density has empty support");
    double h = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s.weights(i) == 0.0) continue;
      h -= s.weights(i) * std::log(s.evaluate(s.points.col(i)));
    }
    out.entropy = h / mass;
    out.renyi2 = -std::log(overlap(rho, rho));
    out.bandwidth = s.bandwidth;
    return out;
  }
  const auto& g = rho.grid();
  const double vol = g.cell_volume();
  double h = 0.0;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < g.cells(); ++i) {
    const double v = g.values(i);
    if (v > 0.0) h -= v * std::log(v);
    sq += v * v;
  }
  if (!(sq > 0.0)) fail(ErrorCode::EmptySupport, "density has empty support");
  out.entropy = h * vol;
  out.renyi2 = -std::log(sq * vol);
  return out;
}

double joint_entropy(const JointDensity& joint, const BoundingBox& system_box,
                     const std::vector<int>& system_res, const BoundingBox& clock_box,
                     const std::vector<int>& clock_res) {
  const auto n = static_cast<Eigen::Index>(joint.size());
  const Eigen::Index ns = grid_cells(system_res);
  const Eigen::Index nc = grid_cells(clock_res);
  RealMatrix sys(ns, n);
  RealMatrix clk(nc, n);
  double vol_s = 0.0;
  double vol_c = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Branch& b = joint.branches()[static_cast<std::size_t>(t)];
    const GridDensity gs = render(b.system, system_box, system_res);
    const GridDensity gc = render(b.clock, clock_box, clock_res);
    sys.col(t) = b.probability * gs.values;
    clk.col(t) = gc.values;
    vol_s = gs.cell_volume();
    vol_c = gc.cell_volume();
  }
  // Blocks of clock cells keep the product matrix small.
  constexpr Eigen::Index kBlock = 256;
  double h = 0.0;
  for (Eigen::Index start = 0; start < nc; start += kBlock) {
    const Eigen::Index width = std::min(kBlock, nc - start);
    const RealMatrix values = sys * clk.middleRows(start, width).transpose();
    h -= values.unaryExpr([](double v) { return v > 0.0 ? v * std::log(v) : 0.0; }).sum();
  }
  return h * vol_s * vol_c;
}

double joint_purity(const JointDensity& joint) {
  const auto& branches = joint.branches();
  double total = 0.0;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    for (std::size_t j = 0; j < branches.size(); ++j) {
      total += branches[i].probability * branches[j].probability *
               overlap(branches[i].system, branches[j].system) *
               overlap(branches[i].clock, branches[j].clock);
    }
  }
  return total;
}

double branch_purity(const Branch& branch) {
  return overlap(branch.system, branch.system) * overlap(branch.clock, branch.clock);
}

}  // namespace timeless::classical
