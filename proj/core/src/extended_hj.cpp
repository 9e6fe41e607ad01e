#include "timeless/extended_hj.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "timeless/classical_liouville.hpp"
#include "timeless/error.hpp"

namespace timeless::hj {

PhaseSpacePoint pack(const ExtendedPhaseState& x) {
  const Eigen::Index k = x.q.size();
  if (x.p.size() != k) fail(ErrorCode::DimensionMismatch, "q and p lengths differ");
  PhaseSpacePoint omega(2 * k + 2);
  omega << x.q, x.t, x.p, x.p0;
  return omega;
}

ExtendedPhaseState unpack(const PhaseSpacePoint& omega, int dof) {
  if (omega.size() != 2 * dof + 2) {
    fail(ErrorCode::DimensionMismatch, "extended point has the wrong length");
  }
  ExtendedPhaseState x;
  x.q = omega.head(dof);
  x.t = omega(dof);
  x.p = omega.segment(dof + 1, dof);
  x.p0 = omega(2 * dof + 1);
  return x;
}

HamiltonianField extend(const HamiltonianField& h) {
  const int k = h.dof;
  // (q, t, p, p0) -> (q, p)
  auto reduce = [k](const PhaseSpacePoint& w) {
    PhaseSpacePoint z(2 * k);
    z << w.head(k), w.segment(k + 1, k);
    return z;
  };
  HamiltonianField ext;
  ext.name = "extended(" + h.name + ")";
  ext.dof = k + 1;
  ext.evaluate = [h, reduce, k](const PhaseSpacePoint& w) {
    return h.evaluate(reduce(w)) + w(2 * k + 1);
  };
  ext.gradient = [h, reduce, k](const PhaseSpacePoint& w) {
    const RealVector g = h.gradient(reduce(w));
    RealVector out(2 * k + 2);
    out << g.head(k), 0.0, g.tail(k), 1.0;
    return out;
  };
  if (h.separable()) {
    ext.kinetic_gradient = [h, k](const RealVector& p_ext) -> RealVector {
      RealVector out(k + 1);
      out << h.kinetic_gradient(p_ext.head(k)), 1.0;
      return out;
    };
    ext.potential_gradient = [h, k](const RealVector& q_ext) -> RealVector {
      RealVector out(k + 1);
      out << h.potential_gradient(q_ext.head(k)), 0.0;
      return out;
    };
  }
  return ext;
}

double constraint_value(const HamiltonianField& h, const ExtendedPhaseState& x) {
  PhaseSpacePoint z(2 * x.q.size());
  z << x.q, x.p;
  return h.evaluate(z) + x.p0;
}

ExtendedTrajectory extended_flow(const HamiltonianField& ext, const ExtendedPhaseState& x0,
                                 double tau, double dtau, long stride) {
  if (!(dtau > 0.0) || !std::isfinite(dtau)) {
    fail(ErrorCode::InvalidParameter, "dtau must be positive and finite");
  }
  if (stride < 1) fail(ErrorCode::InvalidParameter, "trajectory stride must be >= 1");
  if (!ext.separable()) {
    fail(ErrorCode::UnsupportedSystem, ext.name + " is not separable; leapfrog cannot integrate it");
  }
  const int k = ext.dof - 1;
  PhaseSpacePoint w = pack(x0);
  require_phase_point(w, ext.dof);

  ExtendedTrajectory out;
  out.steps = classical::step_count(tau, dtau);
  out.step = out.steps > 0 ? tau / static_cast<double>(out.steps) : 0.0;
  out.states.push_back(x0);
  for (long i = 1; i <= out.steps; ++i) {
    const double t_before = w(k);
    classical::leapfrog_step(ext, w, out.step);
    out.max_clock_step_error =
        std::max(out.max_clock_step_error, std::abs((w(k) - t_before) - out.step));
    if (i % stride == 0 || i == out.steps) out.states.push_back(unpack(w, k));
  }
  out.p0_drift = std::abs(w(2 * k + 1) - x0.p0);
  return out;
}

double reduction_deviation(const HamiltonianField& h, const ExtendedPhaseState& x0, double tau,
                           double dtau) {
  if (!(dtau > 0.0)) fail(ErrorCode::InvalidParameter, "dtau must be positive");
  if (!h.separable()) fail(ErrorCode::UnsupportedSystem, h.name + " is not separable");
  const HamiltonianField ext = extend(h);
  const int k = h.dof;
  PhaseSpacePoint w = pack(x0);
  PhaseSpacePoint z(2 * k);
  z << x0.q, x0.p;
  const long n = classical::step_count(tau, dtau);
  const double step = n > 0 ? tau / static_cast<double>(n) : 0.0;
  double worst = 0.0;
  for (long i = 0; i < n; ++i) {
    classical::leapfrog_step(ext, w, step);
    classical::leapfrog_step(h, z, step);
    const double dq = (w.head(k) - z.head(k)).cwiseAbs().maxCoeff();
    const double dp = (w.segment(k + 1, k) - z.tail(k)).cwiseAbs().maxCoeff();
    worst = std::max({worst, dq, dp});
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Hamilton-Jacobi

namespace {

SystemId unmirrored(SystemId s) {
  s.mirrored = false;
  return s;
}

// Effective energy for the unmirrored base system.
double base_energy(const SystemId& system, double energy) {
  return system.mirrored ? -energy : energy;
}

std::optional<Interval> base_domain(const SystemId& base, double e) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (base.kind) {
    case SystemId::Kind::FreeParticle:
      if (e > 0.0) return Interval{-inf, inf};
      return std::nullopt;
    case SystemId::Kind::Harmonic: {
      if (!(e > 0.0)) return std::nullopt;
      const double a = std::sqrt(2.0 * e / (base.mass * base.omega * base.omega));
      return Interval{-a, a};
    }
    case SystemId::Kind::Quartic: {
      if (!(e > 0.0)) return std::nullopt;
      const double a = std::pow(e / base.lambda, 0.25);
      return Interval{-a, a};
    }
  }
  return std::nullopt;
}

std::string format_interval(const std::optional<Interval>& d) {
  if (!d) return "empty";
  return "(" + std::to_string(d->lower) + ", " + std::to_string(d->upper) + ")";
}

void require_in_domain(const SystemId& system, double q, double energy) {
  const auto domain = action_domain(system, energy);
  if (!domain || !(q > domain->lower && q < domain->upper)) {
    fail(ErrorCode::Domain, system.to_string() + ": q = " + std::to_string(q) +
                                " at E = " + std::to_string(energy) +
                                " is outside the classically allowed interval " +
                                format_interval(domain));
  }
}

bool has_closed_form(const SystemId& system) {
  return system.kind == SystemId::Kind::FreeParticle || system.kind == SystemId::Kind::Harmonic;
}

double base_action_analytic(const SystemId& base, double q, double e) {
  const double m = base.mass;
  if (base.kind == SystemId::Kind::FreeParticle) return q * std::sqrt(2.0 * m * e);
  // sqrt(2mE - m^2 w^2 q^2) = m w sqrt(A^2 - q^2)
  const double w = base.omega;
  const double a2 = 2.0 * e / (m * w * w);
  const double a = std::sqrt(a2);
  return 0.5 * m * w * (q * std::sqrt(a2 - q * q) + a2 * std::asin(q / a));
}

double base_action_quadrature(const SystemId& base, double q, double e) {
  if (q == 0.0) return 0.0;
  const double m = base.mass;
  auto momentum = [&](double x) {
    const double kinetic = e - base.potential(x);
    return kinetic > 0.0 ? std::sqrt(2.0 * m * kinetic) : 0.0;
  };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      momentum, 0.0, q, 15, 1e-15, &error);
  return value;
}

double base_time_quadrature(const SystemId& base, double q, double e) {
  if (q == 0.0) return 0.0;
  const double m = base.mass;
  auto inverse_velocity = [&](double x) {
    return m / std::sqrt(2.0 * m * (e - base.potential(x)));
  };
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(inverse_velocity, 0.0, q,
                                                                       15, 1e-15, &error);
}

}  // namespace

std::optional<Interval> action_domain(const SystemId& system, double energy) {
  return base_domain(unmirrored(system), base_energy(system, energy));
}

double hj_action(const SystemId& system, double q, double energy, ActionMethod method) {
  require_in_domain(system, q, energy);
  const SystemId base = unmirrored(system);
  const double e = base_energy(system, energy);
  if (method == ActionMethod::Analytic && !has_closed_form(base)) {
    fail(ErrorCode::UnsupportedSystem, system.to_string() + " has no closed-form action");
  }
  const bool analytic =
      method == ActionMethod::Analytic || (method == ActionMethod::Auto && has_closed_form(base));
  return analytic ? base_action_analytic(base, q, e) : base_action_quadrature(base, q, e);
}

double hj_time_fd(const SystemId& system, double q, double energy, double energy_step,
                  ActionMethod method) {
  if (!(energy_step > 0.0)) fail(ErrorCode::InvalidParameter, "energy step must be positive");
  const double up = hj_action(system, q, energy + energy_step, method);
  const double down = hj_action(system, q, energy - energy_step, method);
  return (up - down) / (2.0 * energy_step);
}

std::optional<double> hj_time_analytic(const SystemId& system, double q, double energy) {
  const SystemId base = unmirrored(system);
  if (!has_closed_form(base)) return std::nullopt;
  require_in_domain(system, q, energy);
  const double e = base_energy(system, energy);
  const double m = base.mass;
  double t = 0.0;
  if (base.kind == SystemId::Kind::FreeParticle) {
    t = q * m / std::sqrt(2.0 * m * e);
  } else {
    const double w = base.omega;
    t = std::asin(q * std::sqrt(m * w * w / (2.0 * e))) / w;
  }
  // d/dE S_base(q, -E) = -t_base(q, -E)
  return system.mirrored ? -t : t;
}

double default_energy_step(double energy) { return 1e-6 * std::max(std::abs(energy), 1.0); }

double hj_time(const SystemId& system, double q, double energy, double energy_step,
               double consistency_tol) {
  require_in_domain(system, q, energy + energy_step);
  require_in_domain(system, q, energy - energy_step);
  const double fd = hj_time_fd(system, q, energy, energy_step);

  double reference = 0.0;
  if (const auto exact = hj_time_analytic(system, q, energy)) {
    reference = *exact;
  } else {
    const double t = base_time_quadrature(unmirrored(system), q, base_energy(system, energy));
    reference = system.mirrored ? -t : t;
  }
  if (std::abs(fd - reference) > consistency_tol * std::max(1.0, std::abs(reference))) {
    fail(ErrorCode::NumericalConsistency,
         system.to_string() + ": dS/dE by central difference (" + std::to_string(fd) +
             ") disagrees with the reference value (" + std::to_string(reference) + ")");
  }
  return has_closed_form(unmirrored(system)) ? reference : fd;
}

MirrorPair make_mirror_pair(const SystemId& system) {
  SystemId second = system;
  second.mirrored = !system.mirrored;
  return {system, second};
}

MirrorPair make_mirror_pair(const std::string& system_id) {
  return make_mirror_pair(parse_system_id(system_id));
}

TimeCorrelation time_correlation_check(const MirrorPair& pair, double q1, double q2, double e1,
                                       std::optional<double> energy_step) {
  const double e2 = -e1;
  require_in_domain(pair.first, q1, e1);
  if (!action_domain(pair.second, e2)) {
    fail(ErrorCode::Domain, "constraint surface E1 + E2 = 0 is empty for E1 = " +
                                std::to_string(e1));
  }
  require_in_domain(pair.second, q2, e2);
  const double step1 = energy_step.value_or(default_energy_step(e1));
  const double step2 = energy_step.value_or(default_energy_step(e2));

  TimeCorrelation out;
  out.t1 = hj_time(pair.first, q1, e1, step1);
  out.t2 = hj_time(pair.second, q2, e2, step2);
  out.constant = hj_time(pair.first, 0.0, e1, step1) + hj_time(pair.second, 0.0, e2, step2);
  out.residual = std::abs(out.t1 + out.t2 - out.constant);
  return out;
}

}  // namespace timeless::hj
