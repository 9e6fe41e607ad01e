#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>

#include "scenarios.hpp"
#include "timeless/classical_liouville.hpp"
#include "timeless/error.hpp"
#include "timeless/random.hpp"

namespace timeless::harness {

using namespace classical;

namespace {

PhaseSpacePoint point(double q, double p) {
  PhaseSpacePoint z(2);
  z << q, p;
  return z;
}

/// Exact flow for systems with linear equations of motion.
std::optional<PhaseSpacePoint> closed_form_flow(const SystemId& id, const PhaseSpacePoint& z, double t) {
  const double s = id.mirrored ? -t : t;
  switch (id.kind) {
    case SystemId::Kind::FreeParticle:
      return point(z(0) + z(1) * s / id.mass, z(1));
    case SystemId::Kind::Harmonic: {
      const double w = id.omega;
      const double mw = id.mass * w;
      return point(z(0) * std::cos(w * s) + z(1) / mw * std::sin(w * s),
                   -mw * z(0) * std::sin(w * s) + z(1) * std::cos(w * s));
    }
    case SystemId::Kind::Quartic:
      return std::nullopt;
  }
  return std::nullopt;
}

BoundingBox box_around(const std::vector<const PhaseSpaceDensity*>& densities, double pad) {
  BoundingBox box;
  for (const PhaseSpaceDensity* rho : densities) {
    RealVector lo, hi;
    if (rho->is_samples()) {
      const SampleDensity& s = rho->samples();
      lo = s.points.rowwise().minCoeff().array() - (pad + 4.0 * s.bandwidth);
      hi = s.points.rowwise().maxCoeff().array() + (pad + 4.0 * s.bandwidth);
    } else {
      lo = rho->grid().box.lower;
      hi = rho->grid().box.upper;
    }
    if (box.lower.size() == 0) {
      box.lower = lo;
      box.upper = hi;
    } else {
      box.lower = box.lower.cwiseMin(lo);
      box.upper = box.upper.cwiseMax(hi);
    }
  }
  return box;
}

std::vector<int> resolution_for(const BoundingBox& box, double cell, int max_cells) {
  std::vector<int> res;
  for (Eigen::Index i = 0; i < box.lower.size(); ++i) {
    const double n = std::ceil((box.upper(i) - box.lower(i)) / cell);
    res.push_back(std::clamp(static_cast<int>(n), 16, max_cells));
  }
  return res;
}

void save_density(Artifacts& out, const PhaseSpaceDensity& rho, const std::string& file) {
  std::ofstream f(out.path(file), std::ios::binary);
  csv::write_density(f, rho);
}

}  // namespace

void run_classical_liouville(ScenarioContext& ctx) {
  const auto& p = ctx.cfg.params;
  const SystemId id = parse_system_id(p["system"].get<std::string>());
  const HamiltonianField h = make_system(id);
  const PhaseSpacePoint center = point(p["center"][0].get<double>(), p["center"][1].get<double>());
  const double sigma = p["sigma"].get<double>();
  const double t = p["t"].get<double>();
  const double dt = p["dt"].get<double>();
  Rng rng(ctx.cfg.seed);

  const PhaseSpaceDensity blob =
      gaussian_samples(center, sigma, p["nodes"].get<int>(), p["span"].get<double>(), p["bandwidth"].get<double>());
  save_density(ctx.out, blob, "density_initial.csv");

  // Transported center against the exact flow.
  const int snapshots = p["snapshots"].get<int>();
  csv::Table centers({"t", "q", "p", "q_oracle", "p_oracle", "error", "mass"});
  double worst_center = 0.0;
  double worst_mass = 0.0;
  PhaseSpaceDensity final_density = blob;
  for (int j = 0; j <= snapshots; ++j) {
    const double tj = t * j / snapshots;
    const Propagation moved = propagate_density(h, blob, tj, dt);
    const PhaseSpacePoint c = moved.density.center();
    const auto exact = closed_form_flow(id, center, tj);
    const double err = exact ? (c - *exact).cwiseAbs().maxCoeff() : std::nan("");
    if (exact) worst_center = std::max(worst_center, err);
    worst_mass = std::max(worst_mass, std::abs(moved.density.total_mass() - blob.total_mass()));
    centers.row(std::vector<double>{tj, c(0), c(1), exact ? (*exact)(0) : std::nan(""),
                                    exact ? (*exact)(1) : std::nan(""), err, moved.density.total_mass()});
    if (j == snapshots) final_density = moved.density;
  }
  ctx.out.save(centers, "transported_center.csv");
  save_density(ctx.out, final_density, "density_final.csv");
  if (closed_form_flow(id, center, 0.0)) {
    ctx.check.below("transported_center_error", p["center_tol"].get<double>(), [&] { return worst_center; });
  }
  ctx.check.below("mass_conservation", p["mass_tol"].get<double>(), [&] { return worst_mass; });

  ctx.check.below("semigroup_l1", p["semigroup_tol"].get<double>(), [&] {
    const long n = std::max(1L, step_count(t / 2, dt));
    const double step = (t / 2) / static_cast<double>(n);
    const PhaseSpaceDensity once = propagate_density(h, blob, t, step).density;
    const PhaseSpaceDensity half = propagate_density(h, blob, t / 2, step).density;
    const PhaseSpaceDensity twice = propagate_density(h, half, t / 2, step).density;
    const BoundingBox box = box_around({&once, &twice}, 0.0);
    return l1_distance(once, twice, box, resolution_for(box, p["bandwidth"].get<double>() / 2, 160));
  });

  ctx.check.below("jacobian_det_deviation", p["det_tol"].get<double>(),
                  [&] { return std::abs(flow_jacobian(h, center, t, dt).determinant() - 1.0); });

  const double drift_dt = p["drift_dt"].get<double>();
  csv::Table drift({"dt", "max_energy_drift"});
  const double coarse = max_energy_drift(h, center, t, drift_dt);
  const double fine = max_energy_drift(h, center, t, drift_dt / 2);
  drift.row(std::vector<double>{drift_dt, coarse}).row(std::vector<double>{drift_dt / 2, fine});
  ctx.out.save(drift, "energy_drift.csv");
  if (coarse < 1e-12) {
    // Leapfrog is exact here (no force), so there is no error term to order.
    ctx.check.below("energy_drift_max", 1e-12, [&] { return coarse; });
  } else {
    ctx.check.within("energy_drift_order", p["drift_window"][0].get<double>(), p["drift_window"][1].get<double>(),
                     [&] { return coarse / fine; }, "drift ratio when dt halves");
  }

  // rho(z, t) = rho0(Phi_{-t} z), probed at points carried along by the flow.
  csv::Table liouville({"q", "p", "t", "density", "residual"});
  ctx.check.below("liouville_residual_max", p["liouville_tol"].get<double>(), [&] {
    const double step = p["liouville_step"].get<double>();
    const TimeDependentDensity rho = [&](const PhaseSpacePoint& z, double s) {
      return blob.evaluate(flow_map(h, z, -s, step));
    };
    double worst = 0.0;
    for (int i = 0; i < p["liouville_points"].get<int>(); ++i) {
      const PhaseSpacePoint z0 = center + sigma * point(rng.normal(), rng.normal());
      const double s = rng.uniform(0.1 * t, 0.9 * t);
      const PhaseSpacePoint z = flow_map(h, z0, s, dt);
      const LiouvilleResidual r = liouville_residual(h, rho, z, s, step);
      worst = std::max(worst, r.residual);
      liouville.row(std::vector<double>{z(0), z(1), s, rho(z, s), r.residual});
    }
    return worst;
  });
  ctx.out.save(liouville, "liouville_residual.csv");

  // Clock branches: system blobs paired with a harmonic clock blob on a ring.
  const SystemId clock_id = parse_system_id(p["clock_system"].get<std::string>());
  if (clock_id.kind != SystemId::Kind::Harmonic) {
    fail(ErrorCode::UnsupportedSystem, "clock_system must be a harmonic oscillator");
  }
  const HamiltonianField hc = make_system(clock_id);
  const int n_branches = p["branches"].get<int>();
  const double tau = 2.0 * std::numbers::pi / (clock_id.omega * n_branches);
  const double branch_dt = tau / 200;
  const PhaseSpaceDensity system0 =
      gaussian_samples(center, p["branch_sigma"].get<double>(), p["branch_nodes"].get<int>(),
                       p["branch_span"].get<double>(), p["branch_bandwidth"].get<double>());
  const double radius = p["clock_radius"].get<double>();
  const PhaseSpaceDensity clock0 =
      gaussian_samples(point(radius, 0.0), p["clock_sigma"].get<double>(), p["branch_nodes"].get<int>(),
                       p["branch_span"].get<double>(), p["clock_bandwidth"].get<double>());
  auto ring = [&](double offset) {
    std::vector<Branch> branches;
    const auto probs = uniform_probabilities(static_cast<std::size_t>(n_branches));
    for (int k = 0; k < n_branches; ++k) {
      const double tk = offset + k * tau;
      branches.push_back(Branch{probs[static_cast<std::size_t>(k)],
                                propagate_density(h, system0, tk, branch_dt).density,
                                propagate_density(hc, clock0, tk, branch_dt).density, tk});
    }
    return build_joint_density(std::move(branches));
  };
  const JointDensity joint = ring(0.0);
  ctx.check.below("clock_overlap_ratio_max", p["overlap_tol"].get<double>(), [&] { return joint.max_clock_overlap(); });

  std::vector<const PhaseSpaceDensity*> systems, clocks;
  for (const Branch& b : joint.branches()) {
    systems.push_back(&b.system);
    clocks.push_back(&b.clock);
  }
  const BoundingBox sys_box = box_around(systems, 0.0);
  const std::vector<int> sys_res = resolution_for(sys_box, p["branch_bandwidth"].get<double>() / 2, 120);

  csv::Table conditioning({"branch", "label", "probability", "l1"});
  ctx.check.below("conditioning_l1_max", p["conditioning_tol"].get<double>(), [&] {
    double worst = 0.0;
    for (std::size_t k = 0; k < joint.size(); ++k) {
      const Branch& b = joint.branches()[k];
      const double l1 = l1_distance(condition_on_clock_density(joint, k), b.system, sys_box, sys_res);
      worst = std::max(worst, l1);
      conditioning.row(std::vector<double>{static_cast<double>(k), b.label, b.probability, l1});
    }
    return worst;
  });
  ctx.out.save(conditioning, "conditioning.csv");

  ctx.check.below("relational_sync_l1", p["sync_tol"].get<double>(), [&] {
    const JointDensity shifted = propagate_branches(joint, h, hc, tau, branch_dt);
    const JointDensity relabelled = ring(tau);
    std::vector<const PhaseSpaceDensity*> s2 = systems, c2 = clocks;
    for (const auto* j : {&shifted, &relabelled}) {
      for (const Branch& b : j->branches()) {
        s2.push_back(&b.system);
        c2.push_back(&b.clock);
      }
    }
    const BoundingBox sb = box_around(s2, 0.0);
    const BoundingBox cb = box_around(c2, 0.0);
    return joint_l1_upper_bound(shifted, relabelled, sb, resolution_for(sb, p["branch_bandwidth"].get<double>() / 2, 120),
                                cb, resolution_for(cb, p["clock_bandwidth"].get<double>() / 2, 120));
  });

  const BoundingBox clock_box = box_around(clocks, 0.0);
  const double joint_h = joint_entropy(joint, sys_box, resolution_for(sys_box, 0.125, 48), clock_box,
                                       resolution_for(clock_box, 0.4, 100));
  csv::Table entropy({"branch", "label", "system_entropy", "joint_entropy"});
  double max_branch = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < joint.size(); ++k) {
    const Branch& b = joint.branches()[k];
    const double hb = mixedness(b.system).entropy;
    max_branch = std::max(max_branch, hb);
    entropy.row(std::vector<double>{static_cast<double>(k), b.label, hb, joint_h});
  }
  ctx.out.save(entropy, "entropy.csv");
  ctx.check.above("joint_minus_branch_entropy", 0.0, [&] { return joint_h - max_branch; },
                  "joint differential entropy exceeds every conditional branch entropy");
}

}  // namespace timeless::harness
