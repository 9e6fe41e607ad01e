#include <cmath>

#include "scenarios.hpp"
#include "timeless/extended_hj.hpp"

namespace timeless::harness {

using namespace hj;

void run_extended(ScenarioContext& ctx) {
  const auto& p = ctx.cfg.params;
  const HamiltonianField h = make_system(p["system"].get<std::string>());
  const long steps = p["steps"].get<long>();
  const double dtau = p["dtau"].get<double>();
  const double tau = dtau * static_cast<double>(steps);

  ExtendedPhaseState x0;
  x0.q = RealVector::Constant(1, p["initial"][0].get<double>());
  x0.p = RealVector::Constant(1, p["initial"][1].get<double>());
  x0.t = p["t0"].get<double>();
  PhaseSpacePoint z0(2);
  z0 << x0.q(0), x0.p(0);
  // Start on the constraint surface.
  x0.p0 = -h.evaluate(z0);

  ctx.check.below("constraint_initial", p["constraint_tol"].get<double>(),
                  [&] { return std::abs(constraint_value(h, x0)); });

  const ExtendedTrajectory tr = extended_flow(extend(h), x0, tau, dtau, p["stride"].get<long>());
  csv::Table trajectory({"tau", "q", "p", "t", "p0", "constraint"});
  double worst_constraint = 0.0;
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const ExtendedPhaseState& x = tr.states[i];
    const double c = constraint_value(h, x);
    worst_constraint = std::max(worst_constraint, std::abs(c));
    trajectory.row(std::vector<double>{x.t - x0.t, x.q(0), x.p(0), x.t, x.p0, c});
  }
  ctx.out.save(trajectory, "trajectory.csv");

  ctx.check.below("p0_drift", p["p0_tol"].get<double>(), [&] { return tr.p0_drift; });
  ctx.check.below("clock_step_error_max", p["clock_step_tol"].get<double>(), [&] { return tr.max_clock_step_error; });
  ctx.check.below("constraint_drift_max", p["constraint_drift_tol"].get<double>(), [&] { return worst_constraint; },
                  "leapfrog energy error carried into H + p0");
  ctx.check.below("reduction_deviation_max", p["reduction_tol"].get<double>(),
                  [&] { return reduction_deviation(h, x0, tau, dtau); });
}

void run_hj_correlation(ScenarioContext& ctx) {
  const auto& p = ctx.cfg.params;
  const SystemId base = parse_system_id(p["system"].get<std::string>());
  const MirrorPair pair = make_mirror_pair(base);
  const double e1 = p["e1"].get<double>();

  csv::Table correlation({"q1", "q2", "e1", "e2", "t1", "t2", "sum", "constant", "residual", "t1_closed_form"});
  double worst_residual = 0.0;
  double worst_closed = 0.0;
  bool has_closed = false;
  for (const auto& qv : p["q"]) {
    const double q = qv.get<double>();
    const TimeCorrelation c = time_correlation_check(pair, q, q, e1);
    worst_residual = std::max(worst_residual, c.residual);
    const auto exact = hj_time_analytic(pair.first, q, e1);
    if (exact) {
      has_closed = true;
      worst_closed = std::max(worst_closed, std::abs(c.t1 - *exact));
    }
    correlation.row(std::vector<double>{q, q, e1, -e1, c.t1, c.t2, c.t1 + c.t2, c.constant, c.residual,
                                        exact ? *exact : std::nan("")});
  }
  ctx.out.save(correlation, "correlation.csv");
  ctx.check.below("correlation_residual_max", p["residual_tol"].get<double>(), [&] { return worst_residual; });
  if (has_closed) {
    ctx.check.below("t1_closed_form_error", p["closed_form_tol"].get<double>(), [&] { return worst_closed; });
  }

  // Finite-difference order against the closed form, at the largest listed q.
  double q_probe = 0.0;
  for (const auto& qv : p["q"]) q_probe = std::max(q_probe, std::abs(qv.get<double>()));
  if (const auto exact = hj_time_analytic(pair.first, q_probe, e1); exact && q_probe > 0.0) {
    csv::Table order({"dE", "t_fd", "t_exact", "error"});
    double err[2];
    for (int i = 0; i < 2; ++i) {
      const double step = p["order_steps"][i].get<double>();
      const double fd = hj_time_fd(pair.first, q_probe, e1, step);
      err[i] = std::abs(fd - *exact);
      order.row(std::vector<double>{step, fd, *exact, err[i]});
    }
    ctx.out.save(order, "fd_convergence.csv");
    const double ratio_expected = std::pow(p["order_steps"][0].get<double>() / p["order_steps"][1].get<double>(), 2);
    ctx.check.within("fd_order_ratio", p["order_window"][0].get<double>() * ratio_expected / 4.0,
                     p["order_window"][1].get<double>() * ratio_expected / 4.0, [&] { return err[0] / err[1]; },
                     "error ratio between the two energy steps");
  }

  // E1 -> E1 + delta, E2 -> E2 - delta leaves t1 + t2 unchanged.
  csv::Table exchange({"q", "delta", "sum_shift"});
  ctx.check.below("energy_exchange_shift_max", p["exchange_tol"].get<double>(), [&] {
    double worst = 0.0;
    for (const auto& qv : p["q"]) {
      const double q = qv.get<double>();
      const TimeCorrelation ref = time_correlation_check(pair, q, q, e1);
      for (const auto& dv : p["exchange_deltas"]) {
        const double delta = dv.get<double>();
        const TimeCorrelation moved = time_correlation_check(pair, q, q, e1 + delta);
        const double shift = std::abs((moved.t1 + moved.t2) - (ref.t1 + ref.t2));
        worst = std::max(worst, shift);
        exchange.row(std::vector<double>{q, delta, shift});
      }
    }
    return worst;
  });
  ctx.out.save(exchange, "energy_exchange.csv");
}

}  // namespace timeless::harness
