#include <cmath>

#include "qconserve/error.hpp"
#include "qconserve/scenarios.hpp"

namespace qconserve {

void GaussianPacketSpec::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("packet width a must be positive");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ValidationError("mass must be positive");
  grid.validate();
  if (!grid.periodic) throw ValidationError("free-packet grid must be periodic");
  if (!(detect_time > 0.0) || !std::isfinite(detect_time)) throw ValidationError("detect_time must be positive");
  if (!(window_width > 0.0) || !std::isfinite(window_width)) throw ValidationError("window_width must be positive");
  if (!std::isfinite(window_center) || window_center - 0.5 * window_width < grid.lower_edge() ||
      window_center + 0.5 * window_width > grid.upper_edge()) {
    throw ValidationError("detection window must lie inside the grid");
  }
  if (a < 8.0 * grid.spacing()) throw ValidationError("packet width must cover at least 8 grid spacings");
  if (steps == 0 || snapshots == 0) throw ValidationError("steps and snapshots must be positive");
  const double tau = detect_time / (2.0 * mass * a * a);
  const double sigma_t = a * std::sqrt(1.0 + tau * tau);
  if (0.5 * grid.length < 6.0 * sigma_t) {
    throw NumericalGuardError("packet reaches the grid boundary before detect_time (needs 6 sigma(t) clearance)");
  }
}

StateVector gaussian_packet(const GridSpec& grid, double a, double center) {
  SpaceLayout layout({Factor::on_grid("particle", grid)});
  ComplexVector amps(static_cast<Eigen::Index>(grid.points));
  for (std::size_t j = 0; j < grid.points; ++j) {
    const double x = grid.coordinate(j) - center;
    amps[static_cast<Eigen::Index>(j)] = std::exp(-x * x / (4.0 * a * a));
  }
  return StateVector(std::move(layout), std::move(amps)).normalized();
}

FreePacketReport run_free_packet(const GaussianPacketSpec& spec) {
  spec.validate();
  const GridSpec& grid = spec.grid;
  const StateVector psi0 = gaussian_packet(grid, spec.a);
  const SpaceLayout& layout = psi0.layout();

  const GridOperators ops = grid_operators(grid, spec.mass);
  const HermitianOperator p = ops.momentum.on("particle");
  const HermitianOperator kinetic = ops.kinetic.on("particle");
  const HermitianOperator x_sq = grid_function(grid, [](double v) { return v * v; }).on("particle");
  const HermitianOperator p_sq = momentum_function(grid, [](double k) { return k * k; }).on("particle");

  ConservationLedger ledger;
  ledger.track(LedgerEntry::sum_form("momentum", layout, {{"particle", ops.momentum}}), kinetic);
  ledger.track(LedgerEntry::sum_form("momentum_squared", layout, {{"particle", p_sq}}), kinetic);
  ledger.track(LedgerEntry::sum_form("kinetic_energy", layout, {{"particle", ops.kinetic}}), kinetic);
  ledger.track(LedgerEntry::sum_form("position", layout, {{"particle", ops.position}}), kinetic);
  ledger.snapshot(0.0, psi0);

  EvolutionPlan plan;
  plan.duration = spec.detect_time;
  plan.steps = spec.steps;
  plan.method = EvolutionMethod::split_step;
  plan.mass = spec.mass;
  plan.potential = RealVector::Zero(static_cast<Eigen::Index>(grid.points));
  const std::size_t every = std::max<std::size_t>(1, spec.steps / spec.snapshots);
  const StateVector psi_t = evolve(plan, psi0, [&](double t, const StateVector& s) { ledger.snapshot(t, s); }, every);

  FreePacketReport rep;
  const double tau = spec.detect_time / (2.0 * spec.mass * spec.a * spec.a);
  rep.width_at_detection = spec.a * std::sqrt(1.0 + tau * tau);
  rep.position_sq_at_detection = expectation(x_sq, psi_t);
  rep.global_momentum_at_detection = expectation(p, psi_t);
  rep.predicted_momentum = spec.mass * spec.window_center / spec.detect_time;
  rep.initial_momentum_sq = 1.0 / (4.0 * spec.a * spec.a);

  const double lo = spec.window_center - 0.5 * spec.window_width;
  const double hi = spec.window_center + 0.5 * spec.window_width;
  const ProjectorSet window = window_projector(grid, lo, hi, layout, "particle");
  const auto branches = measure(psi_t, window);
  rep.window_probability = branches.front().probability;
  if (!branches.front().is_null()) {
    const StateVector& segment = *branches.front().state;
    rep.segment_momentum = expectation(p, segment);
    rep.segment_momentum_sq = expectation(p_sq, segment);
  }
  rep.momentum_difference = rep.segment_momentum - rep.predicted_momentum;
  rep.momentum_audit = total_expectation_audit(psi_t, window, p);
  rep.kinetic_audit = total_expectation_audit(psi_t, window, kinetic);

  ledger.record_measurement("window_detection", branches, psi_t, &window, &psi0);
  rep.ledger = ledger.report();
  return rep;
}

}  // namespace qconserve
