#include <cmath>

#include "qconserve/error.hpp"
#include "qconserve/scenarios.hpp"

namespace qconserve {

namespace {

std::size_t next_power_of_two(double x) {
  std::size_t n = 16;
  while (static_cast<double>(n) < x) n <<= 1;
  return n;
}

struct ApparatusGrid {
  std::size_t points = 0;
  double spacing = 0.0;
  std::size_t shift = 0;  // kick in grid bins

  [[nodiscard]] double momentum(std::size_t j) const {
    return (static_cast<double>(j) - static_cast<double>(points / 2)) * spacing;
  }
};

ApparatusGrid apparatus_grid(const MachZehnderSpec& spec) {
  ApparatusGrid g;
  if (spec.kick > 0.0) {
    const auto sub = static_cast<std::size_t>(std::max(1.0, std::ceil(8.0 * spec.kick / spec.apparatus_sigma_p)));
    g.spacing = spec.kick / static_cast<double>(sub);
    g.shift = sub;
  } else {
    g.spacing = spec.apparatus_sigma_p / 8.0;
  }
  const double half_width = 10.0 * spec.apparatus_sigma_p + 2.0 * spec.kick;
  g.points = next_power_of_two(2.0 * half_width / g.spacing);
  if (2 * g.points > SpaceLayout::max_total_dimension) {
    throw ValidationError("kick and apparatus spread need more momentum bins than the dense cap allows");
  }
  return g;
}

}  // namespace

void MachZehnderSpec::validate() const {
  if (!(kick >= 0.0) || !std::isfinite(kick)) throw ValidationError("kick must be finite and non-negative");
  if (!(apparatus_sigma_p > 0.0) || !std::isfinite(apparatus_sigma_p)) {
    throw ValidationError("apparatus_sigma_p must be positive");
  }
  if (std::abs(std::norm(amp_r) + std::norm(amp_t) - 1.0) > 1e-9) {
    throw ValidationError("branch amplitudes must be normalized");
  }
  if (interaction_steps == 0) throw ValidationError("interaction_steps must be positive");
  (void)apparatus_grid(*this);
}

MachZehnderReport run_mach_zehnder(const MachZehnderSpec& spec) {
  spec.validate();
  const ApparatusGrid grid = apparatus_grid(spec);
  const auto P = static_cast<Eigen::Index>(grid.points);
  const SpaceLayout layout({Factor::discrete("photon", 2), Factor::discrete("apparatus", grid.points)});
  constexpr Eigen::Index reflected = 0;
  constexpr Eigen::Index transmitted = 1;

  ComplexVector pointer(P);
  for (Eigen::Index j = 0; j < P; ++j) {
    const double p = grid.momentum(static_cast<std::size_t>(j));
    pointer[j] = std::exp(-p * p / (4.0 * spec.apparatus_sigma_p * spec.apparatus_sigma_p));
  }
  pointer.normalize();

  ComplexVector initial = ComplexVector::Zero(2 * P);
  initial.segment(transmitted * P, P) = pointer;
  const StateVector psi0(layout, initial);

  const auto shift = static_cast<Eigen::Index>(grid.shift);
  if (shift > 0 && pointer.head(shift).norm() > 1e-10) {
    throw NumericalGuardError("apparatus pointer reaches the edge of its momentum grid");
  }

  // Each sector {|t, p>, |r, p - kick>} holds the same total momentum; the
  // generator rotates within sectors only.
  const double theta = std::atan2(std::abs(spec.amp_r), std::abs(spec.amp_t));
  const double beta = std::arg(spec.amp_r) - std::arg(spec.amp_t);
  const Complex forward = Complex(0.0, 1.0) * std::polar(1.0, beta);
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (Eigen::Index j = shift; j < P; ++j) {
    const Eigen::Index t_idx = transmitted * P + j;
    const Eigen::Index r_idx = reflected * P + (j - shift);
    triplets.emplace_back(r_idx, t_idx, forward);
    triplets.emplace_back(t_idx, r_idx, std::conj(forward));
  }
  SparseMatrix generator(2 * P, 2 * P);
  generator.setFromTriplets(triplets.begin(), triplets.end());
  const HermitianOperator h = HermitianOperator::sparse(layout, std::move(generator));

  RealVector apparatus_p(P);
  for (Eigen::Index j = 0; j < P; ++j) apparatus_p[j] = grid.momentum(static_cast<std::size_t>(j));
  const HermitianOperator photon_p = HermitianOperator::diagonal((RealVector(2) << spec.kick, 0.0).finished());
  const HermitianOperator app_p = HermitianOperator::diagonal(apparatus_p);

  ConservationLedger ledger;
  ledger.track(LedgerEntry::sum_form("momentum", layout, {{"photon", photon_p}, {"apparatus", app_p}}), h);
  ledger.track(LedgerEntry::plain("reflected_population",
                                  embed(HermitianOperator::diagonal((RealVector(2) << 1.0, 0.0).finished()), layout,
                                        "photon")),
               h);
  ledger.snapshot(0.0, psi0);

  EvolutionPlan plan{h, theta, spec.interaction_steps, EvolutionMethod::exact};
  const StateVector psi1 =
      evolve(plan, psi0, [&](double t, const StateVector& s) { ledger.snapshot(t, s); });

  MachZehnderReport rep;
  rep.apparatus_points = grid.points;
  rep.momentum_spacing = grid.spacing;

  const ComplexVector r_part = psi1.amplitudes().segment(reflected * P, P);
  const ComplexVector t_part = psi1.amplitudes().segment(transmitted * P, P);
  const double pr = r_part.squaredNorm();
  const double pt = t_part.squaredNorm();
  if (pr > 0.0 && pt > 0.0) {
    const Complex g = r_part.dot(t_part) / std::sqrt(pr * pt);
    rep.overlap = std::abs(g);
  } else {
    rep.overlap = 1.0;
  }
  rep.epsilon = std::max(0.0, 1.0 - rep.overlap);
  rep.entropy_exact = entropy(psi1, Bipartition{1});
  rep.entropy_approx = epsilon_entropy_approx(OverlapDeficit(rep.epsilon));
  rep.entropy_relative_error =
      rep.entropy_exact > 0.0 ? std::abs(rep.entropy_approx - rep.entropy_exact) / rep.entropy_exact : 0.0;
  rep.visibility = 2.0 * std::sqrt(pr * pt) * rep.overlap;

  const HermitianOperator total_p = ledger.entry("momentum").observable;
  rep.pre_interaction_momentum = expectation(total_p, psi0);
  rep.post_interaction_momentum = expectation(total_p, psi1);

  const ProjectorSet path = on_factor(basis_projectors(2, {"reflected", "transmitted"}), "photon");
  const auto branches = measure(psi1, path);
  ledger.record_measurement("photon_detection", branches, psi1, &path, &psi0);

  for (const auto& b : branches) {
    MomentumBranch mb;
    mb.label = b.label;
    mb.probability = b.probability;
    if (!b.is_null()) {
      mb.photon = expectation(photon_p.on("photon"), *b.state);
      mb.apparatus = expectation(app_p.on("apparatus"), *b.state);
      mb.total = expectation(total_p, *b.state);
      mb.change_from_pre_interaction = mb.total - rep.pre_interaction_momentum;
    }
    if (b.label == "reflected") {
      rep.reflected_probability = b.probability;
      if (!b.is_null()) {
        ComplexVector collapsed = b.state->amplitudes().segment(reflected * P, P);
        ComplexVector ideal = ComplexVector::Zero(P);
        ideal.head(P - shift) = pointer.tail(P - shift);
        ideal.normalize();
        const double ov = std::abs(ideal.dot(collapsed)) / collapsed.norm();
        rep.collapsed_fidelity = ov * ov;
      }
    }
    rep.branches.push_back(std::move(mb));
  }
  rep.ledger = ledger.report();
  return rep;
}

}  // namespace qconserve
