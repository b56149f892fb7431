#include <cmath>
#include <numbers>

#include "qconserve/error.hpp"
#include "qconserve/scenarios.hpp"

namespace qconserve {

namespace {

constexpr Eigen::Index spin_up = 0;

ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

// Generator G of the cyclic shift C|m> = |m+1 mod n>, exp(-iG) = C exactly.
// Eigenphases 2 pi q / n with q taken symmetric around zero.
ComplexMatrix cyclic_shift_generator(Eigen::Index n) {
  ComplexMatrix g = ComplexMatrix::Zero(n, n);
  if (n < 2) return g;
  const double dn = static_cast<double>(n);
  for (Eigen::Index q = 0; q < n; ++q) {
    const Eigen::Index qs = (2 * q > n) ? q - n : q;
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(qs) / dn;
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(q * (a - b)) / dn;
        g(a, b) += theta * std::polar(1.0, phase) / dn;
      }
    }
  }
  return 0.5 * (g + g.adjoint());
}

// A pair of ladders (particle, apparatus) exchanging quanta; sectors of
// constant j + k, ordered by the particle index.
struct LadderPair {
  Eigen::Index dp = 0;
  Eigen::Index da = 0;

  // Local matrix on the dp*da pair space of sigma * G_sector (sign picks direction).
  [[nodiscard]] std::vector<Eigen::Triplet<Complex>> generator(double sign) const {
    std::vector<Eigen::Triplet<Complex>> out;
    for (Eigen::Index total = 0; total <= dp + da - 2; ++total) {
      std::vector<Eigen::Index> members;  // pair index j*da + k
      for (Eigen::Index j = 0; j < dp; ++j) {
        const Eigen::Index k = total - j;
        if (k >= 0 && k < da) members.push_back(j * da + k);
      }
      const auto n = static_cast<Eigen::Index>(members.size());
      if (n < 2) continue;
      const ComplexMatrix g = cyclic_shift_generator(n);
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
          if (std::abs(g(a, b)) > 0.0) out.emplace_back(members[a], members[b], sign * g(a, b));
        }
      }
    }
    return out;
  }
};

ComplexVector mode_state(std::size_t dim, double spread) {
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  const double c = 0.5 * static_cast<double>(dim - 1);
  if (spread <= 0.0) {
    v[static_cast<Eigen::Index>(dim / 2)] = 1.0;
    return v;
  }
  for (std::size_t j = 0; j < dim; ++j) {
    const double d = static_cast<double>(j) - c;
    v[static_cast<Eigen::Index>(j)] = std::exp(-d * d / (4.0 * spread * spread));
  }
  v.normalize();
  return v;
}

}  // namespace

void SternGerlachSpec::validate() const {
  if (!(kick > 0.0) || !std::isfinite(kick)) throw ValidationError("kick must be positive");
  auto odd_ladder = [](std::size_t d, const char* what) {
    if (d < 3 || d % 2 == 0) throw ValidationError(std::string(what) + " must be odd and at least 3");
  };
  odd_ladder(particle_mode_dim, "particle_mode_dim");
  odd_ladder(apparatus_mode_dim, "apparatus_mode_dim");
  if (angular_ladder) odd_ladder(angular_mode_dim, "angular_mode_dim");
  if (!(pointer_spread >= 0.0) || !std::isfinite(pointer_spread)) {
    throw ValidationError("pointer_spread must be finite and non-negative");
  }
  if (interaction_steps == 0) throw ValidationError("interaction_steps must be positive");
  std::size_t dim = 2 * particle_mode_dim * apparatus_mode_dim;
  if (angular_ladder) dim *= angular_mode_dim * angular_mode_dim;
  if (dim > SpaceLayout::max_total_dimension) throw ValidationError("ladder dimensions exceed the dense cap");
}

SternGerlachReport run_stern_gerlach(const SternGerlachSpec& spec) {
  spec.validate();
  const auto dp = static_cast<Eigen::Index>(spec.particle_mode_dim);
  const auto da = static_cast<Eigen::Index>(spec.apparatus_mode_dim);
  const Eigen::Index dl = spec.angular_ladder ? static_cast<Eigen::Index>(spec.angular_mode_dim) : 1;
  const Eigen::Index angular_block = dl * dl;

  std::vector<Factor> factors{Factor::discrete("spin", 2), Factor::discrete("particle", spec.particle_mode_dim),
                              Factor::discrete("apparatus", spec.apparatus_mode_dim)};
  if (spec.angular_ladder) {
    factors.push_back(Factor::discrete("particle_angular", spec.angular_mode_dim));
    factors.push_back(Factor::discrete("apparatus_angular", spec.angular_mode_dim));
  }
  const SpaceLayout layout(factors);
  const Eigen::Index linear_block = dp * da;
  const Eigen::Index spin_block = linear_block * angular_block;
  const Eigen::Index dim = 2 * spin_block;

  // Initial state: spin along +x, every ladder at its centre (or a Gaussian around it).
  const ComplexVector up_x = (ComplexVector(2) << 1.0, 1.0).finished() / std::numbers::sqrt2;
  ComplexVector modes = kron(mode_state(spec.particle_mode_dim, spec.pointer_spread),
                                     mode_state(spec.apparatus_mode_dim, spec.pointer_spread));
  if (spec.angular_ladder) {
    modes = kron(modes, kron(mode_state(spec.angular_mode_dim, spec.pointer_spread),
                                             mode_state(spec.angular_mode_dim, spec.pointer_spread)));
  }
  const StateVector psi0(layout, kron(up_x, modes));

  // Edge guard: an up kick needs room for particle +1 and apparatus -1, a down kick the reverse.
  double violating = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Eigen::Index s = i / spin_block;
    const Eigen::Index rem = i % spin_block;
    const Eigen::Index pair = rem / angular_block;
    const Eigen::Index ang = rem % angular_block;
    const Eigen::Index j = pair / da;
    const Eigen::Index k = pair % da;
    const Eigen::Index lj = ang / dl;
    const Eigen::Index lk = ang % dl;
    const Eigen::Index step = (s == spin_up) ? 1 : -1;
    bool out = j + step < 0 || j + step >= dp || k - step < 0 || k - step >= da;
    if (spec.angular_ladder) out = out || lj + step < 0 || lj + step >= dl || lk - step < 0 || lk - step >= dl;
    if (out) violating += std::norm(psi0.amplitudes()[i]);
  }
  if (std::sqrt(violating) > 1e-10) {
    throw NumericalGuardError("mode state reaches the edge of a momentum ladder");
  }

  // H = sum_s |s><s| (x) sigma_s (G_linear (x) 1 + 1 (x) G_angular), one unit of
  // interaction time giving the full kick.
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (Eigen::Index s = 0; s < 2; ++s) {
    const double sign = (s == spin_up) ? 1.0 : -1.0;
    for (const auto& t : LadderPair{dp, da}.generator(sign)) {
      for (Eigen::Index a = 0; a < angular_block; ++a) {
        triplets.emplace_back(s * spin_block + t.row() * angular_block + a,
                              s * spin_block + t.col() * angular_block + a, t.value());
      }
    }
    if (spec.angular_ladder) {
      for (const auto& t : LadderPair{dl, dl}.generator(sign)) {
        for (Eigen::Index m = 0; m < linear_block; ++m) {
          triplets.emplace_back(s * spin_block + m * angular_block + t.row(),
                                s * spin_block + m * angular_block + t.col(), t.value());
        }
      }
    }
  }
  SparseMatrix generator(dim, dim);
  generator.setFromTriplets(triplets.begin(), triplets.end());
  const HermitianOperator h = HermitianOperator::sparse(layout, std::move(generator));

  const HermitianOperator p_particle = ladder_observable(spec.particle_mode_dim, spec.kick);
  const HermitianOperator p_apparatus = ladder_observable(spec.apparatus_mode_dim, spec.kick);

  ConservationLedger ledger;
  ledger.track(LedgerEntry::sum_form("p_z", layout, {{"particle", p_particle}, {"apparatus", p_apparatus}}), h);
  ledger.track(LedgerEntry::sum_form("sigma_z", layout, {{"spin", pauli_z()}}), h);
  ledger.track(LedgerEntry::sum_form("sigma_x", layout, {{"spin", pauli_x()}}), h);
  if (spec.angular_ladder) {
    ledger.track(LedgerEntry::sum_form("L_z", layout,
                                       {{"particle_angular", ladder_observable(spec.angular_mode_dim, 1.0)},
                                        {"apparatus_angular", ladder_observable(spec.angular_mode_dim, 1.0)}}),
                 h);
  }
  ledger.snapshot(0.0, psi0);

  EvolutionPlan plan{h, 1.0, spec.interaction_steps, EvolutionMethod::exact};
  const StateVector psi1 = evolve(plan, psi0, [&](double t, const StateVector& s) { ledger.snapshot(t, s); });

  const HermitianOperator& total_p = ledger.entry("p_z").observable;
  const HermitianOperator particle_p = p_particle.on("particle");
  const HermitianOperator apparatus_p = p_apparatus.on("apparatus");

  SternGerlachReport rep;
  rep.initial_sigma_z = expectation(pauli_z().on("spin"), psi0);
  rep.initial_sigma_x = expectation(pauli_x().on("spin"), psi0);
  rep.initial_total_momentum = expectation(total_p, psi0);
  rep.post_total_momentum = expectation(total_p, psi1);
  rep.post_particle_momentum = expectation(particle_p, psi1);
  rep.post_apparatus_momentum = expectation(apparatus_p, psi1);
  rep.post_sigma_x = expectation(pauli_x().on("spin"), psi1);
  rep.momentum_drift = std::abs(rep.post_total_momentum - rep.initial_total_momentum);

  const ComplexVector chi_up = psi1.amplitudes().segment(0, spin_block);
  const ComplexVector chi_down = psi1.amplitudes().segment(spin_block, spin_block);
  const double nu = chi_up.norm();
  const double nd = chi_down.norm();
  rep.pointer_overlap = (nu > 0.0 && nd > 0.0) ? chi_up.dot(chi_down).real() / (nu * nd) : 0.0;

  // Detector: sign of the particle momentum.
  std::vector<std::size_t> outcome(spec.particle_mode_dim);
  for (std::size_t j = 0; j < outcome.size(); ++j) outcome[j] = (j > spec.particle_mode_dim / 2) ? 0 : 1;
  const ProjectorSet detector = on_factor(partition_projectors(outcome, {"z-up", "z-down"}), "particle");
  const auto branches = measure(psi1, detector);
  ledger.record_measurement("momentum_sign_detection", branches, psi1, &detector, &psi0);

  const double pre_particle = expectation(particle_p, psi0);
  const double pre_apparatus = expectation(apparatus_p, psi0);
  std::optional<HermitianOperator> lp;
  std::optional<HermitianOperator> la;
  double pre_lp = 0.0;
  double pre_la = 0.0;
  if (spec.angular_ladder) {
    lp = ladder_observable(spec.angular_mode_dim, 1.0).on("particle_angular");
    la = ladder_observable(spec.angular_mode_dim, 1.0).on("apparatus_angular");
    pre_lp = expectation(*lp, psi0);
    pre_la = expectation(*la, psi0);
  }
  for (const auto& b : branches) {
    LadderBranch lb;
    lb.label = b.label;
    lb.probability = b.probability;
    if (!b.is_null()) {
      lb.particle_delta = expectation(particle_p, *b.state) - pre_particle;
      lb.apparatus_delta = expectation(apparatus_p, *b.state) - pre_apparatus;
      lb.total_change = expectation(total_p, *b.state) - rep.initial_total_momentum;
      if (spec.angular_ladder) {
        lb.angular_particle_delta = expectation(*lp, *b.state) - pre_lp;
        lb.angular_apparatus_delta = expectation(*la, *b.state) - pre_la;
        lb.angular_total_change = lb.angular_particle_delta + lb.angular_apparatus_delta;
      }
    }
    rep.branches.push_back(std::move(lb));
  }
  rep.ledger = ledger.report();
  return rep;
}

}  // namespace qconserve
