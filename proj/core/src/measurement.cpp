#include "qconserve/measurement.hpp"

#include <cmath>

#include "qconserve/error.hpp"

namespace qconserve {

ProjectorSet::ProjectorSet(std::vector<std::string> labels, std::vector<HermitianOperator> projectors)
    : labels_(std::move(labels)), projectors_(std::move(projectors)) {
  if (labels_.empty() || labels_.size() != projectors_.size()) {
    throw ValidationError("projector set needs one label per projector");
  }
  HermitianOperator sum = projectors_.front();
  for (std::size_t i = 0; i < projectors_.size(); ++i) {
    const double idem = idempotency_defect(projectors_[i]);
    if (idem > tolerance) throw ValidationError("projector '" + labels_[i] + "' is not idempotent");
    for (std::size_t j = i + 1; j < projectors_.size(); ++j) {
      if (product_norm(projectors_[i], projectors_[j]) > tolerance) {
        throw ValidationError("projectors '" + labels_[i] + "' and '" + labels_[j] + "' are not orthogonal");
      }
    }
    if (i > 0) sum += projectors_[i];
  }
  const HermitianOperator identity =
      sum.is_local() ? HermitianOperator::identity(sum.dimension())
                     : HermitianOperator::from_terms(*sum.layout(), {OperatorTerm{"", DiagonalRep{RealVector::Ones(
                                                                          static_cast<Eigen::Index>(sum.dimension()))}}});
  if (frobenius_norm(sum - identity) > tolerance) throw ValidationError("projector set is not complete");
}

std::vector<Branch> measure(const StateVector& psi, const ProjectorSet& ps, double null_threshold) {
  require_normalized(psi, "measure");
  const double norm_sq = psi.amplitudes().squaredNorm();
  std::vector<Branch> out;
  out.reserve(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const HermitianOperator p = in_layout(ps.projectors()[i], psi.layout());
    ComplexVector projected = p.apply(psi.amplitudes());
    const double prob = projected.squaredNorm() / norm_sq;
    Branch b{ps.labels()[i], prob, std::nullopt};
    if (prob >= null_threshold && prob > 0.0) {
      projected /= projected.norm();
      b.state = StateVector(psi.layout(), std::move(projected));
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<Branch> measure_joint(const StateVector& psi, std::span<const ProjectorSet> sets) {
  if (sets.empty()) throw ValidationError("joint measurement needs at least one projector set");
  std::vector<Branch> current = measure(psi, sets.front());
  for (std::size_t s = 1; s < sets.size(); ++s) {
    std::vector<Branch> next;
    for (const auto& b : current) {
      if (b.is_null()) {
        for (const auto& l : sets[s].labels()) next.push_back(Branch{b.label + "," + l, 0.0, std::nullopt});
        continue;
      }
      for (auto& sub : measure(*b.state, sets[s])) {
        sub.label = b.label + "," + sub.label;
        sub.probability *= b.probability;
        if (sub.probability < Branch::null_threshold) sub.state.reset();
        next.push_back(std::move(sub));
      }
    }
    current = std::move(next);
  }
  return current;
}

std::size_t sample_outcome(std::span<const Branch> branches, std::mt19937_64& rng) {
  if (branches.empty()) throw ValidationError("no branches to sample from");
  std::vector<double> weights;
  for (const auto& b : branches) weights.push_back(b.probability);
  std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
  return dist(rng);
}

ProjectorSet basis_projectors(std::size_t dimension, std::vector<std::string> labels) {
  std::vector<std::size_t> outcome(dimension);
  for (std::size_t i = 0; i < dimension; ++i) outcome[i] = i;
  return partition_projectors(outcome, std::move(labels));
}

ProjectorSet partition_projectors(std::span<const std::size_t> outcome_of, std::vector<std::string> labels) {
  std::vector<HermitianOperator> projectors;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    RealVector v(static_cast<Eigen::Index>(outcome_of.size()));
    for (std::size_t i = 0; i < outcome_of.size(); ++i) v[static_cast<Eigen::Index>(i)] = outcome_of[i] == k ? 1.0 : 0.0;
    projectors.push_back(HermitianOperator::diagonal(std::move(v)));
  }
  for (const std::size_t o : outcome_of) {
    if (o >= labels.size()) throw ValidationError("partition refers to an outcome without a label");
  }
  return ProjectorSet(std::move(labels), std::move(projectors));
}

ProjectorSet spin_projectors(double theta, double phi) {
  const double nx = std::sin(theta) * std::cos(phi);
  const double ny = std::sin(theta) * std::sin(phi);
  const double nz = std::cos(theta);
  ComplexMatrix n_sigma(2, 2);
  n_sigma << nz, Complex(nx, -ny), Complex(nx, ny), -nz;
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  ComplexMatrix up = 0.5 * (id + n_sigma);
  ComplexMatrix down = 0.5 * (id - n_sigma);
  return ProjectorSet({"up", "down"}, {HermitianOperator::dense(std::move(up)), HermitianOperator::dense(std::move(down))});
}

ProjectorSet on_factor(const ProjectorSet& ps, const std::string& label) {
  std::vector<HermitianOperator> tagged;
  for (const auto& p : ps.projectors()) tagged.push_back(p.on(label));
  return ProjectorSet(ps.labels(), std::move(tagged));
}

ProjectorSet window_projector(const GridSpec& grid, double x_lo, double x_hi, const SpaceLayout& layout,
                              const std::string& at) {
  grid.validate();
  if (!(x_lo < x_hi)) throw ValidationError("window needs x_lo < x_hi");
  const Factor& f = layout.factor(at);
  if (f.dimension != grid.points) throw DimensionError("window grid does not match factor '" + at + "'");
  RealVector inside(static_cast<Eigen::Index>(grid.points));
  std::size_t count = 0;
  for (std::size_t j = 0; j < grid.points; ++j) {
    const double x = grid.coordinate(j);
    const bool in = x >= x_lo && x <= x_hi;
    inside[static_cast<Eigen::Index>(j)] = in ? 1.0 : 0.0;
    count += in ? 1 : 0;
  }
  if (count == 0) throw ValidationError("window contains no grid points");
  RealVector outside = RealVector::Ones(inside.size()) - inside;
  return ProjectorSet({"inside", "outside"}, {embed(HermitianOperator::diagonal(std::move(inside)), layout, at),
                                               embed(HermitianOperator::diagonal(std::move(outside)), layout, at)});
}

std::string AuditRecord::classification() const { return commuting ? "commuting" : "non-commuting projector"; }

AuditRecord total_expectation_audit(const StateVector& psi, const ProjectorSet& ps, const HermitianOperator& q) {
  require_normalized(psi, "expectation audit");
  AuditRecord rec;
  rec.pre_value = expectation(q, psi);
  // sum_i p_i <Q>_i - <Q> = -sum_{i != j} <P_i psi|Q|P_j psi>; the cross terms
  // are accumulated directly so a tiny branch is not lost to cancellation.
  const HermitianOperator q_full = in_layout(q, psi.layout());
  double cross = 0.0;
  for (const auto& p : ps.projectors()) {
    const ComplexVector branch = in_layout(p, psi.layout()).apply(psi.amplitudes());
    const ComplexVector rest = psi.amplitudes() - branch;
    cross += branch.dot(q_full.apply(rest)).real();
  }
  rec.difference = -cross;
  rec.branch_weighted = rec.pre_value + rec.difference;
  rec.commuting = true;
  for (const auto& p : ps.projectors()) {
    const double c = commutator_norm(q_full, in_layout(p, psi.layout()));
    rec.commutator_norms.push_back(c);
    rec.commuting = rec.commuting && c <= AuditRecord::commuting_tolerance;
  }
  return rec;
}

}  // namespace qconserve
