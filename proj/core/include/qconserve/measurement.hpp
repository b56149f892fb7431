#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qconserve/grid.hpp"
#include "qconserve/operators.hpp"
#include "qconserve/state.hpp"

namespace qconserve {

/// Complete set of mutually orthogonal projectors, one per outcome label.
/// Construction checks idempotency, orthogonality and completeness to 1e-9
/// (Frobenius) and throws ValidationError otherwise.
class ProjectorSet {
 public:
  static constexpr double tolerance = 1e-9;

  ProjectorSet(std::vector<std::string> labels, std::vector<HermitianOperator> projectors);

  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] const std::vector<HermitianOperator>& projectors() const { return projectors_; }
  [[nodiscard]] std::size_t size() const { return labels_.size(); }

 private:
  std::vector<std::string> labels_;
  std::vector<HermitianOperator> projectors_;
};

/// One measurement outcome. `state` is empty for outcomes whose probability
/// is below `null_threshold`.
struct Branch {
  static constexpr double null_threshold = 1e-14;

  std::string label;
  double probability = 0.0;
  std::optional<StateVector> state;

  [[nodiscard]] bool is_null() const { return !state.has_value(); }
};

/// Branch decomposition with Born weights ||P_i psi||^2 and renormalized
/// collapsed states P_i psi / ||P_i psi||, in projector-set order. Outcomes
/// with probability below `null_threshold` carry no state.
std::vector<Branch> measure(const StateVector& psi, const ProjectorSet& ps,
                            double null_threshold = Branch::null_threshold);

/// Successive measurements of commuting projector sets (typically on
/// different factors). Labels are joined with ','.
std::vector<Branch> measure_joint(const StateVector& psi, std::span<const ProjectorSet> sets);

/// Draws a branch index from Born weights.
std::size_t sample_outcome(std::span<const Branch> branches, std::mt19937_64& rng);

/// Computational-basis projectors |i><i| on a local space.
ProjectorSet basis_projectors(std::size_t dimension, std::vector<std::string> labels);

/// Diagonal projectors grouping basis index i into outcome outcome_of[i].
ProjectorSet partition_projectors(std::span<const std::size_t> outcome_of, std::vector<std::string> labels);

/// Spin-1/2 projectors {up, down} along the unit direction (theta, phi).
ProjectorSet spin_projectors(double theta, double phi);

/// Tags every projector of a local set with a factor label.
ProjectorSet on_factor(const ProjectorSet& ps, const std::string& label);

/// {inside, outside} indicator projectors of grid points with x in [x_lo, x_hi].
ProjectorSet window_projector(const GridSpec& grid, double x_lo, double x_hi, const SpaceLayout& layout,
                              const std::string& at);

struct AuditRecord {
  static constexpr double commuting_tolerance = 1e-10;

  double pre_value = 0.0;
  double branch_weighted = 0.0;
  double difference = 0.0;  // branch_weighted - pre_value
  std::vector<double> commutator_norms;
  bool commuting = false;

  /// "commuting" or "non-commuting projector".
  [[nodiscard]] std::string classification() const;
};

/// Compares <Q> before the measurement with sum_i p_i <Q>_i over the branches.
AuditRecord total_expectation_audit(const StateVector& psi, const ProjectorSet& ps, const HermitianOperator& q);

}  // namespace qconserve
