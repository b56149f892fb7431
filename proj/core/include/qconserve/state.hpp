#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qconserve/grid.hpp"

namespace qconserve {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// One tensor factor of a composite Hilbert space.
struct Factor {
  std::string label;
  std::size_t dimension = 0;
  std::optional<GridSpec> grid;

  static Factor discrete(std::string label, std::size_t dimension);
  static Factor on_grid(std::string label, const GridSpec& grid);

  friend bool operator==(const Factor&, const Factor&) = default;
};

/// Ordered list of tensor factors. Amplitudes are indexed row-major over the
/// factors in this order: the leftmost factor varies slowest.
class SpaceLayout {
 public:
  /// Largest total dimension a dense state may have.
  static constexpr std::size_t max_total_dimension = std::size_t{1} << 14;

  explicit SpaceLayout(std::vector<Factor> factors);

  [[nodiscard]] const std::vector<Factor>& factors() const { return factors_; }
  [[nodiscard]] std::size_t size() const { return factors_.size(); }
  [[nodiscard]] std::size_t total_dimension() const { return total_; }

  [[nodiscard]] bool contains(std::string_view label) const;
  [[nodiscard]] std::size_t index_of(std::string_view label) const;
  [[nodiscard]] const Factor& factor(std::string_view label) const;
  [[nodiscard]] std::size_t dimension_of(std::string_view label) const;

  /// Product of the dimensions of factors [first, last).
  [[nodiscard]] std::size_t span_dimension(std::size_t first, std::size_t last) const;

  /// Half-open factor range covered by `labels`; throws LayoutError when the
  /// group is empty, names unknown factors, or is not contiguous.
  [[nodiscard]] std::pair<std::size_t, std::size_t> group_range(
      std::span<const std::string> labels) const;

  [[nodiscard]] std::vector<std::string> labels() const;

  friend bool operator==(const SpaceLayout&, const SpaceLayout&) = default;

 private:
  std::vector<Factor> factors_;
  std::size_t total_ = 1;
};

/// Concatenation of factor lists; throws LayoutError on a label collision.
SpaceLayout concat(const SpaceLayout& a, const SpaceLayout& b);

/// A pure state on a SpaceLayout.
class StateVector {
 public:
  StateVector(SpaceLayout layout, ComplexVector amplitudes);

  static StateVector basis(SpaceLayout layout, std::size_t index);

  [[nodiscard]] const SpaceLayout& layout() const { return layout_; }
  [[nodiscard]] const ComplexVector& amplitudes() const { return amplitudes_; }
  [[nodiscard]] std::size_t dimension() const { return static_cast<std::size_t>(amplitudes_.size()); }
  [[nodiscard]] Complex operator[](std::size_t i) const { return amplitudes_[static_cast<Eigen::Index>(i)]; }

  [[nodiscard]] double norm() const { return amplitudes_.norm(); }
  [[nodiscard]] bool is_normalized(double tol = 1e-9) const;

  /// Returns this state scaled to unit norm; throws ValidationError for a zero vector.
  [[nodiscard]] StateVector normalized() const;

 private:
  SpaceLayout layout_;
  ComplexVector amplitudes_;
};

/// Throws ValidationError unless psi has unit norm within 1e-9.
void require_normalized(const StateVector& psi, std::string_view what);

/// <a|b>; layouts must agree.
Complex inner(const StateVector& a, const StateVector& b);

/// |<a|b>|^2 / (|a|^2 |b|^2).
double fidelity(const StateVector& a, const StateVector& b);

StateVector tensor(const StateVector& a, const StateVector& b);

/// Reorders the tensor factors; `new_order` must be a permutation of the labels.
StateVector permute_factors(const StateVector& psi, std::span<const std::string> new_order);

/// Split of the factor list into [0, left_factors) | [left_factors, size).
struct Bipartition {
  std::size_t left_factors = 1;
};

struct ReducedDensity {
  std::vector<std::string> kept;
  ComplexMatrix matrix;

  [[nodiscard]] RealVector eigenvalues() const;
};

/// Reduced density matrix of a contiguous factor group.
ReducedDensity partial_trace(const StateVector& psi, std::span<const std::string> keep);
ReducedDensity partial_trace(const StateVector& psi, const std::string& keep);

/// psi = sum_i c_i |left_i> (x) |right_i>, coefficients non-increasing.
///
/// Each left vector's first component of (numerically) largest magnitude is
/// real and non-negative; the matching phase is absorbed into the right vector.
struct SchmidtDecomposition {
  static constexpr double rank_cutoff = 1e-12;

  std::vector<double> coefficients;
  ComplexMatrix left_vectors;   // columns
  ComplexMatrix right_vectors;  // columns

  [[nodiscard]] std::size_t rank() const;
  /// Flattened row-major amplitudes of sum_i c_i left_i (x) right_i.
  [[nodiscard]] ComplexVector reconstruct() const;
};

SchmidtDecomposition schmidt(const StateVector& psi, Bipartition cut);

}  // namespace qconserve
