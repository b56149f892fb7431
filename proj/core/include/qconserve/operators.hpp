#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "qconserve/grid.hpp"
#include "qconserve/state.hpp"

namespace qconserve {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

/// Matrix representations an operator term may carry. Diagonal terms are
/// diagonal in the computational basis; Fourier-diagonal terms are diagonal
/// in the unitary discrete Fourier basis, with `values[bin]` the eigenvalue of
/// DFT bin `bin`.
struct DenseRep {
  ComplexMatrix matrix;
};
struct DiagonalRep {
  RealVector values;
};
struct FourierDiagonalRep {
  RealVector values;
};
struct SparseRep {
  SparseMatrix matrix;
};
using LocalRep = std::variant<DenseRep, DiagonalRep, FourierDiagonalRep, SparseRep>;

/// One summand of an operator. An empty `factor` means the term acts on the
/// operator's whole scope.
struct OperatorTerm {
  std::string factor;
  LocalRep rep;
};

/// Self-adjoint operator stored as a sum of structured terms.
///
/// Scope is either a single factor (a "local" operator, optionally carrying
/// the factor label it belongs to) or a full SpaceLayout. Local operators are
/// embedded with identities when they meet a full-layout state or operator.
class HermitianOperator {
 public:
  static constexpr double hermiticity_tolerance = 1e-10;

  static HermitianOperator dense(ComplexMatrix matrix);
  static HermitianOperator diagonal(RealVector values);
  static HermitianOperator fourier_diagonal(RealVector values);
  static HermitianOperator sparse(SparseMatrix matrix);
  static HermitianOperator identity(std::size_t dimension);

  /// Whole-layout operators.
  static HermitianOperator dense(const SpaceLayout& layout, ComplexMatrix matrix);
  static HermitianOperator sparse(const SpaceLayout& layout, SparseMatrix matrix);
  static HermitianOperator zero(const SpaceLayout& layout);
  /// Full-layout operator from explicit terms (term dimensions are checked).
  static HermitianOperator from_terms(const SpaceLayout& layout, std::vector<OperatorTerm> terms);

  /// Copy of a local operator tagged with the factor it acts on.
  [[nodiscard]] HermitianOperator on(std::string label) const;

  [[nodiscard]] bool is_local() const { return !layout_.has_value(); }
  [[nodiscard]] const std::optional<SpaceLayout>& layout() const { return layout_; }
  [[nodiscard]] const std::optional<std::string>& factor_label() const { return label_; }
  [[nodiscard]] std::size_t dimension() const { return dimension_; }
  [[nodiscard]] const std::vector<OperatorTerm>& terms() const { return terms_; }
  [[nodiscard]] bool has_fourier_terms() const;

  HermitianOperator& operator+=(const HermitianOperator& other);
  HermitianOperator& operator*=(double scale);
  friend HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }
  friend HermitianOperator operator-(HermitianOperator a, HermitianOperator b) { return a += (b *= -1.0); }
  friend HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }

  /// Action on a vector of the scope's dimension.
  [[nodiscard]] ComplexVector apply(const ComplexVector& v) const;

  /// Dense matrix on the scope; throws DimensionError above `max_dense_dimension`.
  [[nodiscard]] ComplexMatrix to_dense() const;
  [[nodiscard]] SparseMatrix to_sparse() const;

  static constexpr std::size_t max_dense_dimension = 4096;

 private:
  HermitianOperator(std::optional<SpaceLayout> layout, std::optional<std::string> label, std::size_t dim,
                    std::vector<OperatorTerm> terms);

  std::optional<SpaceLayout> layout_;
  std::optional<std::string> label_;
  std::size_t dimension_ = 0;
  std::vector<OperatorTerm> terms_;
};

/// Acts as `local` on factor `at` and as the identity elsewhere.
HermitianOperator embed(const HermitianOperator& local, const SpaceLayout& layout, const std::string& at);

/// Resolves `op` onto `layout`: labeled local operators are embedded; a
/// single-factor layout accepts an unlabeled local operator of its dimension.
HermitianOperator in_layout(const HermitianOperator& op, const SpaceLayout& layout);

/// <psi|Q|psi>. Throws ValidationError if the quadratic form has an
/// imaginary residue above 1e-10.
double expectation(const HermitianOperator& q, const StateVector& psi);

/// Frobenius norm of HQ - QH.
double commutator_norm(const HermitianOperator& h, const HermitianOperator& q);

double frobenius_norm(const HermitianOperator& op);
/// ||A B||_F
double product_norm(const HermitianOperator& a, const HermitianOperator& b);
/// ||P P - P||_F
double idempotency_defect(const HermitianOperator& p);

struct GridOperators {
  HermitianOperator position;
  HermitianOperator momentum;
  HermitianOperator kinetic;
};

/// Position, momentum and p^2/2m on a periodic grid, momentum diagonal in
/// the discrete Fourier basis. Momentum is zero on the Nyquist bin; the kinetic
/// term keeps (pi/dx)^2/2m there.
GridOperators grid_operators(const GridSpec& grid, double mass);

/// Diagonal operator f(x_j).
HermitianOperator grid_function(const GridSpec& grid, const std::function<double(double)>& f);
/// Fourier-diagonal operator f(k_bin).
HermitianOperator momentum_function(const GridSpec& grid, const std::function<double(double)>& f);

HermitianOperator pauli_x();
HermitianOperator pauli_y();
HermitianOperator pauli_z();

/// Diagonal ladder of values (j - center) * step, j = 0..dimension-1, center = (dimension-1)/2.
HermitianOperator ladder_observable(std::size_t dimension, double step);

/// Dense unitary on a full layout.
class UnitaryOperator {
 public:
  UnitaryOperator(SpaceLayout layout, ComplexMatrix matrix);

  [[nodiscard]] const SpaceLayout& layout() const { return layout_; }
  [[nodiscard]] const ComplexMatrix& matrix() const { return matrix_; }
  [[nodiscard]] StateVector apply(const StateVector& psi) const;
  /// ||U^dagger U - I||_F
  [[nodiscard]] double unitarity_defect() const;

 private:
  SpaceLayout layout_;
  ComplexMatrix matrix_;
};

/// Embeds a local unitary on factor `at` of `layout`.
UnitaryOperator embed_unitary(const ComplexMatrix& local, const SpaceLayout& layout, const std::string& at);

}  // namespace qconserve
