#include "qconserve/operators.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "qconserve/error.hpp"
#include "tensor_fibers.hpp"

namespace qconserve {

namespace {

using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::size_t rep_dimension(const LocalRep& rep) {
  return std::visit(
      [](const auto& r) -> std::size_t {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, DenseRep>) {
          return static_cast<std::size_t>(r.matrix.rows());
        } else if constexpr (std::is_same_v<T, SparseRep>) {
          return static_cast<std::size_t>(r.matrix.rows());
        } else {
          return static_cast<std::size_t>(r.values.size());
        }
      },
      rep);
}

void scale_rep(LocalRep& rep, double s) {
  std::visit(
      [s](auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, DenseRep> || std::is_same_v<T, SparseRep>) {
          r.matrix *= s;
        } else {
          r.values *= s;
        }
      },
      rep);
}

// Adds `term` into an existing term of the same kind on the same factor, so
// sums like p - p collapse to one structured term.
void merge_term(std::vector<OperatorTerm>& terms, const OperatorTerm& term) {
  for (auto& t : terms) {
    if (t.factor != term.factor || t.rep.index() != term.rep.index()) continue;
    if (rep_dimension(t.rep) != rep_dimension(term.rep)) continue;
    std::visit(
        [&term](auto& r) {
          using T = std::decay_t<decltype(r)>;
          const auto& o = std::get<T>(term.rep);
          if constexpr (std::is_same_v<T, DenseRep> || std::is_same_v<T, SparseRep>) {
            r.matrix += o.matrix;
          } else {
            r.values += o.values;
          }
        },
        t.rep);
    return;
  }
  terms.push_back(term);
}

ComplexMatrix local_dense(const LocalRep& rep) {
  return std::visit(
      [](const auto& r) -> ComplexMatrix {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, DenseRep>) {
          return r.matrix;
        } else if constexpr (std::is_same_v<T, SparseRep>) {
          return ComplexMatrix(r.matrix);
        } else if constexpr (std::is_same_v<T, DiagonalRep>) {
          return r.values.template cast<Complex>().asDiagonal();
        } else {
          const auto n = r.values.size();
          ComplexMatrix m(n, n);
          ComplexVector e = ComplexVector::Zero(n);
          for (Eigen::Index j = 0; j < n; ++j) {
            e.setZero();
            e[j] = 1.0;
            ComplexVector col = e;
            detail::apply_fourier_diagonal(r.values, col.data(), static_cast<std::size_t>(n), 1, 1);
            m.col(j) = col;
          }
          return m;
        }
      },
      rep);
}

// v viewed as a (left, d, right) tensor; the rep acts on the middle index.
void apply_rep(const LocalRep& rep, const ComplexVector& in, ComplexVector& out, std::size_t left, std::size_t d,
               std::size_t right) {
  const auto D = static_cast<Eigen::Index>(d);
  const auto R = static_cast<Eigen::Index>(right);
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, DenseRep> || std::is_same_v<T, SparseRep>) {
          for (std::size_t l = 0; l < left; ++l) {
            const auto offset = static_cast<Eigen::Index>(l) * D * R;
            Eigen::Map<const RowMajor> src(in.data() + offset, D, R);
            Eigen::Map<RowMajor> dst(out.data() + offset, D, R);
            dst.noalias() += r.matrix * src;
          }
        } else if constexpr (std::is_same_v<T, DiagonalRep>) {
          for (std::size_t l = 0; l < left; ++l) {
            for (Eigen::Index i = 0; i < D; ++i) {
              const auto offset = (static_cast<Eigen::Index>(l) * D + i) * R;
              out.segment(offset, R) += r.values[i] * in.segment(offset, R);
            }
          }
        } else {
          ComplexVector tmp = in;
          detail::apply_fourier_diagonal(r.values, tmp.data(), d, left, right);
          out += tmp;
        }
      },
      rep);
}

double max_antihermitian(const ComplexMatrix& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

struct Placement {
  std::size_t left = 1;
  std::size_t d = 0;
  std::size_t right = 1;
};

Placement place(const OperatorTerm& term, const std::optional<SpaceLayout>& layout, std::size_t dimension) {
  if (term.factor.empty() || !layout) return {1, dimension, 1};
  const std::size_t idx = layout->index_of(term.factor);
  return {layout->span_dimension(0, idx), layout->factors()[idx].dimension,
          layout->span_dimension(idx + 1, layout->size())};
}

}  // namespace

namespace detail {

void apply_fourier_diagonal(const RealVector& values, Complex* data, std::size_t d, std::size_t left,
                            std::size_t right) {
  thread_local Eigen::FFT<double> fft;
  thread_local std::vector<Complex> fiber;
  thread_local std::vector<Complex> spectrum;
  fiber.resize(d);
  for (std::size_t l = 0; l < left; ++l) {
    for (std::size_t r = 0; r < right; ++r) {
      Complex* base = data + l * d * right + r;
      for (std::size_t i = 0; i < d; ++i) fiber[i] = base[i * right];
      fft.fwd(spectrum, fiber);
      for (std::size_t k = 0; k < d; ++k) spectrum[k] *= values[static_cast<Eigen::Index>(k)];
      fft.inv(fiber, spectrum);
      for (std::size_t i = 0; i < d; ++i) base[i * right] = fiber[i];
    }
  }
}

void apply_fourier_phase(const ComplexVector& phases, Complex* data, std::size_t d, std::size_t left,
                         std::size_t right) {
  thread_local Eigen::FFT<double> fft;
  thread_local std::vector<Complex> fiber;
  thread_local std::vector<Complex> spectrum;
  fiber.resize(d);
  for (std::size_t l = 0; l < left; ++l) {
    for (std::size_t r = 0; r < right; ++r) {
      Complex* base = data + l * d * right + r;
      for (std::size_t i = 0; i < d; ++i) fiber[i] = base[i * right];
      fft.fwd(spectrum, fiber);
      for (std::size_t k = 0; k < d; ++k) spectrum[k] *= phases[static_cast<Eigen::Index>(k)];
      fft.inv(fiber, spectrum);
      for (std::size_t i = 0; i < d; ++i) base[i * right] = fiber[i];
    }
  }
}

}  // namespace detail

HermitianOperator::HermitianOperator(std::optional<SpaceLayout> layout, std::optional<std::string> label,
                                     std::size_t dim, std::vector<OperatorTerm> terms)
    : layout_(std::move(layout)), label_(std::move(label)), dimension_(dim), terms_(std::move(terms)) {}

HermitianOperator HermitianOperator::dense(ComplexMatrix matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) throw DimensionError("operator matrix must be square");
  if (!matrix.allFinite()) throw ValidationError("operator entries must be finite");
  if (max_antihermitian(matrix) > hermiticity_tolerance) throw ValidationError("matrix is not self-adjoint");
  const auto dim = static_cast<std::size_t>(matrix.rows());
  return HermitianOperator(std::nullopt, std::nullopt, dim, {OperatorTerm{"", DenseRep{std::move(matrix)}}});
}

HermitianOperator HermitianOperator::diagonal(RealVector values) {
  if (values.size() == 0) throw DimensionError("empty diagonal");
  if (!values.allFinite()) throw ValidationError("operator entries must be finite");
  const auto dim = static_cast<std::size_t>(values.size());
  return HermitianOperator(std::nullopt, std::nullopt, dim, {OperatorTerm{"", DiagonalRep{std::move(values)}}});
}

HermitianOperator HermitianOperator::fourier_diagonal(RealVector values) {
  if (values.size() == 0) throw DimensionError("empty spectrum");
  if (!values.allFinite()) throw ValidationError("operator entries must be finite");
  const auto dim = static_cast<std::size_t>(values.size());
  return HermitianOperator(std::nullopt, std::nullopt, dim,
                           {OperatorTerm{"", FourierDiagonalRep{std::move(values)}}});
}

HermitianOperator HermitianOperator::sparse(SparseMatrix matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) throw DimensionError("operator matrix must be square");
  SparseMatrix diff = matrix - SparseMatrix(matrix.adjoint());
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      if (std::abs(it.value()) > hermiticity_tolerance) throw ValidationError("matrix is not self-adjoint");
    }
  }
  matrix.makeCompressed();
  const auto dim = static_cast<std::size_t>(matrix.rows());
  return HermitianOperator(std::nullopt, std::nullopt, dim, {OperatorTerm{"", SparseRep{std::move(matrix)}}});
}

HermitianOperator HermitianOperator::identity(std::size_t dimension) {
  return diagonal(RealVector::Ones(static_cast<Eigen::Index>(dimension)));
}

HermitianOperator HermitianOperator::dense(const SpaceLayout& layout, ComplexMatrix matrix) {
  if (static_cast<std::size_t>(matrix.rows()) != layout.total_dimension()) {
    throw DimensionError("operator dimension does not match layout");
  }
  HermitianOperator op = dense(std::move(matrix));
  op.layout_ = layout;
  return op;
}

HermitianOperator HermitianOperator::sparse(const SpaceLayout& layout, SparseMatrix matrix) {
  if (static_cast<std::size_t>(matrix.rows()) != layout.total_dimension()) {
    throw DimensionError("operator dimension does not match layout");
  }
  HermitianOperator op = sparse(std::move(matrix));
  op.layout_ = layout;
  return op;
}

HermitianOperator HermitianOperator::zero(const SpaceLayout& layout) {
  return HermitianOperator(layout, std::nullopt, layout.total_dimension(), {});
}

HermitianOperator HermitianOperator::from_terms(const SpaceLayout& layout, std::vector<OperatorTerm> terms) {
  for (const auto& t : terms) {
    const std::size_t expected = t.factor.empty() ? layout.total_dimension() : layout.dimension_of(t.factor);
    if (rep_dimension(t.rep) != expected) throw DimensionError("operator term does not match its factor dimension");
  }
  return HermitianOperator(layout, std::nullopt, layout.total_dimension(), std::move(terms));
}

HermitianOperator HermitianOperator::on(std::string label) const {
  if (!is_local()) throw LayoutError("only local operators can be tagged with a factor label");
  HermitianOperator copy = *this;
  copy.label_ = std::move(label);
  return copy;
}

bool HermitianOperator::has_fourier_terms() const {
  for (const auto& t : terms_) {
    if (std::holds_alternative<FourierDiagonalRep>(t.rep)) return true;
  }
  return false;
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& other) {
  if (is_local() && other.is_local()) {
    if (dimension_ != other.dimension_) throw DimensionError("adding local operators of different dimension");
    if (label_ && other.label_ && *label_ != *other.label_) {
      throw LayoutError("adding local operators on different factors; embed them first");
    }
    if (!label_) label_ = other.label_;
    for (const auto& t : other.terms_) merge_term(terms_, t);
    return *this;
  }
  if (is_local()) {
    *this = in_layout(*this, *other.layout_);
  }
  const HermitianOperator rhs = other.is_local() ? in_layout(other, *layout_) : other;
  if (!(*layout_ == *rhs.layout_)) throw LayoutError("adding operators on different layouts");
  for (const auto& t : rhs.terms_) merge_term(terms_, t);
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double scale) {
  for (auto& t : terms_) scale_rep(t.rep, scale);
  return *this;
}

ComplexVector HermitianOperator::apply(const ComplexVector& v) const {
  if (static_cast<std::size_t>(v.size()) != dimension_) throw DimensionError("vector does not match operator scope");
  ComplexVector out = ComplexVector::Zero(v.size());
  for (const auto& t : terms_) {
    const Placement p = place(t, layout_, dimension_);
    apply_rep(t.rep, v, out, p.left, p.d, p.right);
  }
  return out;
}

ComplexMatrix HermitianOperator::to_dense() const {
  if (dimension_ > max_dense_dimension) throw DimensionError("operator too large for a dense matrix");
  const auto n = static_cast<Eigen::Index>(dimension_);
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (const auto& t : terms_) {
    const Placement p = place(t, layout_, dimension_);
    const ComplexMatrix m = local_dense(t.rep);
    const auto D = static_cast<Eigen::Index>(p.d);
    const auto R = static_cast<Eigen::Index>(p.right);
    for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(p.left); ++l) {
      for (Eigen::Index r = 0; r < R; ++r) {
        const Eigen::Index base = l * D * R + r;
        for (Eigen::Index j = 0; j < D; ++j) {
          for (Eigen::Index i = 0; i < D; ++i) out(base + i * R, base + j * R) += m(i, j);
        }
      }
    }
  }
  return out;
}

SparseMatrix HermitianOperator::to_sparse() const {
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (const auto& t : terms_) {
    const Placement p = place(t, layout_, dimension_);
    const auto D = static_cast<Eigen::Index>(p.d);
    const auto R = static_cast<Eigen::Index>(p.right);
    auto emit = [&](Eigen::Index i, Eigen::Index j, Complex value) {
      for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(p.left); ++l) {
        for (Eigen::Index r = 0; r < R; ++r) {
          const Eigen::Index base = l * D * R + r;
          triplets.emplace_back(base + i * R, base + j * R, value);
        }
      }
    };
    if (const auto* diag = std::get_if<DiagonalRep>(&t.rep)) {
      for (Eigen::Index i = 0; i < D; ++i) {
        if (diag->values[i] != 0.0) emit(i, i, diag->values[i]);
      }
    } else if (const auto* sp = std::get_if<SparseRep>(&t.rep)) {
      for (int k = 0; k < sp->matrix.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(sp->matrix, k); it; ++it) emit(it.row(), it.col(), it.value());
      }
    } else {
      const ComplexMatrix m = local_dense(t.rep);
      for (Eigen::Index j = 0; j < D; ++j) {
        for (Eigen::Index i = 0; i < D; ++i) {
          if (m(i, j) != Complex(0.0)) emit(i, j, m(i, j));
        }
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(dimension_);
  SparseMatrix out(n, n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

HermitianOperator embed(const HermitianOperator& local, const SpaceLayout& layout, const std::string& at) {
  if (!local.is_local()) throw LayoutError("embed expects a local operator");
  const std::size_t d = layout.dimension_of(at);
  if (d != local.dimension()) {
    throw DimensionError("operator dimension " + std::to_string(local.dimension()) + " does not match factor '" +
                         at + "' of dimension " + std::to_string(d));
  }
  std::vector<OperatorTerm> terms;
  terms.reserve(local.terms().size());
  for (const auto& t : local.terms()) terms.push_back(OperatorTerm{at, t.rep});
  return HermitianOperator::from_terms(layout, std::move(terms));
}

HermitianOperator in_layout(const HermitianOperator& op, const SpaceLayout& layout) {
  if (!op.is_local()) {
    if (!(*op.layout() == layout)) throw LayoutError("operator scope does not match the state layout");
    return op;
  }
  if (op.factor_label()) return embed(op, layout, *op.factor_label());
  if (layout.size() == 1) return embed(op, layout, layout.factors().front().label);
  throw LayoutError("local operator has no factor label; tag it with on() or embed() it");
}

double expectation(const HermitianOperator& q, const StateVector& psi) {
  require_normalized(psi, "expectation");
  const HermitianOperator full = in_layout(q, psi.layout());
  const Complex value = psi.amplitudes().dot(full.apply(psi.amplitudes()));
  if (std::abs(value.imag()) > 1e-10 * std::max(1.0, std::abs(value.real()))) {
    throw ValidationError("expectation has an imaginary residue; operator is not self-adjoint");
  }
  return value.real();
}

namespace {

// The Nyquist bin is its own mirror image, so an odd function of k has no
// consistent value there; it is set to zero to keep p odd under parity.
HermitianOperator nyquist_free_momentum(const GridSpec& grid) {
  RealVector v(static_cast<Eigen::Index>(grid.points));
  for (std::size_t b = 0; b < grid.points; ++b) {
    v[static_cast<Eigen::Index>(b)] = 2 * b == grid.points ? 0.0 : grid.wavenumber(b);
  }
  return HermitianOperator::fourier_diagonal(std::move(v));
}

}  // namespace

GridOperators grid_operators(const GridSpec& grid, double mass) {
  grid.validate();
  if (!grid.periodic) throw ValidationError("grid_operators expects a periodic grid");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ValidationError("mass must be positive");
  return GridOperators{grid_function(grid, [](double x) { return x; }),
                       nyquist_free_momentum(grid),
                       momentum_function(grid, [mass](double k) { return k * k / (2.0 * mass); })};
}

HermitianOperator grid_function(const GridSpec& grid, const std::function<double(double)>& f) {
  grid.validate();
  RealVector v(static_cast<Eigen::Index>(grid.points));
  for (std::size_t j = 0; j < grid.points; ++j) v[static_cast<Eigen::Index>(j)] = f(grid.coordinate(j));
  return HermitianOperator::diagonal(std::move(v));
}

HermitianOperator momentum_function(const GridSpec& grid, const std::function<double(double)>& f) {
  grid.validate();
  RealVector v(static_cast<Eigen::Index>(grid.points));
  for (std::size_t b = 0; b < grid.points; ++b) v[static_cast<Eigen::Index>(b)] = f(grid.wavenumber(b));
  return HermitianOperator::fourier_diagonal(std::move(v));
}

HermitianOperator pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return HermitianOperator::dense(std::move(m));
}

HermitianOperator pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return HermitianOperator::dense(std::move(m));
}

HermitianOperator pauli_z() { return HermitianOperator::diagonal((RealVector(2) << 1.0, -1.0).finished()); }

HermitianOperator ladder_observable(std::size_t dimension, double step) {
  RealVector v(static_cast<Eigen::Index>(dimension));
  const double center = 0.5 * static_cast<double>(dimension - 1);
  for (std::size_t j = 0; j < dimension; ++j) v[static_cast<Eigen::Index>(j)] = (static_cast<double>(j) - center) * step;
  return HermitianOperator::diagonal(std::move(v));
}

UnitaryOperator::UnitaryOperator(SpaceLayout layout, ComplexMatrix matrix)
    : layout_(std::move(layout)), matrix_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(layout_.total_dimension());
  if (matrix_.rows() != n || matrix_.cols() != n) throw DimensionError("unitary does not match layout");
}

StateVector UnitaryOperator::apply(const StateVector& psi) const {
  if (!(psi.layout() == layout_)) throw LayoutError("unitary applied to a state on another layout");
  return StateVector(layout_, matrix_ * psi.amplitudes());
}

double UnitaryOperator::unitarity_defect() const {
  const auto n = matrix_.rows();
  return (matrix_.adjoint() * matrix_ - ComplexMatrix::Identity(n, n)).norm();
}

UnitaryOperator embed_unitary(const ComplexMatrix& local, const SpaceLayout& layout, const std::string& at) {
  const std::size_t idx = layout.index_of(at);
  const auto D = static_cast<Eigen::Index>(layout.factors()[idx].dimension);
  if (local.rows() != D || local.cols() != D) throw DimensionError("local unitary does not match factor dimension");
  if (layout.total_dimension() > HermitianOperator::max_dense_dimension) {
    throw DimensionError("layout too large for a dense unitary");
  }
  const auto L = static_cast<Eigen::Index>(layout.span_dimension(0, idx));
  const auto R = static_cast<Eigen::Index>(layout.span_dimension(idx + 1, layout.size()));
  const auto n = static_cast<Eigen::Index>(layout.total_dimension());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index l = 0; l < L; ++l) {
    for (Eigen::Index r = 0; r < R; ++r) {
      const Eigen::Index base = l * D * R + r;
      for (Eigen::Index j = 0; j < D; ++j) {
        for (Eigen::Index i = 0; i < D; ++i) out(base + i * R, base + j * R) = local(i, j);
      }
    }
  }
  return UnitaryOperator(layout, std::move(out));
}

}  // namespace qconserve
