#include "qconserve/state.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "qconserve/error.hpp"

namespace qconserve {

double GridSpec::coordinate(std::size_t j) const {
  const double dx = spacing();
  const double x = periodic ? -0.5 * length + static_cast<double>(j) * dx
                            : (static_cast<double>(j) + 0.5) * dx;
  return x;
}

double GridSpec::wavenumber(std::size_t bin) const {
  const auto n = static_cast<long long>(points);
  auto k = static_cast<long long>(bin);
  if (k >= n / 2) k -= n;
  return 2.0 * std::numbers::pi * static_cast<double>(k) / length;
}

void GridSpec::validate() const {
  if (points < 16 || (points & (points - 1)) != 0) {
    throw ValidationError("grid points must be a power of two >= 16, got " + std::to_string(points));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw ValidationError("grid length must be positive and finite");
  }
}

Factor Factor::discrete(std::string label, std::size_t dimension) {
  return Factor{std::move(label), dimension, std::nullopt};
}

Factor Factor::on_grid(std::string label, const GridSpec& grid) {
  grid.validate();
  return Factor{std::move(label), grid.points, grid};
}

SpaceLayout::SpaceLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw LayoutError("layout needs at least one factor");
  std::set<std::string_view> seen;
  for (const auto& f : factors_) {
    if (f.label.empty()) throw LayoutError("factor labels must be nonempty");
    if (!seen.insert(f.label).second) throw LayoutError("duplicate factor label '" + f.label + "'");
    if (f.grid) {
      f.grid->validate();
      if (f.grid->points != f.dimension) throw LayoutError("grid factor '" + f.label + "' dimension disagrees with its grid");
    } else if (f.dimension < 2) {
      throw LayoutError("discrete factor '" + f.label + "' needs dimension >= 2");
    }
    if (f.dimension > max_total_dimension || total_ * f.dimension > max_total_dimension) {
      throw DimensionError("total dimension exceeds the dense cap of " + std::to_string(max_total_dimension));
    }
    total_ *= f.dimension;
  }
}

bool SpaceLayout::contains(std::string_view label) const {
  return std::any_of(factors_.begin(), factors_.end(), [&](const Factor& f) { return f.label == label; });
}

std::size_t SpaceLayout::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (factors_[i].label == label) return i;
  }
  throw LayoutError("unknown factor label '" + std::string(label) + "'");
}

const Factor& SpaceLayout::factor(std::string_view label) const { return factors_[index_of(label)]; }

std::size_t SpaceLayout::dimension_of(std::string_view label) const { return factor(label).dimension; }

std::size_t SpaceLayout::span_dimension(std::size_t first, std::size_t last) const {
  std::size_t d = 1;
  for (std::size_t i = first; i < last; ++i) d *= factors_[i].dimension;
  return d;
}

std::pair<std::size_t, std::size_t> SpaceLayout::group_range(std::span<const std::string> labels) const {
  if (labels.empty()) throw LayoutError("empty factor group");
  std::vector<std::size_t> idx;
  idx.reserve(labels.size());
  for (const auto& l : labels) idx.push_back(index_of(l));
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) throw LayoutError("factor group repeats a label");
  if (idx.back() - idx.front() + 1 != idx.size()) {
    throw LayoutError("factor group is not contiguous; reorder with permute_factors first");
  }
  return {idx.front(), idx.back() + 1};
}

std::vector<std::string> SpaceLayout::labels() const {
  std::vector<std::string> out;
  out.reserve(factors_.size());
  for (const auto& f : factors_) out.push_back(f.label);
  return out;
}

SpaceLayout concat(const SpaceLayout& a, const SpaceLayout& b) {
  std::vector<Factor> all = a.factors();
  for (const auto& f : b.factors()) {
    if (a.contains(f.label)) throw LayoutError("label collision on '" + f.label + "'");
    all.push_back(f);
  }
  return SpaceLayout(std::move(all));
}

StateVector::StateVector(SpaceLayout layout, ComplexVector amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != layout_.total_dimension()) {
    throw DimensionError("amplitude count " + std::to_string(amplitudes_.size()) +
                         " does not match layout dimension " + std::to_string(layout_.total_dimension()));
  }
  if (!amplitudes_.allFinite()) throw ValidationError("state amplitudes must be finite");
}

StateVector StateVector::basis(SpaceLayout layout, std::size_t index) {
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(layout.total_dimension()));
  if (index >= layout.total_dimension()) throw DimensionError("basis index out of range");
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return StateVector(std::move(layout), std::move(v));
}

bool StateVector::is_normalized(double tol) const { return std::abs(norm() - 1.0) <= tol; }

StateVector StateVector::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw ValidationError("cannot normalize a zero state");
  return StateVector(layout_, amplitudes_ / n);
}

void require_normalized(const StateVector& psi, std::string_view what) {
  if (!psi.is_normalized()) {
    std::ostringstream os;
    os << what << ": state must be normalized (norm = " << psi.norm() << ")";
    throw ValidationError(os.str());
  }
}

Complex inner(const StateVector& a, const StateVector& b) {
  if (!(a.layout() == b.layout())) throw LayoutError("inner product of states on different layouts");
  return a.amplitudes().dot(b.amplitudes());
}

double fidelity(const StateVector& a, const StateVector& b) {
  const double overlap = std::abs(inner(a, b));
  return overlap * overlap / (a.amplitudes().squaredNorm() * b.amplitudes().squaredNorm());
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  SpaceLayout layout = concat(a.layout(), b.layout());
  const auto da = static_cast<Eigen::Index>(a.dimension());
  const auto db = static_cast<Eigen::Index>(b.dimension());
  ComplexVector out(da * db);
  for (Eigen::Index i = 0; i < da; ++i) out.segment(i * db, db) = a.amplitudes()[i] * b.amplitudes();
  return StateVector(std::move(layout), std::move(out));
}

StateVector permute_factors(const StateVector& psi, std::span<const std::string> new_order) {
  const auto& old = psi.layout();
  const std::size_t n = old.size();
  if (new_order.size() != n) throw LayoutError("permutation has the wrong number of labels");
  std::vector<std::size_t> perm(n);  // perm[k] = old index of new factor k
  std::vector<bool> used(n, false);
  std::vector<Factor> factors;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = old.index_of(new_order[k]);
    if (used[i]) throw LayoutError("not a permutation: '" + new_order[k] + "' repeated");
    used[i] = true;
    perm[k] = i;
    factors.push_back(old.factors()[i]);
  }
  SpaceLayout layout(std::move(factors));

  // stride in the new ordering of each old factor
  std::vector<std::size_t> new_stride_of_old(n);
  std::size_t stride = 1;
  for (std::size_t k = n; k-- > 0;) {
    new_stride_of_old[perm[k]] = stride;
    stride *= old.factors()[perm[k]].dimension;
  }

  const std::size_t dim = psi.dimension();
  ComplexVector out(static_cast<Eigen::Index>(dim));
  std::vector<std::size_t> digit(n, 0);
  std::size_t target = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    out[static_cast<Eigen::Index>(target)] = psi[i];
    // odometer increment over the old ordering, rightmost fastest
    for (std::size_t f = n; f-- > 0;) {
      ++digit[f];
      target += new_stride_of_old[f];
      if (digit[f] < old.factors()[f].dimension) break;
      target -= digit[f] * new_stride_of_old[f];
      digit[f] = 0;
    }
  }
  return StateVector(std::move(layout), std::move(out));
}

RealVector ReducedDensity::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(matrix, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

ReducedDensity partial_trace(const StateVector& psi, std::span<const std::string> keep) {
  require_normalized(psi, "partial_trace");
  const auto& layout = psi.layout();
  const auto [first, last] = layout.group_range(keep);
  const auto left = static_cast<Eigen::Index>(layout.span_dimension(0, first));
  const auto mid = static_cast<Eigen::Index>(layout.span_dimension(first, last));
  const auto right = static_cast<Eigen::Index>(layout.span_dimension(last, layout.size()));

  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  ComplexMatrix rho = ComplexMatrix::Zero(mid, mid);
  for (Eigen::Index l = 0; l < left; ++l) {
    Eigen::Map<const RowMajor> block(psi.amplitudes().data() + l * mid * right, mid, right);
    rho.noalias() += block * block.adjoint();
  }
  std::vector<std::string> kept;
  for (std::size_t i = first; i < last; ++i) kept.push_back(layout.factors()[i].label);
  return ReducedDensity{std::move(kept), std::move(rho)};
}

ReducedDensity partial_trace(const StateVector& psi, const std::string& keep) {
  return partial_trace(psi, std::span<const std::string>(&keep, 1));
}

std::size_t SchmidtDecomposition::rank() const {
  return static_cast<std::size_t>(std::count_if(coefficients.begin(), coefficients.end(),
                                                [](double c) { return c > rank_cutoff; }));
}

ComplexVector SchmidtDecomposition::reconstruct() const {
  const Eigen::Index dl = left_vectors.rows();
  const Eigen::Index dr = right_vectors.rows();
  ComplexMatrix m = ComplexMatrix::Zero(dl, dr);
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    m.noalias() += coefficients[i] * left_vectors.col(c) * right_vectors.col(c).transpose();
  }
  ComplexVector out(dl * dr);
  for (Eigen::Index l = 0; l < dl; ++l) out.segment(l * dr, dr) = m.row(l).transpose();
  return out;
}

SchmidtDecomposition schmidt(const StateVector& psi, Bipartition cut) {
  require_normalized(psi, "schmidt");
  const auto& layout = psi.layout();
  if (cut.left_factors == 0 || cut.left_factors >= layout.size()) {
    throw LayoutError("degenerate bipartition: both sides must hold at least one factor");
  }
  const auto dl = static_cast<Eigen::Index>(layout.span_dimension(0, cut.left_factors));
  const auto dr = static_cast<Eigen::Index>(layout.span_dimension(cut.left_factors, layout.size()));

  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const ComplexMatrix m = Eigen::Map<const RowMajor>(psi.amplitudes().data(), dl, dr);
  Eigen::BDCSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SchmidtDecomposition out;
  const Eigen::Index r = svd.singularValues().size();
  out.left_vectors = svd.matrixU();
  out.right_vectors = svd.matrixV().conjugate();
  out.coefficients.resize(static_cast<std::size_t>(r));
  for (Eigen::Index i = 0; i < r; ++i) {
    out.coefficients[static_cast<std::size_t>(i)] = svd.singularValues()[i];
    auto u = out.left_vectors.col(i);
    const double biggest = u.cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    while (std::abs(u[pivot]) < biggest * (1.0 - 1e-12)) ++pivot;
    if (biggest > 0.0) {
      const Complex phase = u[pivot] / std::abs(u[pivot]);
      u *= std::conj(phase);
      out.right_vectors.col(i) *= phase;
    }
  }
  return out;
}

}  // namespace qconserve
