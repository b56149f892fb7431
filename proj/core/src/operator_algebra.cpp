// Frobenius norms of short operator polynomials (commutators, products,
// idempotency defects). Small scopes go through dense matrices, Fourier-free
// operators through sparse products, everything else column by column.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qconserve/error.hpp"
#include "qconserve/operators.hpp"
#include "tensor_fibers.hpp"

namespace qconserve {

namespace {

constexpr std::size_t dense_route_limit = 256;

struct Monomial {
  double coeff = 1.0;
  std::vector<std::size_t> factors;  // indices into the resolved operator list, applied right to left
};

std::vector<HermitianOperator> resolve_common_scope(std::initializer_list<const HermitianOperator*> ops) {
  const SpaceLayout* layout = nullptr;
  for (const auto* op : ops) {
    if (!op->is_local()) {
      if (layout && !(*layout == *op->layout())) throw LayoutError("operators live on different layouts");
      layout = &*op->layout();
    }
  }
  std::vector<HermitianOperator> out;
  if (layout) {
    for (const auto* op : ops) out.push_back(in_layout(*op, *layout));
    return out;
  }
  const std::optional<std::string>* label = nullptr;
  for (const auto* op : ops) {
    if (op->dimension() != (*ops.begin())->dimension()) throw DimensionError("operators have different dimensions");
    if (op->factor_label()) {
      if (label && **label != *op->factor_label()) throw LayoutError("local operators act on different factors");
      label = &op->factor_label();
    }
    out.push_back(*op);
  }
  return out;
}

double frobenius(const std::vector<HermitianOperator>& ops, const std::vector<Monomial>& poly) {
  const std::size_t dim = ops.front().dimension();
  bool any_fourier = false;
  for (const auto& op : ops) any_fourier = any_fourier || op.has_fourier_terms();

  if (dim <= dense_route_limit) {
    std::vector<ComplexMatrix> mats;
    for (const auto& op : ops) mats.push_back(op.to_dense());
    const auto n = static_cast<Eigen::Index>(dim);
    ComplexMatrix total = ComplexMatrix::Zero(n, n);
    for (const auto& m : poly) {
      ComplexMatrix term = ComplexMatrix::Identity(n, n);
      for (auto it = m.factors.rbegin(); it != m.factors.rend(); ++it) term = mats[*it] * term;
      total += m.coeff * term;
    }
    return total.norm();
  }

  if (!any_fourier) {
    std::vector<SparseMatrix> mats;
    for (const auto& op : ops) mats.push_back(op.to_sparse());
    const auto n = static_cast<Eigen::Index>(dim);
    SparseMatrix total(n, n);
    for (const auto& m : poly) {
      SparseMatrix term(n, n);
      term.setIdentity();
      for (auto it = m.factors.rbegin(); it != m.factors.rend(); ++it) term = (mats[*it] * term).pruned();
      total += m.coeff * term;
    }
    return total.norm();
  }

  double sum_sq = 0.0;
  ComplexVector e = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j < dim; ++j) {
    e.setZero();
    e[static_cast<Eigen::Index>(j)] = 1.0;
    ComplexVector col = ComplexVector::Zero(e.size());
    for (const auto& m : poly) {
      ComplexVector v = e;
      for (auto it = m.factors.rbegin(); it != m.factors.rend(); ++it) v = ops[*it].apply(v);
      col += m.coeff * v;
    }
    sum_sq += col.squaredNorm();
  }
  return std::sqrt(sum_sq);
}

bool terms_commute(const OperatorTerm& a, const OperatorTerm& b) {
  if (!a.factor.empty() && !b.factor.empty() && a.factor != b.factor) return true;
  const bool same_support = a.factor == b.factor;
  if (!same_support) return false;
  if (std::holds_alternative<DiagonalRep>(a.rep) && std::holds_alternative<DiagonalRep>(b.rep)) return true;
  if (std::holds_alternative<FourierDiagonalRep>(a.rep) && std::holds_alternative<FourierDiagonalRep>(b.rep)) {
    return true;
  }
  return false;
}

// When every term of every operator sits on the same named factor, the norm
// is the local norm times sqrt(spectator dimension).
struct LocalReduction {
  std::vector<HermitianOperator> ops;
  double spectator_scale = 1.0;
};

std::optional<LocalReduction> reduce_to_factor(const std::vector<HermitianOperator>& ops) {
  if (ops.front().is_local() || ops.front().layout()->size() < 2) return std::nullopt;
  const SpaceLayout& layout = *ops.front().layout();
  std::optional<std::string> factor;
  for (const auto& op : ops) {
    for (const auto& t : op.terms()) {
      if (t.factor.empty() || (factor && *factor != t.factor)) return std::nullopt;
      factor = t.factor;
    }
  }
  if (!factor) return std::nullopt;
  const SpaceLayout local({layout.factor(*factor)});
  LocalReduction r;
  for (const auto& op : ops) r.ops.push_back(HermitianOperator::from_terms(local, op.terms()));
  r.spectator_scale = std::sqrt(static_cast<double>(layout.total_dimension()) /
                                static_cast<double>(local.total_dimension()));
  return r;
}

template <typename Rep>
const Rep* single_term(const HermitianOperator& op) {
  if (op.terms().size() != 1) return nullptr;
  return std::get_if<Rep>(&op.terms().front().rep);
}

// ||[D, F]||_F for D diagonal and F Fourier-diagonal on one factor: F is
// circulant, so |F_jk| = |c_{j-k}| and the norm is sum_m |c_m|^2 sum_j |d_j - d_{j+m}|^2.
double diagonal_fourier_commutator(const RealVector& d, const RealVector& f) {
  const auto n = d.size();
  ComplexVector c = ComplexVector::Zero(n);
  c[0] = 1.0;
  detail::apply_fourier_diagonal(f, c.data(), static_cast<std::size_t>(n), 1, 1);
  double total = 0.0;
  for (Eigen::Index m = 1; m < n; ++m) {
    const double cm = std::norm(c[m]);
    if (cm == 0.0) continue;
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double diff = d[j] - d[(j + m) % n];
      s += diff * diff;
    }
    total += cm * s;
  }
  return std::sqrt(total);
}

double single_term_norm(const HermitianOperator& op) {
  if (op.terms().empty()) return 0.0;
  if (const auto* r = single_term<DiagonalRep>(op)) return r->values.norm();
  if (const auto* r = single_term<FourierDiagonalRep>(op)) return r->values.norm();
  if (const auto* r = single_term<DenseRep>(op)) return r->matrix.norm();
  if (const auto* r = single_term<SparseRep>(op)) return r->matrix.norm();
  return -1.0;
}

}  // namespace

double commutator_norm(const HermitianOperator& h, const HermitianOperator& q) {
  auto ops = resolve_common_scope({&h, &q});
  bool trivially = true;
  for (const auto& a : ops[0].terms()) {
    for (const auto& b : ops[1].terms()) trivially = trivially && terms_commute(a, b);
  }
  if (trivially) return 0.0;
  double scale = 1.0;
  if (auto r = reduce_to_factor(ops)) {
    ops = std::move(r->ops);
    scale = r->spectator_scale;
  }
  for (int swap = 0; swap < 2; ++swap) {
    const auto* d = single_term<DiagonalRep>(ops[swap]);
    const auto* f = single_term<FourierDiagonalRep>(ops[1 - swap]);
    if (d && f && ops[0].dimension() > dense_route_limit) return scale * diagonal_fourier_commutator(d->values, f->values);
  }
  return scale * frobenius(ops, {Monomial{1.0, {0, 1}}, Monomial{-1.0, {1, 0}}});
}

double frobenius_norm(const HermitianOperator& op) {
  auto ops = resolve_common_scope({&op});
  double scale = 1.0;
  if (auto r = reduce_to_factor(ops)) {
    ops = std::move(r->ops);
    scale = r->spectator_scale;
  }
  const double direct = single_term_norm(ops.front());
  if (direct >= 0.0) return scale * direct;
  return scale * frobenius(ops, {Monomial{1.0, {0}}});
}

double product_norm(const HermitianOperator& a, const HermitianOperator& b) {
  auto ops = resolve_common_scope({&a, &b});
  return frobenius(ops, {Monomial{1.0, {0, 1}}});
}

double idempotency_defect(const HermitianOperator& p) {
  auto ops = resolve_common_scope({&p});
  return frobenius(ops, {Monomial{1.0, {0, 0}}, Monomial{-1.0, {0}}});
}

}  // namespace qconserve
