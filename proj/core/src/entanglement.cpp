#include "qconserve/entanglement.hpp"

#include <cmath>
#include <numbers>

#include "qconserve/error.hpp"

namespace qconserve {

namespace {

// Orthonormal completion of the leading columns of `partial` to a square unitary.
ComplexMatrix complete_basis(const ComplexMatrix& partial, Eigen::Index dimension) {
  // Gram-Schmidt keeps the given columns and fills the rest from the identity.
  ComplexMatrix out(dimension, dimension);
  Eigen::Index filled = 0;
  for (Eigen::Index c = 0; c < partial.cols(); ++c) out.col(filled++) = partial.col(c);
  for (Eigen::Index e = 0; e < dimension && filled < dimension; ++e) {
    ComplexVector v = ComplexVector::Unit(dimension, e);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < filled; ++k) v -= out.col(k) * out.col(k).dot(v);
    }
    const double n = v.norm();
    if (n > 1e-8) out.col(filled++) = v / n;
  }
  if (filled != dimension) throw ValidationError("could not complete the Schmidt basis");
  return out;
}

}  // namespace

OverlapDeficit::OverlapDeficit(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ValidationError("overlap deficit must lie in [0, 1]");
}

double entropy_from_coefficients(std::span<const double> coefficients) {
  double s = 0.0;
  for (const double c : coefficients) {
    const double p = c * c;
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double entropy(const StateVector& psi, Bipartition cut) {
  const SchmidtDecomposition sd = schmidt(psi, cut);
  if (sd.rank() <= 1) return 0.0;
  return entropy_from_coefficients(sd.coefficients);
}

double epsilon_entropy_approx(const OverlapDeficit& e) {
  const double half = 0.5 * e.epsilon();
  if (half == 0.0) return 0.0;
  return half * (1.0 - std::log(half));
}

EntropyReport entropy_report(const OverlapDeficit& e) {
  const double half_amplitude = 1.0 / std::numbers::sqrt2;
  const StateVector psi = two_branch_state(e.overlap_magnitude(), half_amplitude, half_amplitude);
  EntropyReport r;
  r.exact_nats = entropy(psi, Bipartition{1});
  r.approx_nats = epsilon_entropy_approx(e);
  r.relative_error = r.exact_nats > 0.0 ? std::abs(r.approx_nats - r.exact_nats) / r.exact_nats : 0.0;
  return r;
}

StateVector two_branch_state(Complex overlap, Complex amp_r, Complex amp_t) {
  const double g = std::abs(overlap);
  if (g > 1.0 + 1e-12) throw ValidationError("pointer overlap must satisfy |g| <= 1");
  if (std::abs(std::norm(amp_r) + std::norm(amp_t) - 1.0) > 1e-9) {
    throw ValidationError("branch amplitudes must be normalized");
  }
  const double orth = std::sqrt(std::max(0.0, 1.0 - g * g));
  SpaceLayout layout({Factor::discrete("path", 2), Factor::discrete("apparatus", 2)});
  ComplexVector a(4);
  // |r> = |0>, |t> = |1>; amplitudes ordered (path, apparatus)
  a << amp_r, 0.0, amp_t * overlap, amp_t * orth;
  return StateVector(std::move(layout), std::move(a));
}

UnitaryOperator disentangling_unitary(const StateVector& psi, Bipartition cut) {
  const SchmidtDecomposition sd = schmidt(psi, cut);
  const auto& layout = psi.layout();
  const auto dl = static_cast<Eigen::Index>(layout.span_dimension(0, cut.left_factors));
  const auto dr = static_cast<Eigen::Index>(layout.span_dimension(cut.left_factors, layout.size()));
  if (layout.total_dimension() > HermitianOperator::max_dense_dimension) {
    throw DimensionError("layout too large for a dense disentangling unitary");
  }
  const ComplexMatrix left = complete_basis(sd.left_vectors, dl);
  const ComplexMatrix right = complete_basis(sd.right_vectors, dr);

  // U = sum_{i,j} |(i-j) mod dl, j><u_i v_j|
  ComplexMatrix u = ComplexMatrix::Zero(dl * dr, dl * dr);
  for (Eigen::Index i = 0; i < dl; ++i) {
    for (Eigen::Index j = 0; j < dr; ++j) {
      const Eigen::Index target = (((i - j) % dl + dl) % dl) * dr + j;
      for (Eigen::Index a = 0; a < dl; ++a) {
        const Complex ua = std::conj(left(a, i));
        if (ua == Complex(0.0)) continue;
        u.row(target).segment(a * dr, dr) += ua * right.col(j).adjoint();
      }
    }
  }
  return UnitaryOperator(layout, std::move(u));
}

}  // namespace qconserve
