#pragma once

#include <span>

#include "qconserve/operators.hpp"
#include "qconserve/state.hpp"

namespace qconserve {

/// epsilon = 1 - |<A|B>| for two apparatus pointer states.
class OverlapDeficit {
 public:
  explicit OverlapDeficit(double epsilon);
  [[nodiscard]] double epsilon() const { return epsilon_; }
  [[nodiscard]] double overlap_magnitude() const { return 1.0 - epsilon_; }

 private:
  double epsilon_;
};

/// von Neumann entropy in nats from Schmidt coefficients (0 ln 0 = 0).
double entropy_from_coefficients(std::span<const double> coefficients);

/// Entanglement entropy (nats) across a bipartition.
double entropy(const StateVector& psi, Bipartition cut);

/// (eps/2) * (1 - ln(eps/2)); zero at eps = 0.
double epsilon_entropy_approx(const OverlapDeficit& e);

struct EntropyReport {
  double exact_nats = 0.0;
  double approx_nats = 0.0;
  double relative_error = 0.0;  // |approx - exact| / exact, 0 when both vanish
};

/// Exact entropy of the equal-amplitude two-branch state with |<A|B>| = 1 - eps,
/// next to its small-eps approximation.
EntropyReport entropy_report(const OverlapDeficit& e);

/// amp_r |r>|A> + amp_t |t>|B> on layout {path: 2, apparatus: 2}, with
/// |A> = |0> and |B> = g|0> + sqrt(1 - |g|^2)|1>, g = overlap.
StateVector two_branch_state(Complex overlap, Complex amp_r, Complex amp_t);

/// Global unitary mapping psi to a product state across `cut`.
///
/// Built from the completed Schmidt bases: |u_i>|v_j> is sent to the
/// computational product state |(i - j) mod d_left>|j>, so every Schmidt pair
/// |u_i>|v_i> lands on |0>|i>.
UnitaryOperator disentangling_unitary(const StateVector& psi, Bipartition cut);

}  // namespace qconserve
