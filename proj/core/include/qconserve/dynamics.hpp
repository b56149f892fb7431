#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "qconserve/operators.hpp"
#include "qconserve/state.hpp"

namespace qconserve {

/// Prepared eigendecomposition of a time-independent Hamiltonian.
///
/// The Hamiltonian is split into its invariant blocks (connected components
/// of its sparsity pattern) and each block is diagonalized densely, so block
/// diagonal couplings stay cheap. A Hamiltonian made only of Fourier-diagonal
/// terms on one factor is propagated by phases in the Fourier basis. The
/// object is immutable once built and can be shared between threads.
class SpectralPropagator {
 public:
  static constexpr std::size_t max_block_dimension = 4096;

  SpectralPropagator(const HermitianOperator& h, const SpaceLayout& layout);

  [[nodiscard]] const SpaceLayout& layout() const { return layout_; }
  [[nodiscard]] StateVector evolve(const StateVector& psi, double t) const;
  [[nodiscard]] std::size_t block_count() const { return blocks_.size(); }

 private:
  struct Block {
    std::vector<Eigen::Index> indices;
    RealVector energies;
    ComplexMatrix vectors;
  };
  struct FourierPath {
    std::size_t factor = 0;
    RealVector energies;
  };

  SpaceLayout layout_;
  std::vector<Block> blocks_;
  std::optional<FourierPath> fourier_;
};

/// exp(-i H t) psi.
StateVector evolve_exact(const HermitianOperator& h, const StateVector& psi, double t);

/// Strang-split propagation of exp(-i (p^2/2m + V(x)) t) on the single grid
/// factor of psi's layout; other factors are spectators.
StateVector evolve_split_step(double mass, const RealVector& potential, const StateVector& psi, double t,
                              std::size_t steps);

enum class EvolutionMethod { exact, split_step };

inline constexpr std::size_t default_split_steps = 1024;

struct EvolutionPlan {
  std::optional<HermitianOperator> hamiltonian;  // required by the exact method
  double duration = 0.0;
  std::size_t steps = 1;
  EvolutionMethod method = EvolutionMethod::exact;
  // split-step metadata
  double mass = 1.0;
  RealVector potential;

  void validate(const SpaceLayout& layout) const;
};

using EvolutionObserver = std::function<void(double t, const StateVector& psi)>;

/// Runs a plan, calling `observer` after every `observe_every`-th step and
/// after the last one.
StateVector evolve(const EvolutionPlan& plan, const StateVector& psi, const EvolutionObserver& observer = {},
                   std::size_t observe_every = 1);

}  // namespace qconserve
