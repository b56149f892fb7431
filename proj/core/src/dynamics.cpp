#include "qconserve/dynamics.hpp"

#include <cmath>
#include <numeric>

#include "qconserve/error.hpp"
#include "tensor_fibers.hpp"

namespace qconserve {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

std::optional<std::size_t> single_fourier_factor(const HermitianOperator& h, const SpaceLayout& layout) {
  if (h.terms().empty()) return std::nullopt;
  std::optional<std::string> factor;
  for (const auto& t : h.terms()) {
    if (!std::holds_alternative<FourierDiagonalRep>(t.rep)) return std::nullopt;
    const std::string label = t.factor.empty() ? (layout.size() == 1 ? layout.factors()[0].label : "") : t.factor;
    if (label.empty()) return std::nullopt;
    if (factor && *factor != label) return std::nullopt;
    factor = label;
  }
  return layout.index_of(*factor);
}

std::size_t grid_factor_index(const SpaceLayout& layout) {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout.factors()[i].grid) {
      if (found) throw ValidationError("split-step evolution supports exactly one grid factor");
      found = i;
    }
  }
  if (!found) throw ValidationError("split-step evolution needs a grid factor");
  return *found;
}

}  // namespace

SpectralPropagator::SpectralPropagator(const HermitianOperator& h, const SpaceLayout& layout) : layout_(layout) {
  const HermitianOperator full = in_layout(h, layout);

  if (const auto idx = single_fourier_factor(full, layout)) {
    RealVector energies = RealVector::Zero(static_cast<Eigen::Index>(layout.factors()[*idx].dimension));
    for (const auto& t : full.terms()) energies += std::get<FourierDiagonalRep>(t.rep).values;
    fourier_ = FourierPath{*idx, std::move(energies)};
    return;
  }

  const SparseMatrix m = full.to_sparse();
  const auto n = static_cast<std::size_t>(m.rows());
  DisjointSets sets(n);
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      if (it.value() != Complex(0.0)) sets.unite(static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col()));
    }
  }
  std::vector<std::vector<Eigen::Index>> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[sets.find(i)].push_back(static_cast<Eigen::Index>(i));

  std::vector<Eigen::Index> position(n);
  for (auto& g : groups) {
    if (g.empty()) continue;
    if (g.size() > max_block_dimension) {
      throw DimensionError("Hamiltonian block of dimension " + std::to_string(g.size()) +
                           " exceeds the eigendecomposition cap of " + std::to_string(max_block_dimension));
    }
    const auto bn = static_cast<Eigen::Index>(g.size());
    for (Eigen::Index a = 0; a < bn; ++a) position[static_cast<std::size_t>(g[static_cast<std::size_t>(a)])] = a;
    ComplexMatrix sub = ComplexMatrix::Zero(bn, bn);
    for (const Eigen::Index col : g) {
      for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
        sub(position[static_cast<std::size_t>(it.row())], position[static_cast<std::size_t>(col)]) += it.value();
      }
    }
    Block block;
    block.indices = std::move(g);
    if (bn == 1) {
      block.energies = RealVector::Constant(1, sub(0, 0).real());
      block.vectors = ComplexMatrix::Identity(1, 1);
    } else {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sub);
      block.energies = solver.eigenvalues();
      block.vectors = solver.eigenvectors();
    }
    blocks_.push_back(std::move(block));
  }
}

StateVector SpectralPropagator::evolve(const StateVector& psi, double t) const {
  if (!(psi.layout() == layout_)) throw LayoutError("state layout does not match the propagator");
  if (!std::isfinite(t)) throw ValidationError("evolution time must be finite");
  ComplexVector amps = psi.amplitudes();
  if (t == 0.0) return psi;

  if (fourier_) {
    const std::size_t idx = fourier_->factor;
    ComplexVector phases(fourier_->energies.size());
    for (Eigen::Index k = 0; k < phases.size(); ++k) phases[k] = std::polar(1.0, -fourier_->energies[k] * t);
    detail::apply_fourier_phase(phases, amps.data(), layout_.factors()[idx].dimension,
                                layout_.span_dimension(0, idx), layout_.span_dimension(idx + 1, layout_.size()));
    return StateVector(layout_, std::move(amps));
  }

  for (const auto& b : blocks_) {
    const auto bn = static_cast<Eigen::Index>(b.indices.size());
    ComplexVector x(bn);
    for (Eigen::Index a = 0; a < bn; ++a) x[a] = psi.amplitudes()[b.indices[static_cast<std::size_t>(a)]];
    ComplexVector c = b.vectors.adjoint() * x;
    for (Eigen::Index a = 0; a < bn; ++a) c[a] *= std::polar(1.0, -b.energies[a] * t);
    x.noalias() = b.vectors * c;
    for (Eigen::Index a = 0; a < bn; ++a) amps[b.indices[static_cast<std::size_t>(a)]] = x[a];
  }
  return StateVector(layout_, std::move(amps));
}

StateVector evolve_exact(const HermitianOperator& h, const StateVector& psi, double t) {
  return SpectralPropagator(h, psi.layout()).evolve(psi, t);
}

StateVector evolve_split_step(double mass, const RealVector& potential, const StateVector& psi, double t,
                              std::size_t steps) {
  const auto& layout = psi.layout();
  const std::size_t idx = grid_factor_index(layout);
  const GridSpec& grid = *layout.factors()[idx].grid;
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ValidationError("mass must be positive");
  if (static_cast<std::size_t>(potential.size()) != grid.points) {
    throw DimensionError("potential must have one value per grid point");
  }
  if (!potential.allFinite()) throw ValidationError("potential values must be finite");
  if (!std::isfinite(t)) throw ValidationError("evolution time must be finite");
  if (steps == 0) throw ValidationError("split-step evolution needs at least one step");
  if (t == 0.0) return psi;

  const double dt = t / static_cast<double>(steps);
  const std::size_t d = grid.points;
  const std::size_t left = layout.span_dimension(0, idx);
  const std::size_t right = layout.span_dimension(idx + 1, layout.size());
  const auto D = static_cast<Eigen::Index>(d);

  ComplexVector kinetic_phase(D);
  for (Eigen::Index k = 0; k < D; ++k) {
    const double wn = grid.wavenumber(static_cast<std::size_t>(k));
    kinetic_phase[k] = std::polar(1.0, -wn * wn / (2.0 * mass) * dt);
  }
  const bool has_potential = (potential.array() != 0.0).any();
  ComplexVector half_potential(D), full_potential(D);
  for (Eigen::Index j = 0; j < D; ++j) {
    half_potential[j] = std::polar(1.0, -potential[j] * dt * 0.5);
    full_potential[j] = std::polar(1.0, -potential[j] * dt);
  }
  auto multiply_potential = [&](ComplexVector& amps, const ComplexVector& phase) {
    for (std::size_t l = 0; l < left; ++l) {
      for (std::size_t j = 0; j < d; ++j) {
        const auto offset = static_cast<Eigen::Index>((l * d + j) * right);
        amps.segment(offset, static_cast<Eigen::Index>(right)) *= phase[static_cast<Eigen::Index>(j)];
      }
    }
  };

  ComplexVector amps = psi.amplitudes();
  if (has_potential) multiply_potential(amps, half_potential);
  for (std::size_t s = 0; s < steps; ++s) {
    detail::apply_fourier_phase(kinetic_phase, amps.data(), d, left, right);
    if (has_potential) multiply_potential(amps, s + 1 == steps ? half_potential : full_potential);
  }
  return StateVector(layout, std::move(amps));
}

void EvolutionPlan::validate(const SpaceLayout& layout) const {
  if (!std::isfinite(duration)) throw ValidationError("evolution duration must be finite");
  if (steps == 0) throw ValidationError("evolution plan needs at least one step");
  if (method == EvolutionMethod::split_step) {
    const std::size_t idx = grid_factor_index(layout);
    if (!(mass > 0.0)) throw ValidationError("split-step plan needs a positive mass");
    if (static_cast<std::size_t>(potential.size()) != layout.factors()[idx].dimension) {
      throw ValidationError("split-step plan needs one potential value per grid point");
    }
  } else {
    if (!hamiltonian) throw ValidationError("exact evolution plan needs a Hamiltonian");
    (void)in_layout(*hamiltonian, layout);
  }
}

StateVector evolve(const EvolutionPlan& plan, const StateVector& psi, const EvolutionObserver& observer,
                   std::size_t observe_every) {
  plan.validate(psi.layout());
  if (observe_every == 0) observe_every = 1;
  const double dt = plan.duration / static_cast<double>(plan.steps);
  StateVector current = psi;

  if (plan.method == EvolutionMethod::exact) {
    const SpectralPropagator propagator(*plan.hamiltonian, psi.layout());
    for (std::size_t s = 1; s <= plan.steps; ++s) {
      const double t = dt * static_cast<double>(s);
      current = propagator.evolve(psi, t);
      if (observer && (s % observe_every == 0 || s == plan.steps)) observer(t, current);
    }
    return current;
  }

  for (std::size_t s = 1; s <= plan.steps; ++s) {
    current = evolve_split_step(plan.mass, plan.potential, current, dt, 1);
    if (observer && (s % observe_every == 0 || s == plan.steps)) observer(dt * static_cast<double>(s), current);
  }
  return current;
}

}  // namespace qconserve
