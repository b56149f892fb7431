#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "qconserve/error.hpp"
#include "qconserve/scenarios.hpp"

namespace qconserve {

namespace {

constexpr double pi = std::numbers::pi;

// Orthogonal sine transform on the midpoint grid: row n-1 holds mode n
// sampled at x_j; the last row (n = M, alternating signs) is rescaled.
RealMatrix sine_transform(std::size_t points) {
  const auto m = static_cast<Eigen::Index>(points);
  const double dm = static_cast<double>(points);
  RealMatrix s(m, m);
  for (Eigen::Index n = 1; n <= m; ++n) {
    const double w = (n == m) ? std::sqrt(1.0 / dm) : std::sqrt(2.0 / dm);
    for (Eigen::Index j = 0; j < m; ++j) {
      s(n - 1, j) = w * std::sin(static_cast<double>(n) * pi * (static_cast<double>(j) + 0.5) / dm);
    }
  }
  return s;
}

void require_box(const GridSpec& grid) {
  grid.validate();
  if (grid.periodic) throw ValidationError("box operators need a non-periodic (hard-wall) grid");
}

// Mean phase derivative of samples f(x_i) on a uniform grid.
double mean_phase_slope(const ComplexVector& f, double x_first, double x_last) {
  double unwrapped = 0.0;
  for (Eigen::Index i = 1; i < f.size(); ++i) {
    double d = std::arg(f[i]) - std::arg(f[i - 1]);
    d -= 2.0 * pi * std::round(d / (2.0 * pi));
    unwrapped += d;
  }
  return unwrapped / (x_last - x_first);
}

std::vector<double> quadrature_nodes(double lo, double hi, std::size_t count) {
  std::vector<double> x(count);
  const double h = (hi - lo) / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) x[i] = lo + (static_cast<double>(i) + 0.5) * h;
  return x;
}

// Continuous sine interpolant of a grid state and its derivative at x.
struct Interpolant {
  RealMatrix transform;
  ComplexVector coeffs;
  double length = 1.0;

  void eval(double x, Complex& value, Complex& slope) const {
    const auto m = coeffs.size();
    const double dm = static_cast<double>(m);
    value = 0.0;
    slope = 0.0;
    for (Eigen::Index n = 1; n <= m; ++n) {
      const double w = (n == m) ? std::sqrt(1.0 / dm) : std::sqrt(2.0 / dm);
      const double kn = static_cast<double>(n) * pi / length;
      value += coeffs[n - 1] * (w * std::sin(kn * x));
      slope += coeffs[n - 1] * (w * kn * std::cos(kn * x));
    }
  }
};

}  // namespace

double APRBoxSpec::band_limit_wavenumber() const {
  return static_cast<double>(n_modes) * pi / box_length;
}

double APRBoxSpec::band_limit_energy() const {
  const double k = band_limit_wavenumber();
  return k * k / (2.0 * mass);
}

void APRBoxSpec::validate(bool require_superoscillation) const {
  if (!(box_length > 0.0) || !std::isfinite(box_length)) throw ValidationError("box_length must be positive");
  if (n_modes < 8) throw ValidationError("n_modes must be at least 8");
  if (!(target_wavenumber > 0.0) || !std::isfinite(target_wavenumber)) {
    throw ValidationError("target_wavenumber must be positive");
  }
  if (!(window_lo > 0.0) || !(window_hi < box_length) || !(window_lo < window_hi)) {
    throw ValidationError("window must satisfy 0 < window_lo < window_hi < box_length");
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ValidationError("mass must be positive");
  GridSpec{grid_points, box_length, false}.validate();
  if (grid_points <= 2 * n_modes) throw ValidationError("grid_points must exceed twice n_modes");
  if (quadrature_points < 16) throw ValidationError("quadrature_points must be at least 16");
  if (!(preparation_time >= 0.0) || !std::isfinite(preparation_time)) {
    throw ValidationError("preparation_time must be finite and non-negative");
  }
  if (preparation_steps == 0) throw ValidationError("preparation_steps must be positive");
  if (require_superoscillation && !superoscillatory_target()) {
    throw ValidationError("target_wavenumber must exceed the band limit n_modes*pi/box_length");
  }
  if (superoscillatory_target() && window_hi - window_lo < 2.0 * (2.0 * pi / target_wavenumber)) {
    throw ValidationError("window must span at least two target wavelengths");
  }
}

SuperoscillationDesign synthesize_superoscillation(const APRBoxSpec& spec) {
  spec.validate();
  const auto nodes = quadrature_nodes(spec.window_lo, spec.window_hi, spec.quadrature_points);
  const auto q = static_cast<Eigen::Index>(nodes.size());
  const auto n = static_cast<Eigen::Index>(spec.n_modes);
  const double norm = std::sqrt(2.0 / spec.box_length);

  ComplexMatrix a(q, n);
  ComplexVector target(q);
  for (Eigen::Index i = 0; i < q; ++i) {
    for (Eigen::Index m = 0; m < n; ++m) {
      a(i, m) = norm * std::sin(static_cast<double>(m + 1) * pi * nodes[i] / spec.box_length);
    }
    target[i] = std::polar(1.0, spec.target_wavenumber * nodes[i]);
  }

  Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  const double cut = SuperoscillationDesign::svd_cutoff * sv[0];
  ComplexVector projected = svd.matrixU().adjoint() * target;
  for (Eigen::Index i = 0; i < sv.size(); ++i) projected[i] = sv[i] > cut ? projected[i] / sv[i] : Complex(0.0);
  const ComplexVector c = svd.matrixV() * projected;
  const ComplexVector fit = a * c;

  SuperoscillationDesign d;
  d.target_wavenumber = spec.target_wavenumber;
  d.residual = (fit - target).norm() / target.norm();
  d.scale = c.norm();
  d.achieved_local_wavenumber = mean_phase_slope(fit, nodes.front(), nodes.back());
  d.success = d.residual <= SuperoscillationDesign::failure_residual &&
              d.achieved_local_wavenumber >= 0.9 * spec.target_wavenumber;
  d.coefficients.resize(static_cast<std::size_t>(n));
  for (Eigen::Index m = 0; m < n; ++m) d.coefficients[static_cast<std::size_t>(m)] = c[m] / d.scale;
  return d;
}

HermitianOperator box_kinetic(const GridSpec& grid, double mass) {
  require_box(grid);
  if (!(mass > 0.0)) throw ValidationError("mass must be positive");
  const RealMatrix s = sine_transform(grid.points);
  RealVector e(s.rows());
  for (Eigen::Index n = 1; n <= s.rows(); ++n) {
    const double k = static_cast<double>(n) * pi / grid.length;
    e[n - 1] = k * k / (2.0 * mass);
  }
  const RealMatrix k = s.transpose() * e.asDiagonal() * s;
  return HermitianOperator::dense(ComplexMatrix(k.cast<Complex>()));
}

StateVector box_mode_state(const GridSpec& grid, const std::vector<Complex>& coefficients) {
  require_box(grid);
  if (coefficients.empty() || coefficients.size() >= grid.points) {
    throw ValidationError("box state needs between 1 and points-1 mode coefficients");
  }
  ComplexVector amps = ComplexVector::Zero(static_cast<Eigen::Index>(grid.points));
  for (std::size_t j = 0; j < grid.points; ++j) {
    const double x = grid.coordinate(j);
    for (std::size_t n = 0; n < coefficients.size(); ++n) {
      amps[static_cast<Eigen::Index>(j)] += coefficients[n] * std::sin(static_cast<double>(n + 1) * pi * x / grid.length);
    }
  }
  if (!(amps.norm() > 0.0)) throw ValidationError("box state has zero norm");
  return StateVector(SpaceLayout({Factor::on_grid("particle", grid)}), amps).normalized();
}

APRBoxReport run_apr_box(const APRBoxSpec& spec) {
  spec.validate();
  APRBoxReport rep;
  rep.design = synthesize_superoscillation(spec);
  if (rep.design.residual > SuperoscillationDesign::failure_residual) {
    throw NumericalGuardError("superoscillation synthesis failed (window residual above 0.5)");
  }
  rep.band_limit_energy = spec.band_limit_energy();

  const GridSpec grid{spec.grid_points, spec.box_length, false};
  const StateVector designed = box_mode_state(grid, rep.design.coefficients);
  const SpaceLayout& layout = designed.layout();
  const HermitianOperator kinetic = box_kinetic(grid, spec.mass).on("particle");
  const HermitianOperator position =
      grid_function(grid, [](double x) { return x; }).on("particle");

  ConservationLedger ledger;
  ledger.track(LedgerEntry::sum_form("energy", layout, {{"particle", box_kinetic(grid, spec.mass)}}), kinetic);
  ledger.track(LedgerEntry::plain("position", in_layout(position, layout)), kinetic);

  // Prepared a short time before the opening so that the designed profile is
  // what the window sees.
  const SpectralPropagator propagator(in_layout(kinetic, layout), layout);
  const StateVector prepared = propagator.evolve(designed, -spec.preparation_time);
  ledger.snapshot(-spec.preparation_time, prepared);
  EvolutionPlan plan{kinetic, spec.preparation_time, spec.preparation_steps, EvolutionMethod::exact};
  const StateVector psi = evolve(
      plan, prepared, [&](double t, const StateVector& s) { ledger.snapshot(t - spec.preparation_time, s); });

  rep.pre_measurement_energy = expectation(kinetic, psi);
  rep.preparation_energy_drift = std::abs(rep.pre_measurement_energy - expectation(kinetic, prepared));

  const ProjectorSet opener = window_projector(grid, spec.window_lo, spec.window_hi, layout, "particle");
  // Post-selection on the opening: the inside branch is kept however small.
  const auto branches = measure(psi, opener, 0.0);
  rep.p_in = branches[0].probability;
  rep.p_out = branches[1].probability;

  if (!branches[0].is_null()) {
    const StateVector& inside = *branches[0].state;
    rep.inside_energy_sharp = expectation(kinetic, inside);
    const RealMatrix s = sine_transform(grid.points);
    const ComplexVector modes = s.cast<Complex>() * inside.amplitudes();
    rep.inside_mode_weights.resize(static_cast<std::size_t>(modes.size()));
    for (Eigen::Index n = 0; n < modes.size(); ++n) rep.inside_mode_weights[static_cast<std::size_t>(n)] = std::norm(modes[n]);

    // Segment energy: the smooth interpolant of the measured state, restricted to the window.
    const Interpolant f{s, s.cast<Complex>() * psi.amplitudes(), spec.box_length};
    const auto nodes = quadrature_nodes(spec.window_lo, spec.window_hi, spec.quadrature_points);
    double weight = 0.0;
    double gradient = 0.0;
    ComplexVector samples(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      Complex v;
      Complex dv;
      f.eval(nodes[i], v, dv);
      samples[static_cast<Eigen::Index>(i)] = v;
      weight += std::norm(v);
      gradient += std::norm(dv);
    }
    rep.inside_energy = gradient / (2.0 * spec.mass * weight);
    rep.inside_local_wavenumber = mean_phase_slope(samples, nodes.front(), nodes.back());
  }
  rep.high_energy = rep.inside_energy > rep.band_limit_energy;
  rep.energy_audit = total_expectation_audit(psi, opener, kinetic);

  ledger.record_measurement("opening", branches, psi, &opener, &prepared);
  rep.ledger = ledger.report();
  return rep;
}

}  // namespace qconserve
