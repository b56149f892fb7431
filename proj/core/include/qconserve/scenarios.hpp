#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qconserve/dynamics.hpp"
#include "qconserve/entanglement.hpp"
#include "qconserve/ledger.hpp"
#include "qconserve/measurement.hpp"

namespace qconserve {

// ---------------------------------------------------------------------------
// Beam splitter with a quantum apparatus mode

struct MachZehnderSpec {
  double kick = 1.0;                 // momentum handed to the beam splitter on reflection
  double apparatus_sigma_p = 100.0;  // momentum spread of the beam-splitter collective mode
  Complex amp_r{1.0 / 1.4142135623730951, 0.0};
  Complex amp_t{1.0 / 1.4142135623730951, 0.0};
  std::size_t interaction_steps = 8;

  void validate() const;
};

struct MomentumBranch {
  std::string label;
  double probability = 0.0;
  double photon = 0.0;
  double apparatus = 0.0;
  double total = 0.0;
  double change_from_pre_interaction = 0.0;
};

struct MachZehnderReport {
  std::size_t apparatus_points = 0;
  double momentum_spacing = 0.0;
  double overlap = 1.0;  // <A|B> of the two apparatus pointer states
  double epsilon = 0.0;
  double entropy_exact = 0.0;
  double entropy_approx = 0.0;
  double entropy_relative_error = 0.0;
  double visibility = 1.0;
  double reflected_probability = 0.0;
  double collapsed_fidelity = 0.0;  // collapsed apparatus vs ideal shifted pointer
  double pre_interaction_momentum = 0.0;
  double post_interaction_momentum = 0.0;
  std::vector<MomentumBranch> branches;
  ConservationReport ledger;
};

MachZehnderReport run_mach_zehnder(const MachZehnderSpec& spec);

// ---------------------------------------------------------------------------
// Free Gaussian packet detected in a window

struct GaussianPacketSpec {
  double a = 1.0;
  double mass = 1.0;
  GridSpec grid{4096, 200.0, true};
  double detect_time = 20.0;
  double window_center = 10.0;
  double window_width = 1.0;
  std::size_t steps = default_split_steps;
  std::size_t snapshots = 16;

  void validate() const;
};

/// N exp(-x^2 / 4a^2) sampled on a grid factor labeled "particle".
StateVector gaussian_packet(const GridSpec& grid, double a, double center = 0.0);

struct FreePacketReport {
  double width_at_detection = 0.0;  // sigma(t) = a sqrt(1 + (t / 2ma^2)^2)
  double position_sq_at_detection = 0.0;
  double global_momentum_at_detection = 0.0;
  double window_probability = 0.0;
  double segment_momentum = 0.0;
  double predicted_momentum = 0.0;  // m * window_center / detect_time
  double momentum_difference = 0.0;
  double segment_momentum_sq = 0.0;
  double initial_momentum_sq = 0.0;  // 1 / (4 a^2)
  AuditRecord momentum_audit;
  AuditRecord kinetic_audit;
  ConservationReport ledger;
};

FreePacketReport run_free_packet(const GaussianPacketSpec& spec);

// ---------------------------------------------------------------------------
// Stern-Gerlach splitting with an apparatus momentum ladder

struct SternGerlachSpec {
  double kick = 1.0;
  std::size_t particle_mode_dim = 7;
  std::size_t apparatus_mode_dim = 7;
  double pointer_spread = 0.0;  // Gaussian width (ladder units) of the initial mode states; 0 = sharp
  bool angular_ladder = false;
  std::size_t angular_mode_dim = 3;
  std::size_t interaction_steps = 8;

  void validate() const;
};

struct LadderBranch {
  std::string label;
  double probability = 0.0;
  double particle_delta = 0.0;
  double apparatus_delta = 0.0;
  double total_change = 0.0;  // branch total minus pre-interaction total
  double angular_particle_delta = 0.0;
  double angular_apparatus_delta = 0.0;
  double angular_total_change = 0.0;
};

struct SternGerlachReport {
  double initial_sigma_z = 0.0;
  double initial_sigma_x = 0.0;
  double initial_total_momentum = 0.0;
  double post_total_momentum = 0.0;
  double post_particle_momentum = 0.0;
  double post_apparatus_momentum = 0.0;
  double post_sigma_x = 0.0;
  double pointer_overlap = 0.0;  // Re <chi_up|chi_down> of the mode states correlated with the spin
  double momentum_drift = 0.0;
  std::vector<LadderBranch> branches;
  ConservationReport ledger;
};

SternGerlachReport run_stern_gerlach(const SternGerlachSpec& spec);

// ---------------------------------------------------------------------------
// Superoscillating particle in a box, opened over a window

struct APRBoxSpec {
  double box_length = 1.0;
  std::size_t n_modes = 20;
  double target_wavenumber = 2.0 * 20.0 * 3.141592653589793;
  double window_lo = 0.45;
  double window_hi = 0.55;
  double mass = 1.0;
  std::size_t grid_points = 256;
  std::size_t quadrature_points = 512;
  double preparation_time = 1e-3;  // the state is prepared this long before the opening
  std::size_t preparation_steps = 8;

  [[nodiscard]] double band_limit_wavenumber() const;
  [[nodiscard]] double band_limit_energy() const;
  [[nodiscard]] bool superoscillatory_target() const { return target_wavenumber > band_limit_wavenumber(); }

  /// `require_superoscillation` enforces target above the band limit.
  void validate(bool require_superoscillation = false) const;
};

struct SuperoscillationDesign {
  static constexpr double failure_residual = 0.5;
  static constexpr double svd_cutoff = 1e-12;

  std::vector<Complex> coefficients;  // modes 1..N, unit norm
  double scale = 1.0;                 // norm of the raw least-squares coefficients
  double residual = 0.0;              // relative L2 misfit on the window
  double achieved_local_wavenumber = 0.0;
  double target_wavenumber = 0.0;
  bool success = false;
};

/// Least-squares box-mode coefficients reproducing exp(i k_s x) on the window.
SuperoscillationDesign synthesize_superoscillation(const APRBoxSpec& spec);

/// Hard-wall kinetic energy on a midpoint box grid, diagonal in the sine modes.
HermitianOperator box_kinetic(const GridSpec& grid, double mass);

/// Grid state sum_n c_n sqrt(2/L) sin(n pi x / L), normalized.
StateVector box_mode_state(const GridSpec& grid, const std::vector<Complex>& coefficients);

struct APRBoxReport {
  SuperoscillationDesign design;
  double band_limit_energy = 0.0;
  double pre_measurement_energy = 0.0;
  double preparation_energy_drift = 0.0;
  double p_in = 0.0;
  double p_out = 0.0;
  double inside_energy = 0.0;        // segment kinetic energy, drives the verdict
  double inside_energy_sharp = 0.0;  // <K> of the sharply projected branch; grid dependent
  double inside_local_wavenumber = 0.0;
  bool high_energy = false;          // inside_energy > band_limit_energy
  std::vector<double> inside_mode_weights;  // |<n|psi_in>|^2 for n = 1..grid points
  AuditRecord energy_audit;
  ConservationReport ledger;
};

APRBoxReport run_apr_box(const APRBoxSpec& spec);

}  // namespace qconserve
