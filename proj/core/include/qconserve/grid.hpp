#pragma once

#include <cstddef>

namespace qconserve {

/// Uniform one-dimensional grid in natural units (hbar = 1).
///
/// Periodic grids carry centered coordinates x_j = -L/2 + j*dx, j in [0, points).
/// Non-periodic grids describe a hard-wall box [0, L] sampled at cell midpoints
/// x_j = (j + 1/2)*dx, on which the sine modes sin(n*pi*x/L), n = 1..points-1,
/// are exactly orthogonal.
struct GridSpec {
  std::size_t points = 0;
  double length = 0.0;
  bool periodic = true;

  [[nodiscard]] double spacing() const { return length / static_cast<double>(points); }
  [[nodiscard]] double coordinate(std::size_t j) const;
  [[nodiscard]] double lower_edge() const { return periodic ? -0.5 * length : 0.0; }
  [[nodiscard]] double upper_edge() const { return periodic ? 0.5 * length : length; }

  /// Angular wavenumber of discrete Fourier bin `bin` (bins above points/2 are negative).
  [[nodiscard]] double wavenumber(std::size_t bin) const;

  /// Throws ValidationError unless points is a power of two >= 16 and length > 0.
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

}  // namespace qconserve
