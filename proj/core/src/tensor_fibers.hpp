#pragma once

#include <cstddef>

#include "qconserve/state.hpp"

namespace qconserve::detail {

// `data` is a (left, d, right) row-major tensor; each length-d fiber is
// transformed to the DFT basis, scaled bin-wise, and transformed back.
void apply_fourier_diagonal(const RealVector& values, Complex* data, std::size_t d, std::size_t left,
                            std::size_t right);
void apply_fourier_phase(const ComplexVector& phases, Complex* data, std::size_t d, std::size_t left,
                         std::size_t right);

}  // namespace qconserve::detail
