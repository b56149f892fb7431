#pragma once

#include <stdexcept>
#include <string>

namespace qconserve {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unknown, duplicate or non-contiguous factor labels; scope mismatches.
class LayoutError : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch or a dimension cap exceeded.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value or configuration violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A run would leave the region where the discretization is trustworthy
/// (packet touching the grid edge, kick leaving a truncated ladder, ...).
class NumericalGuardError : public Error {
 public:
  using Error::Error;
};

}  // namespace qconserve
