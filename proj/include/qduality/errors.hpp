#pragma once

#include <stdexcept>
#include <string>

namespace qduality {

// Base class so the CLI can map library failures onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid combination of settings (scheme/boundary mismatch, stability guard, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Field length does not match the grid, or a trajectory is too short.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Zero or non-normalized input where a normalized state is required.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Finite-difference step outside the range where tolerances are meaningful.
class ToleranceUnreliableError : public Error {
 public:
  using Error::Error;
};

}  // namespace qduality
