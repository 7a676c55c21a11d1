#pragma once

#include <stdexcept>

namespace cbpsk {

struct SizeError : std::length_error {
  using std::length_error::length_error;
};

struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Raised when an objective is identically zero over the search range.
struct NoOptimumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cbpsk
