#pragma once

#include <stdexcept>
#include <string>

namespace pmlwave {

/// Invalid user configuration: bad keys, non-divisible geometry, misaligned
/// material interfaces. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solver breakdown or loss of finiteness. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A request the implementation deliberately does not support
/// (e.g. variable damping in the reduced Laplace-space assembly).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pmlwave
