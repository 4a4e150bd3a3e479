#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace atomcav {

/// Operand dimensions do not agree (matrix sizes or subsystem layout).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar argument lies outside the validity range of a formula.
class RangeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameters outside the regime a protocol is defined for.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Integration produced non-finite values or lost the state norm.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
  NumericalFailure(const std::string& what, std::size_t index, std::uint64_t seed)
      : std::runtime_error(what + " (trajectory " + std::to_string(index) + ", seed " +
                           std::to_string(seed) + ")"),
        has_trajectory_(true),
        index_(index),
        seed_(seed) {}

  bool has_trajectory() const { return has_trajectory_; }
  std::size_t trajectory_index() const { return index_; }
  std::uint64_t seed() const { return seed_; }

 private:
  bool has_trajectory_ = false;
  std::size_t index_ = 0;
  std::uint64_t seed_ = 0;
};

using WarningHandler = std::function<void(const std::string&)>;

// Regime warnings go through a process-wide sink (stderr by default).
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace atomcav
