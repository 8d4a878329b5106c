#pragma once

#include <stdexcept>
#include <string>

namespace lowlight {

/// Invalid argument: wrong shape, out-of-range parameter, mismatched dimensions.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric precondition of a formula does not hold (e.g. sqrt of a non-positive mean).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An API was used out of order, e.g. backward() with a tape from another parameter revision.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int epoch, const std::string& what)
      : std::runtime_error("optimization diverged at epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace lowlight
