#pragma once

#include <stdexcept>
#include <string>

namespace catfield {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

/// Population leaked into the last levels of the truncated number basis.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, double tail_mass)
      : Error(what), tail_mass_(tail_mass) {}
  double tail_mass() const noexcept { return tail_mass_; }

 private:
  double tail_mass_;
};

class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// A caller violated a documented precondition (span, regime, domain).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The weak-coupling closed form does not cover the requested constant of motion.
class UnsupportedBranch : public Error {
 public:
  using Error::Error;
};

class DegenerateState : public Error {
 public:
  using Error::Error;
};

/// A protocol target lies outside what the drive can reach.
class InfeasibleTarget : public Error {
 public:
  InfeasibleTarget(const std::string& what, double envelope_lo, double envelope_hi)
      : Error(what), lo_(envelope_lo), hi_(envelope_hi) {}
  double envelope_lo() const noexcept { return lo_; }
  double envelope_hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

class InvalidReservoir : public Error {
 public:
  using Error::Error;
};

class NonPureState : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace catfield
