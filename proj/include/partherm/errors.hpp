#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace partherm {

/// Bad arguments: out-of-range parameters, mismatched dimensions, etc.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base class of every failure that is a property of the numbers rather than
/// of the caller's arguments. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonHermitianError : public InvalidArgument {
 public:
  explicit NonHermitianError(double defect)
      : InvalidArgument("matrix is not Hermitian (max |H - H^dag| = " + std::to_string(defect) + ")"),
        defect_(defect) {}
  double defect() const noexcept { return defect_; }

 private:
  double defect_;
};

/// A fidelity-susceptibility denominator vanished exactly.
class DegenerateResonance : public NumericalError {
 public:
  DegenerateResonance(std::size_t a, std::size_t b)
      : NumericalError("degenerate resonance between levels " + std::to_string(a) + " and " +
                       std::to_string(b)),
        a_(a),
        b_(b) {}
  std::size_t a() const noexcept { return a_; }
  std::size_t b() const noexcept { return b_; }

 private:
  std::size_t a_, b_;
};

class EmptyWindow : public NumericalError {
 public:
  explicit EmptyWindow(double center)
      : NumericalError("no levels inside the energy window centred at " + std::to_string(center)),
        center_(center) {}
  double center() const noexcept { return center_; }

 private:
  double center_;
};

class DegenerateOverlap : public NumericalError {
 public:
  explicit DegenerateOverlap(std::size_t row)
      : NumericalError("all overlaps of state " + std::to_string(row) + " are below the matching floor"),
        row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Adaptive integration ran out of refinements; carries the partial estimate.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double estimate, double error)
      : NumericalError(what + " (estimate " + std::to_string(estimate) + ", error " + std::to_string(error) + ")"),
        estimate_(estimate),
        error_(error) {}
  double estimate() const noexcept { return estimate_; }
  double error() const noexcept { return error_; }

 private:
  double estimate_, error_;
};

/// Configuration validation failure; `field` names the offending key.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidArgument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace partherm
