#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rtclosure {

/// Base class for failures of the numerical machinery (as opposed to
/// caller mistakes, which surface as std::invalid_argument).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value appeared in a time-dependent solve.
class NumericalBlowup : public NumericalError {
 public:
  NumericalBlowup(double time, std::size_t node, const std::string& what)
      : NumericalError(what + " (t=" + std::to_string(time) +
                       ", node=" + std::to_string(node) + ")"),
        time_(time),
        node_(node) {}

  double time() const noexcept { return time_; }
  std::size_t node() const noexcept { return node_; }

 private:
  double time_;
  std::size_t node_;
};

/// The free-streaming closure was evaluated at a state with 3 n_2 == n_0.
class SingularClosure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Ratio features m_k / m_0 requested where m_0 is (numerically) zero.
class DegenerateDensity : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Relative error requested against a reference with zero norm.
class UndefinedMetric : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TrainingDiverged : public NumericalError {
 public:
  TrainingDiverged(int epoch, const std::string& what)
      : NumericalError(what + " (epoch " + std::to_string(epoch) + ")"),
        epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// A file could not be read or written, or its contents are malformed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rtclosure
