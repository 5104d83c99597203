#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ahtlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched vector lengths or an index outside its range.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An object failed one of its construction invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The observation has zero probability under every hypothesis still in the
/// support of the belief.
class DegenerateObservationError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double gap, std::size_t iterations)
      : Error(what), gap_(gap), iterations_(iterations) {}

  double gap() const noexcept { return gap_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  double gap_;
  std::size_t iterations_;
};

/// Raised when the Q-network loss stops being finite.
class TrainingDivergenceError : public Error {
 public:
  TrainingDivergenceError(const std::string& what, std::size_t episode)
      : Error(what), episode_(episode) {}

  /// Zero-based index of the episode during which training diverged.
  std::size_t episode() const noexcept { return episode_; }

 private:
  std::size_t episode_;
};

}  // namespace ahtlab
