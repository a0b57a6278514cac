#pragma once

#include <stdexcept>
#include <string>

namespace ssdeconv {

// Broad failure classes. The CLI maps them onto exit codes 2/3/4.
enum class ErrorKind { Usage, Data, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

/// Density evaluated at a point where it is infinite (e.g. gamma difference with
/// shape <= 1/2 at the origin).
class DensityUnbounded : public NumericError {
 public:
  explicit DensityUnbounded(const std::string& what) : NumericError(what) {}
};

/// |characteristic function| fell below the hard floor somewhere on the
/// Fourier integration cube.
class VanishingCharacteristic : public NumericError {
 public:
  explicit VanishingCharacteristic(const std::string& what) : NumericError(what) {}
};

class SingularMatrix : public NumericError {
 public:
  explicit SingularMatrix(const std::string& what) : NumericError(what) {}
};

/// Quantile search could not bracket the requested level.
class LevelUnreachable : public NumericError {
 public:
  explicit LevelUnreachable(const std::string& what) : NumericError(what) {}
};

}  // namespace ssdeconv
