#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ltest {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of a numeric routine (bad probability, k out of range, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Input data that cannot be tested: degenerate columns, malformed files, misaligned dates.
class DataError : public Error {
 public:
  using Error::Error;

  DataError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  // 1-based source line, 0 when not tied to a file.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

// A calibration or resampling step produced an unusable result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ltest
