#pragma once

#include <stdexcept>
#include <string>

namespace loco {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: empty sequences, non-finite values, bad shapes.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Input too large for an exponential-time oracle.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Binary or text file that does not follow its declared layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Synthetic generation that could not satisfy its constraints.
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Object used with state it was not built for (e.g. a foreign forward cache).
class InvalidState : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient during optimization.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, std::string tensor, std::size_t index,
                   double value)
      : Error(what), tensor_(std::move(tensor)), index_(index), value_(value) {}

  const std::string& tensor() const noexcept { return tensor_; }
  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  std::string tensor_;
  std::size_t index_;
  double value_;
};

}  // namespace loco
