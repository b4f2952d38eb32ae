#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gbf {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-side contract was violated (length mismatch, empty signal, bad order).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN or Inf.
class NumericOverflowError : public Error {
 public:
  NumericOverflowError(const std::string& where, std::size_t index)
      : Error(where + ": non-finite value at sample " + std::to_string(index)),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// The Wiener-Hopf normal matrix could not be factored.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

/// Training loss blew up relative to its starting value.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// A model or config file could not be read. `path()` points at the offending field,
/// e.g. `stages[1].poly[2]`.
class ParseError : public Error {
 public:
  ParseError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A signal file (CSV or WAV) is malformed or unreadable.
class SignalFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace gbf
