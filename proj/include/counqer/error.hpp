#pragma once

#include <stdexcept>
#include <string>

namespace counqer {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or input-format violation (bad IRI, wrong variant, score out of range...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A named resource (KB id, predicate, file entry) does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Local I/O failure: unreadable dump, unwritable output.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed N-Triples line in strict mode.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : ValidationError("line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Network failure or non-success HTTP status from a SPARQL endpoint. Always retriable.
class TransportError : public Error {
 public:
  TransportError(const std::string& message, int status = 0)
      : Error(message), status_(status) {}

  /// HTTP status, or 0 when no response was received.
  int status() const noexcept { return status_; }
  bool retriable() const noexcept { return true; }

 private:
  int status_;
};

class TimeoutError : public TransportError {
 public:
  explicit TimeoutError(const std::string& message) : TransportError(message, 0) {}
};

/// The endpoint answered, but not with a well-formed SPARQL results document.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace counqer
