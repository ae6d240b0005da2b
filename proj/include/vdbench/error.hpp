#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vdbench {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unterminated literal or comment; `offset` is the byte where it starts.
class LexError : public Error {
 public:
  LexError(std::size_t offset, const std::string& what)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ShapeError : public Error {
 public:
  enum class Reason { kNoFunction, kUnbalanced, kMultipleDefinitions, kUnshapeable };

  ShapeError(Reason reason, const std::string& what) : Error(what), reason_(reason) {}
  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

/// Malformed dataset content (bad record, broken pairing, missing file).
class DataError : public Error {
 public:
  using Error::Error;
};

/// External adapter broke the wire protocol, timed out or reported an error.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace vdbench
