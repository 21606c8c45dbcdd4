#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace placekit {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violated a documented invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Referenced anchor id or class is not present in the scene.
class LookupError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Malformed text or binary input. `offset` is a byte offset into the input
// and `length` the extent of the offending span (0 when unknown).
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t offset, std::size_t length = 0)
      : ValidationError(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset),
        length_(length) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t length() const noexcept { return length_; }

 private:
  std::size_t offset_;
  std::size_t length_;
};

// A prompt clause matched a template but named an anchor class that the
// vocabulary does not contain.
class ResolutionError : public LookupError {
 public:
  using LookupError::LookupError;
};

// Procedural generation could not satisfy its spec.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure (missing file, unwritable directory).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace placekit
