#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eadgen {

// Malformed dialogue-act or dataset text. Carries the byte offset of the
// first character that could not be consumed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Unreadable files, bad records, unresolvable slot tokens.
class DataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inconsistent configuration, e.g. refiner variant/parameter mismatch.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite losses, failed gradient checks.
class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Decoding past the configured maximum sequence length.
class SequenceOverflow : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace eadgen
