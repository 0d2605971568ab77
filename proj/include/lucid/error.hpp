#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lucid {

/// Malformed or unsupported file content; `offset` is the byte position
/// where parsing stopped.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite value. `index` names the iteration
/// or sample that triggered it.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, long index)
      : std::runtime_error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

  long index() const noexcept { return index_; }

 private:
  long index_;
};

/// Broken internal invariant. Distinct from bad input, which is reported
/// through std::invalid_argument.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace lucid
