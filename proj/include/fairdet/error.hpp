#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fairdet {

// Precondition or shape violation by the caller.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed text or binary input. offset is a byte offset (rasters) or a
// 1-based line number (CSV/config), depending on the reader.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient during training.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, long batch_index)
      : std::runtime_error(what), batch_index_(batch_index) {}
  long batch_index() const noexcept { return batch_index_; }

 private:
  long batch_index_;
};

// Checkpoint shape or header mismatch.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fairdet
