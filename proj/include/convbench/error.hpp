#pragma once

#include <stdexcept>
#include <string>

namespace convbench {

// Every failure raised by the library derives from Error so callers can
// catch the whole family at a subsystem boundary (the CLI maps them onto exit
// codes).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A descriptor violates its field invariants or yields an empty output.
class InvalidDescriptor : public Error {
 public:
  using Error::Error;
};

// The selected algorithm does not implement this descriptor (e.g. grouped
// input to the blocked direct kernel).
class UnsupportedDescriptor : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Start/update/snapshot misuse on a PhaseLedger.
class InstrumentationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A file's header does not carry the required columns.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A data row could not be parsed or failed validation. `row()` is 1-based and
// counts data rows only (the header is row 0).
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace convbench
