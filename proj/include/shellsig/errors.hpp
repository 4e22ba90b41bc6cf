#pragma once

#include <stdexcept>
#include <string>

namespace shellsig {

// Base for everything this library throws on purpose. The CLI maps the
// whole family to the "data error" exit code; anything else is internal.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// File or directory could not be read/written.
struct IoError : Error {
  using Error::Error;
};

// Input was not syntactically valid (e.g. malformed JSON).
struct ParseError : Error {
  using Error::Error;
};

// Input parsed but does not match the expected document shape.
struct SchemaError : Error {
  using Error::Error;
};

// A precondition on well-formed data was violated (bad config value,
// duplicate id, label outside the class set, ...).
struct ValidationError : Error {
  using Error::Error;
};

// Vocabulary fitting failed (empty document list and similar).
struct FitError : Error {
  using Error::Error;
};

// Training could not proceed (single-class input, size mismatches).
struct TrainingError : Error {
  using Error::Error;
};

// A vector/model dimensionality mismatch.
struct DimensionError : Error {
  using Error::Error;
};

}  // namespace shellsig
