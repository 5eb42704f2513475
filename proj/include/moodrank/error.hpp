#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace moodrank {

// Base for every data-level failure: malformed or invalid input files,
// missing embeddings, unreadable artifacts. Programming-contract violations
// (bad shapes, out-of-range arguments) use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A row or document that could not be read. `line` is 1-based; 0 means the
// failure is not tied to a particular line.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& message);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

// Well-formed input whose values break a domain rule (range, emptiness, ...).
class ValidationError : public ParseError {
 public:
  using ParseError::ParseError;
  explicit ValidationError(const std::string& message) : ParseError({}, 0, message) {}
};

// Artifact with an unknown or unreadable format tag.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Artifact of a known family but a version this reader does not speak.
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// One or more texts have no vector in the embedding store. Carries the
// digests so callers can feed them back to the export tool.
class EmbeddingNotFound : public Error {
 public:
  explicit EmbeddingNotFound(std::vector<std::string> keys);

  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  std::vector<std::string> keys_;
};

}  // namespace moodrank
