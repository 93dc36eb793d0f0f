#pragma once

#include <stdexcept>
#include <string>

namespace ppm {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters, unknown ids, alphabet mismatches.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (counts, files, non-finite values).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A history that no latent continuation of the environment can produce.
class MalformedHistoryError : public DataError {
 public:
  using DataError::DataError;
};

// A model or oracle violated one of its own invariants.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// Observation with (numerically) zero probability under a model's belief.
class ImpossibleObservationError : public Error {
 public:
  using Error::Error;
};

// A precondition about an input structure does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A requested object would exceed a configured size limit.
class SizeError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage is missing the artifact of an upstream stage.
class PrerequisiteError : public Error {
 public:
  using Error::Error;
};

// An upstream artifact was produced under a different configuration.
class StaleArtifactError : public PrerequisiteError {
 public:
  using PrerequisiteError::PrerequisiteError;
};

}  // namespace ppm
