#pragma once

#include <stdexcept>
#include <string>

namespace rsp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

/// Raised when an operator that must be inverted has a singular value below
/// the singularity threshold.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// A protocol is malformed (missing probabilities, inconsistent outcome
/// counts, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// An operation was asked to work on input outside its domain, e.g. a
/// non-exact protocol handed to the obliviousness classifier.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A block construction cannot be assembled (size mismatch, violated
/// probability constraint, unsupported sub-protocol).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// A protocol or construction file does not follow the schema. `path` names
/// the offending field, e.g. `outcomes[2].unitary`.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace rsp
