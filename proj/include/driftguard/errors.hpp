// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace driftguard {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument, violated precondition, or violated domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input document could not be parsed at all (bad JSON, bad line).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Document parsed but has the wrong shape: missing field, wrong type,
/// unknown format version.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Embedding provider transport failure (after retries).
class HttpError : public Error {
 public:
  using Error::Error;
};

/// Threshold calibration cannot proceed: degenerate scores or an
/// infeasible range. The message carries diagnostics.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace driftguard
