#pragma once

#include <stdexcept>
#include <string>

namespace rdrp {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidConfigError : public Error {
  using Error::Error;
};

class InvalidArgumentError : public Error {
  using Error::Error;
};

/// A required CSV column is missing.
class SchemaError : public Error {
  using Error::Error;
};

/// A cell could not be parsed as a number.
class ParseError : public Error {
  using Error::Error;
};

/// A parsed value violates a domain invariant (e.g. treatment not in {0,1}).
class ValidationError : public Error {
  using Error::Error;
};

/// Dataset or batch lacks one of the treatment arms.
class DegenerateDataError : public Error {
  using Error::Error;
};

/// Total incremental cost is zero, the cost curve cannot be normalized.
class DegenerateNormalizationError : public Error {
  using Error::Error;
};

class ShapeError : public Error {
  using Error::Error;
};

/// Weight file has a bad magic or unsupported version.
class FormatError : public Error {
  using Error::Error;
};

/// Weight file is truncated or inconsistent with its header.
class CorruptionError : public Error {
  using Error::Error;
};

/// Positive-treatment-effect assumption does not hold on the data.
class AssumptionViolationError : public Error {
  using Error::Error;
};

/// Diff-in-means ratio falls outside the admissible ROI range.
class RoiScopeError : public Error {
  using Error::Error;
};

class SizeLimitError : public Error {
  using Error::Error;
};

/// Conformal quantile is infinite, calibrated point estimates are undefined.
class CalibrationDegenerateError : public Error {
  using Error::Error;
};

class IoError : public Error {
  using Error::Error;
};

}  // namespace rdrp
