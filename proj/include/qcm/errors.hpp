#pragma once

#include <stdexcept>
#include <string>

namespace qcm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV/JSON syntax, wrong field counts, non-numeric cells).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input whose values break a type invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Structural mismatch, e.g. coincidence blocks whose labels cannot be paired.
class SchemaError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A record lacks a field the requested analysis needs.
class IncompleteRecordError : public ValidationError {
public:
    IncompleteRecordError(const std::string& exemplar, const std::string& field)
        : ValidationError("record '" + exemplar + "' is missing field " + field),
          field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class InsufficientDataError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Unknown state/context/key in a lookup.
class LookupError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace qcm
