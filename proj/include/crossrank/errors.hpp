#pragma once

#include <stdexcept>
#include <string>

namespace crossrank {

/// Base class for all crossrank errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operand shapes are inconsistent (empty input, mismatched inner dimensions, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A tuning parameter violates its documented constraint (k out of range, k1 <= k2, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Input values lie outside the operation's domain (negative entries, non-finite values).
class DomainError : public Error {
public:
    using Error::Error;
};

/// No query could be evaluated.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Base class for file-format and filesystem failures.
class IoError : public Error {
public:
    using Error::Error;
};

/// File does not start with the expected magic bytes.
class BadMagicError : public IoError {
public:
    using IoError::IoError;
};

/// File carries an unsupported format version.
class BadVersionError : public IoError {
public:
    using IoError::IoError;
};

/// File ends before the declared payload is complete.
class TruncatedFileError : public IoError {
public:
    using IoError::IoError;
};

/// Header fields disagree with each other or with the payload size.
class HeaderMismatchError : public IoError {
public:
    using IoError::IoError;
};

} // namespace crossrank
