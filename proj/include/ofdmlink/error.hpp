#pragma once

#include <stdexcept>
#include <string>

namespace ofdmlink {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Grid, vector or matrix sizes that do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Factorization or eigensolver failure, or a numerical invariant violated.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent file content.
class FormatError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace ofdmlink
