#pragma once

#include <stdexcept>
#include <string>

namespace leakscan {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data or configuration violates a documented invariant (exit code 1).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Filesystem or usage failure: missing file, unwritable path (exit code 2).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace leakscan
