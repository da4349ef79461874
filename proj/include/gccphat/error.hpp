#pragma once

#include <stdexcept>
#include <string>

namespace gccphat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or inconsistent setup.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Operand sizes that do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Malformed factor file, manifest or report.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A numerical routine failed to meet its accuracy contract.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Audio input that does not match what the pipeline expects.
class InputError : public Error {
public:
    using Error::Error;
};

/// Input signal too short to produce a single frame.
class SignalError : public Error {
public:
    using Error::Error;
};

}  // namespace gccphat
