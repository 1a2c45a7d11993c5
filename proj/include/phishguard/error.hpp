#pragma once

#include <stdexcept>
#include <string>

namespace phishguard {

/// Base for every error raised by the library. The CLI maps the subclasses
/// onto its exit-code contract.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid caller-supplied arguments or configuration values.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Unreadable, malformed, or unusable input data.
class DataError : public Error {
public:
    using Error::Error;
};

/// Model fitting could not proceed (degenerate corpus, non-finite values).
class TrainingError : public Error {
public:
    using Error::Error;
};

/// A persisted model bundle failed validation.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace phishguard
