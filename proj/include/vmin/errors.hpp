#pragma once

#include <stdexcept>
#include <string>

namespace vmin {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Incompatible matrix/vector shapes.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid model or training configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Invalid argument value (fractions out of range, empty data, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Malformed input that cannot be parsed (CSV cell, truncated JSON, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Structurally valid input that violates the expected schema
/// (missing columns, misaligned rows, mismatched normalization stats).
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure (unreadable source, unwritable sink).
class IoError : public Error {
public:
    using Error::Error;
};

/// Checkpoint with an unsupported format_version.
class VersionError : public Error {
public:
    using Error::Error;
};

/// Checkpoint whose stored shapes disagree with its own config.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Numerical failure during training (divergence, non-finite gradients).
class TrainingError : public Error {
public:
    using Error::Error;
};

/// Base checkpoint incompatible with the target architecture.
class TransplantError : public Error {
public:
    using Error::Error;
};

/// Linear system singular beyond the ridge-jitter rescue.
class RankError : public Error {
public:
    using Error::Error;
};

}  // namespace vmin
