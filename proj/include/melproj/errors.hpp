#ifndef MELPROJ_ERRORS_HPP
#define MELPROJ_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace melproj {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV rows, config files). Messages carry line numbers.
struct ParseError : Error {
    using Error::Error;
};

/// Structurally valid input that violates a domain invariant.
struct ValidationError : Error {
    using Error::Error;
};

/// Unreadable or unsupported audio payload.
struct DecodeError : Error {
    using Error::Error;
};

/// Audio too short to carry any analysis frame.
struct EmptyAudioError : Error {
    using Error::Error;
};

/// Matrix shape does not match the operation contract.
struct DimensionError : Error {
    using Error::Error;
};

/// Optimizer produced a non-finite loss.
struct TrainingError : Error {
    using Error::Error;
};

/// Iterative solver hit its work cap before reaching tolerance.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, std::size_t violations)
        : Error(msg), violation_count(violations) {}
    std::size_t violation_count = 0;
};

/// Experiment configuration rejected; `field` is the offending key path.
struct ConfigError : Error {
    ConfigError(const std::string& field_path, const std::string& msg)
        : Error(field_path + ": " + msg), field(field_path) {}
    std::string field;
};

/// File container problems (bad magic, truncation, non-finite payload).
struct IoError : Error {
    using Error::Error;
};

}  // namespace melproj

#endif
