#pragma once

#include <stdexcept>
#include <string>

namespace tfn {

/// I/O failure (unreadable or unwritable file).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input violates the expected format (e.g. mostly-malformed JSONL).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Caller passed an argument outside the operation's domain.
struct ParamError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values encountered during numeric computation.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tfn
