#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mdrnn {

/// Inconsistent sizes or options (layer widths, class counts, config keys).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (coordinates out of range, mismatched tapes).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Bad dataset content: labels out of range, unknown palette colours, empty sets.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed binary input. Carries the byte offset at which parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Checkpoint container problems: wrong magic, unsupported version, truncation.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure during optimisation (non-finite gradients or weights).
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mdrnn
