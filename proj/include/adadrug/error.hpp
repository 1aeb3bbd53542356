#pragma once

#include <stdexcept>
#include <string>

namespace adadrug {

/// Base for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes disagree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A precondition of an operation does not hold (non-scalar loss, empty input, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Data is well-formed but unusable (single-class domain, empty gene intersection, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// Config document violates the schema; `pointer()` is a JSON pointer to the offending value.
class ValidationError : public Error {
public:
    ValidationError(const std::string& pointer, const std::string& what)
        : Error(pointer + ": " + what), pointer_(pointer) {}
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

/// Checkpoint file is truncated, corrupted or from an unsupported format version.
class CheckpointError : public Error {
public:
    using Error::Error;
};

}  // namespace adadrug
