#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace opticsbench {

// Base for every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (e.g. rho > 1).
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid configuration (aliased pupil sampling, zero std, empty stack, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A kernel lost (nearly) all of its energy during cropping.
class DegenerateKernelError : public Error {
public:
    using Error::Error;
};

class MatchError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Malformed kernel file; carries the byte offset where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::uint64_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

}  // namespace opticsbench
