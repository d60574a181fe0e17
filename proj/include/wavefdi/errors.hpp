#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wavefdi {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-domain numeric input.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inconsistent dimensions, bad indices, violated preconditions.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class IntegrationDiverged : public Error {
public:
    IntegrationDiverged(std::size_t step, const std::string& what)
        : Error("integration diverged at step " + std::to_string(step) + ": " + what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class NotObservable : public Error {
public:
    using Error::Error;
};

class NotSteadyState : public Error {
public:
    using Error::Error;
};

class InsufficientHistory : public Error {
public:
    using Error::Error;
};

class DegenerateStatistics : public Error {
public:
    using Error::Error;
};

class UnidentifiableSubset : public Error {
public:
    using Error::Error;
};

/// Configuration problem. `key()` names the offending entry (e.g. `sensors[3]`),
/// `line()` is 1-based when known, 0 otherwise.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& msg, int line = 0)
        : Error(format(key, msg, line)), key_(std::move(key)), line_(line) {}
    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& key, const std::string& msg, int line) {
        std::string s;
        if (line > 0) s += "line " + std::to_string(line) + ": ";
        if (!key.empty()) s += key + ": ";
        return s + msg;
    }
    std::string key_;
    int line_;
};

}  // namespace wavefdi
