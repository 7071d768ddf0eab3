#pragma once

#include <stdexcept>
#include <string>

namespace obh {

// Exit codes used by the CLI. Each failure class maps to exactly one code.
enum class ExitCode : int {
    Ok = 0,
    Unexpected = 1,
    Config = 2,
    Input = 3,
    Run = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::Unexpected; }
};

// Invalid configuration: bad parameters, unknown keys, violated invariants.
class ConfigError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Config; }
};

// Unreadable or malformed input data.
class InputError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Input; }
};

// Operation called in a state that violates its precondition.
class StateError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Run; }
};

// Failure during execution (objective blew up, invariant broke mid-run).
class RunError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::Run; }
};

inline int exit_code_for(const std::exception& e) noexcept {
    if (auto* err = dynamic_cast<const Error*>(&e)) {
        return static_cast<int>(err->exit_code());
    }
    return static_cast<int>(ExitCode::Unexpected);
}

} // namespace obh
