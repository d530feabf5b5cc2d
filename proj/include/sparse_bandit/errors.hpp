#pragma once

#include <stdexcept>
#include <string>

namespace sparse_bandit {

/// Caller supplied a value outside an operation's domain.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical state that cannot arise from valid updates (lost positive definiteness etc).
class InternalCorruption : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The radius ladder does not reach the requested confidence radius.
class LadderTooShort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A policy or regressor was driven out of its choose/observe order.
class ProtocolViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Configuration parse or validation failure. The message starts with the key path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure inside an episode, tagged with the 1-based round where it happened.
class EpisodeError : public std::runtime_error {
public:
    EpisodeError(std::size_t round, const std::string& label, const std::string& what)
        : std::runtime_error(label + ": round " + std::to_string(round) + ": " + what), round_(round) {}

    std::size_t round() const noexcept { return round_; }

private:
    std::size_t round_;
};

/// Malformed data file; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace sparse_bandit
