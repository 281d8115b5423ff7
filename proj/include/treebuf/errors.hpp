#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace treebuf {

// Base class for all errors raised by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// A constructor or operation argument is out of its allowed domain
// (e.g. history depth of zero, unknown algorithm name).
class invalid_parameter : public error {
public:
    explicit invalid_parameter(const std::string& msg) : error(msg) {}
};

// An operation was applied in a state where it is not allowed
// (inactive node, stale handle, double initialize, ...).
class invalid_sequence : public error {
public:
    explicit invalid_sequence(const std::string& msg) : error(msg) {}
};

// Malformed textual input (op logs, automaton files, regexes, traces).
// `position` is a line number for line-oriented formats and a character
// offset for regexes.
class parse_error : public error {
public:
    parse_error(const std::string& msg, std::size_t position)
        : error(msg + " (at " + std::to_string(position) + ")"), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// An op log failed to replay; `index` is the zero-based offset of the
// offending operation.
class replay_error : public error {
public:
    replay_error(const std::string& msg, std::size_t index)
        : error("op " + std::to_string(index) + ": " + msg), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace treebuf
