#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace cfguide {

// Every library error carries a stable machine-readable code; the service
// layer forwards it verbatim as {code, message}.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t row, std::string column, const std::string& message)
        : Error("parse_error", message), row_(row), column_(std::move(column)) {}

    // 1-based data row (header excluded); 0 means the header itself.
    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config_error", message) {}
};

class EmptyDataset : public Error {
public:
    explicit EmptyDataset(const std::string& message) : Error("empty_dataset", message) {}
};

class KeyError : public Error {
public:
    explicit KeyError(const std::string& key)
        : Error("key_error", "unknown column '" + key + "'"), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class InvalidFilter : public Error {
public:
    explicit InvalidFilter(const std::string& message) : Error("invalid_filter", message) {}
};

class DegeneratePartition : public Error {
public:
    explicit DegeneratePartition(const std::string& message)
        : Error("degenerate_partition", message) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& message) : Error("domain_error", message) {}
};

class CycleError : public Error {
public:
    explicit CycleError(const std::string& message) : Error("cycle_error", message) {}
};

class RefError : public Error {
public:
    explicit RefError(const std::string& message) : Error("ref_error", message) {}
};

class InvalidAnswer : public Error {
public:
    explicit InvalidAnswer(const std::string& message) : Error("invalid_answer", message) {}
};

class LogError : public Error {
public:
    LogError(std::size_t line, const std::string& message)
        : Error("log_error", line == 0 ? message : "line " + std::to_string(line) + ": " + message),
          line_(line) {}

    // 1-based position in the event stream, 0 when not attributable.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class StateError : public Error {
public:
    explicit StateError(const std::string& message) : Error("state_error", message) {}
};

class NotFound : public Error {
public:
    explicit NotFound(const std::string& message) : Error("not_found", message) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& message) : Error("validation_error", message) {}
};

}  // namespace cfguide
