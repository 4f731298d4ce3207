#pragma once

#include <stdexcept>
#include <string>

namespace infera {

/// Violated call-site precondition (bad ranges, length mismatches, ...).
class ContractError : public std::invalid_argument {
public:
    explicit ContractError(const std::string& message)
        : std::invalid_argument(message) {}
};

/// Reference to a hypothesis, symbol, action, regime, or intervention
/// that was never declared.
class UnknownIdError : public std::invalid_argument {
public:
    explicit UnknownIdError(const std::string& message)
        : std::invalid_argument(message) {}
};

/// Scenario content failed validation; the message carries the offending
/// key path (e.g. "environment.regimes.status-quo").
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& message)
        : std::runtime_error(message) {}
};

/// Local file read/write failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& message)
        : std::runtime_error(message) {}
};

} // namespace infera
