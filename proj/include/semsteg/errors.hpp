#pragma once

#include <stdexcept>
#include <string>

namespace semsteg {

// Error taxonomy. The CLI maps these onto exit codes:
// usage errors -> 1, data/format/config errors -> 2, diverged training -> 3.

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error("shape error: " + msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error("config error: " + msg) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error("format error: " + msg) {}
};

struct DegenerateSignalError : std::runtime_error {
    explicit DegenerateSignalError(const std::string& msg)
        : std::runtime_error("degenerate signal: " + msg) {}
};

struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error("contract violation: " + msg) {}
};

struct DivergedError : std::runtime_error {
    explicit DivergedError(const std::string& msg) : std::runtime_error("diverged training: " + msg) {}
};

struct KnowledgeError : std::runtime_error {
    explicit KnowledgeError(const std::string& msg) : std::runtime_error("knowledge error: " + msg) {}
};

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error("usage error: " + msg) {}
};

}  // namespace semsteg
