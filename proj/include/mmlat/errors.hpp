#pragma once

#include <stdexcept>
#include <string>

namespace mmlat {

// Invalid shapes, invalid configuration values, malformed config files.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Domain violations and non-finite values produced at runtime.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Corrupt or truncated on-disk artifacts.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// A verified bound or determinism contract failed.
class VerificationError : public std::runtime_error {
public:
    explicit VerificationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mmlat
