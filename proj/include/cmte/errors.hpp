#pragma once

#include <stdexcept>
#include <string>

namespace cmte {

// Malformed or invalid input documents (network files, scenario configs).
// Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Arguments outside a function's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Vector/matrix shapes that do not line up.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Filesystem failures. Maps to CLI exit code 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cmte
