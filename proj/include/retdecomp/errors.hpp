#pragma once

#include <stdexcept>
#include <string>

namespace retdecomp {

/// Invalid configuration values or shapes supplied by the caller.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was invoked in a state where it is not allowed.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Non-finite values encountered during a computation.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace retdecomp
