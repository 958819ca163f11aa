#pragma once

#include <stdexcept>
#include <string>

namespace sceneret {

/// Raised by library operations on invalid input data or violated
/// preconditions. The CLI maps it to the data-error exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for bad command-line usage (unknown names, missing required paths).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sceneret
