#pragma once

#include <stdexcept>
#include <string>

namespace mprad {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed files, dimension mismatches, invalid parameters.
// The CLI maps these to exit code 2.
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

// Data-dependent computation failure: degenerate ROI, solver non-convergence.
// The CLI maps these to exit code 3.
class ComputeError : public Error {
public:
    explicit ComputeError(const std::string& msg) : Error(msg) {}
};

} // namespace mprad
