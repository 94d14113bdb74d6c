#pragma once

#include <stdexcept>
#include <string>

namespace sideflow {

// Raised for problems in user-supplied data: malformed logs, schema
// violations, bad parameters. The CLI maps these to exit code 1;
// anything else is an internal failure (exit code 2).
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sideflow
