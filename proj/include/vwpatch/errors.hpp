#pragma once

#include <stdexcept>
#include <string>

namespace vwp {

// Error taxonomy mirrors the CLI exit codes: validation 2, convergence 3,
// numerical 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

} // namespace vwp
