#pragma once

#include <stdexcept>
#include <string>

namespace qa2sat {

// Base class for everything thrown on purpose.  Catch sites that map
// failures to process exit codes key off the subtype.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller handed us something malformed: bad sizes, values out of range,
// inconsistent options.
struct ArgumentError : Error {
    using Error::Error;
};

// A hard resource limit would be exceeded (enumeration width, basis size).
struct CapacityError : Error {
    using Error::Error;
};

// An iterative numerical routine failed to reach its tolerance.
struct SolverError : Error {
    using Error::Error;
};

// A fit did not converge or failed its internal stability check.
struct FitError : Error {
    using Error::Error;
};

// The requested quantity is undefined for the given data (e.g. no root
// inside the search bracket).
struct DomainError : Error {
    using Error::Error;
};

// A pipeline stage was invoked before the stage it consumes.
struct DependencyError : Error {
    using Error::Error;
};

}  // namespace qa2sat
