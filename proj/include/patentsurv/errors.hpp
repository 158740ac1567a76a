#pragma once

#include <stdexcept>
#include <string>

namespace patentsurv {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// CSV header or cell cannot be interpreted against the dataset schema.
struct SchemaError : Error {
    using Error::Error;
};

// An argument is outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// Model cannot be estimated: constant column, singular information matrix.
struct IdentifiabilityError : Error {
    using Error::Error;
};

// An estimator's preconditions are not met (no events, one group, ...).
struct EstimationError : Error {
    using Error::Error;
};

// Bad user-facing configuration: unknown covariate label, invalid
// simulation config. The CLI maps this to a usage error (exit 2).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace patentsurv
