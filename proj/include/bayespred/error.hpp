#pragma once

#include <stdexcept>
#include <string>

namespace bayespred {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad user input: unknown names, malformed specs, invalid hyperparameters.
struct InvalidArgument : Error {
    using Error::Error;
};

/// Parameter outside the open domain, or too close to its boundary.
struct DomainError : Error {
    using Error::Error;
};

struct SingularFisherError : Error {
    using Error::Error;
};

/// The posterior normalizer is infinite (improper prior without enough data).
struct DivergentPosteriorError : Error {
    using Error::Error;
};

struct QuadratureError : Error {
    using Error::Error;
};

/// Monte Carlo noise swamps the quantity being estimated.
struct NoiseDominatedError : Error {
    using Error::Error;
};

/// Too many replicates had to be dropped for the estimate to mean anything.
struct ExclusionError : Error {
    using Error::Error;
};

}  // namespace bayespred
