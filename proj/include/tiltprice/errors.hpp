#pragma once

#include <stdexcept>
#include <string>

namespace tiltprice {

//! Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

//! Malformed or incomplete run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

//! Inputs outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

//! Query outside the support of tabulated data.
class OutOfRangeError : public DomainError {
public:
    using DomainError::DomainError;
};

//! Utility data that is not increasing or not concave.
class InvalidUtilityError : public DomainError {
public:
    using DomainError::DomainError;
};

//! A root-finding or estimation step that cannot produce a value.
class NumericalError : public Error {
public:
    using Error::Error;
};

//! Target outside the attainable range of a monotone map.
class NoSolutionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

//! Constant payoff where a non-constant one is required.
class DegenerateClaimError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace tiltprice
