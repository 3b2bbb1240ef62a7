#pragma once

#include <stdexcept>
#include <string>

namespace friction {

/// Base class for everything the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied an argument outside the operation's domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Relative entropy is infinite: the first state has weight outside the
/// support of the second.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// A numerical identity that must hold for a unitary protocol did not.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// Integrator error estimate exceeded the acceptance gate.
class ConvergenceError : public IntegrityError {
public:
    using IntegrityError::IntegrityError;
};

}  // namespace friction
