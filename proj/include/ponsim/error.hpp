#pragma once

#include <stdexcept>
#include <string>

namespace ponsim {

// Base class for everything thrown by this library, so callers can catch
// domain failures separately from genuine logic errors.
class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed scenario document (syntax, unknown keys, wrong value types).
class ParseError : public SimError {
public:
    using SimError::SimError;
};

// File could not be read or written.
class IoError : public SimError {
public:
    using SimError::SimError;
};

// Structurally well-formed input that breaks a model invariant.
class ValidationError : public SimError {
public:
    using SimError::SimError;
};

class InvalidArgument : public SimError {
public:
    using SimError::SimError;
};

// Address lookup for an address no plan entry covers.
class UnknownAddress : public SimError {
public:
    using SimError::SimError;
};

// No policy-compliant route exists between the requested endpoints.
class UnreachableError : public SimError {
public:
    using SimError::SimError;
};

// Address plan cannot fit the requested hosts into the subnet scheme.
class CapacityError : public SimError {
public:
    using SimError::SimError;
};

// No free wavelength left on an AWGR input port.
class ExhaustedError : public SimError {
public:
    using SimError::SimError;
};

// Calibration target smaller than the irreducible delay of the hop.
// residual_us reports how far out of reach the target is.
class InfeasibleError : public SimError {
public:
    InfeasibleError(const std::string& what, double residual_us)
        : SimError(what), residual_us(residual_us) {}

    double residual_us = 0.0;
};

} // namespace ponsim
