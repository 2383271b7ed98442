#pragma once

#include <stdexcept>
#include <string>

namespace wva {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid argument or parameter outside its admissible domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// Non-finite integrand, quadrature that failed its residual check, etc.
class NumericError : public Error {
public:
    using Error::Error;
};

// Scalar optimizer ran out of iterations.
class ConvergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

// Post-selection probability at or below the configured floor.
class DegeneratePostselection : public Error {
public:
    DegeneratePostselection(const std::string& what, double probability)
        : Error(what), probability_(probability) {}
    double probability() const noexcept { return probability_; }

private:
    double probability_;
};

// No interior optimum exists (e.g. optimal_delta at zero splitting).
class NoOptimumError : public Error {
public:
    using Error::Error;
};

// Requested event rate exceeds the 1/T1 reload ceiling.
class PumpCeilingError : public DomainError {
public:
    using DomainError::DomainError;
};

// A Monte Carlo trial retained no events.
class EmptyTrialError : public NumericError {
public:
    using NumericError::NumericError;
};

// Invalid or inconsistent run configuration (CLI flags, config file).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Output directory or file could not be written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace wva
