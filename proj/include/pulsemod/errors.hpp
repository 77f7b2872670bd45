#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pulsemod {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs that violate a documented range or precondition. The CLI maps these to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical failures on otherwise valid input. The CLI maps these to exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

class OutOfRange : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NegativeConcentration : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class OutOfRangeMeasurement : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class HorizonTooShort : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnstableSlopes : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InfeasibleBounds : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DuplicatePin : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
public:
    ParseError(std::size_t row, const std::string& what)
        : ValidationError("row " + std::to_string(row) + ": " + what), row_(row) {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class NodesTooClose : public NumericError {
public:
    using NumericError::NumericError;
};

class PoleProximity : public NumericError {
public:
    using NumericError::NumericError;
};

class DegenerateEigenvalue : public NumericError {
public:
    using NumericError::NumericError;
};

class NoBifurcationInRange : public NumericError {
public:
    using NumericError::NumericError;
};

/// A per-patient failure during cohort evaluation, annotated with the patient's PIN.
class PatientSimulationError : public Error {
public:
    PatientSimulationError(int pin, const std::string& what)
        : Error("patient " + std::to_string(pin) + ": " + what), pin_(pin) {}

    [[nodiscard]] int pin() const noexcept { return pin_; }

private:
    int pin_;
};

}  // namespace pulsemod
