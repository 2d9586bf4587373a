#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace amfem {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: bad arguments, malformed files, out-of-range parameters.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Mesh topology problems: nonconforming input, non-terminating closure,
/// unrelated mesh pairs.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Linear solver failures.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Raised when the saddle-point matrix is numerically singular. Carries a
/// unit-norm near-null vector when the system was small enough to compute one.
class SingularSystemError : public SolverError {
public:
    SingularSystemError(const std::string& what, std::vector<double> near_null)
        : SolverError(what), near_null_(std::move(near_null)) {}

    const std::vector<double>& near_null_vector() const noexcept { return near_null_; }

private:
    std::vector<double> near_null_;
};

/// A verification check found an inequality violated.
class CheckFailure : public Error {
public:
    using Error::Error;
};

}  // namespace amfem
