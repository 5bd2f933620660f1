#pragma once

#include <stdexcept>
#include <string>

namespace covcast {

/// Malformed or inconsistent input data (CSV files, price panels).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A run that could not complete: diverged training, infeasible optimization,
/// an indefinite covariance that survived jitter.
class RunError : public std::runtime_error {
public:
    explicit RunError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace covcast
