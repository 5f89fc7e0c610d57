#pragma once

#include <stdexcept>
#include <string>

namespace nopo {

/// Bad input: non-physical parameters, malformed config, empty grids.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A solver could not reach its tolerance. `residual` is the last measured
/// error estimate (quadrature error, period-to-period deviation, ...).
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace nopo
