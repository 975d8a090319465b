#pragma once

#include <stdexcept>
#include <string>

namespace pfb {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid physical parameters, grids, or configuration values.
class DomainError : public Error {
public:
    using Error::Error;
};

// Evaluation requested too close to a pole of a transfer coefficient.
// Real-axis evaluation only gets here for degenerate parameter sets.
class PoleProximityError : public Error {
public:
    using Error::Error;
};

// Quadrature failed to reach the requested tolerance within its budget.
// Carries the best available estimate so callers can decide what to do.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double best, double err)
        : Error(what), best_estimate(best), error_estimate(err) {}

    double best_estimate;
    double error_estimate;
};

// A spectral function with zero norm cannot be normalized.
class DegenerateSpectrumError : public Error {
public:
    using Error::Error;
};

// The residue oracle abstains (multiplicity guard or ill-conditioned poles).
class OracleUnavailableError : public Error {
public:
    using Error::Error;
};

// Two routes to the same quantity disagree beyond tolerance; signals a
// quadrature failure rather than a caller mistake.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// A bracketed search (peak location, width measurement) found no solution.
class SearchError : public Error {
public:
    using Error::Error;
};

} // namespace pfb
