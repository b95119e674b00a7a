#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fairtest {

/// Point outside the covariate box, or a parameter outside its valid range.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A model produced a non-finite value. Carries the probe where it happened.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& what, std::vector<double> probe = {})
        : std::runtime_error(what), probe_(std::move(probe)) {}

    const std::vector<double>& probe() const noexcept { return probe_; }

private:
    std::vector<double> probe_;
};

class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed data file or config. Maps to CLI exit code 2.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dual maximizer still on the B_dual boundary after all doublings.
class UnboundedDualError : public std::runtime_error {
public:
    UnboundedDualError(const std::string& what, double last_bound)
        : std::runtime_error(what), last_bound_(last_bound) {}

    double last_bound() const noexcept { return last_bound_; }

private:
    double last_bound_;
};

/// Moment matrix too ill-conditioned to invert even after ridging.
class DegenerateDirection : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fairtest
