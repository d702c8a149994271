#pragma once

#include <stdexcept>
#include <string>

namespace dotshape {

/// Invalid geometric input (curve outside the domain, degenerate polyline, ...).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Broken mesh connectivity (open interface loop, missing one-sided triangle, ...).
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear solver failed to meet its residual contract.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Config or argument validation failure.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Line-search could not find a mesh-preserving step.
class StepFailureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dotshape
