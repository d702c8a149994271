#pragma once

#include <cstdint>

#include "dotshape/fem.hpp"

namespace dotshape {

struct NoiseSpec {
    double gamma = 0.0; ///< relative noise level (std = gamma * max|h|)
    std::uint64_t seed = 0;
};

/// Boundary trace of the order-2 state on a fine mesh of the exact geometry.
/// h_fine must be at most half the inversion mesh size (checked by callers
/// holding both; see RunConfig::validate).
Measurement generate_measurement(double radius, const ParametricCurve& exact_interface,
                                 const Coefficients& c, const SourceSpec& s,
                                 double h_fine);

/// Adds i.i.d. Normal(0, (gamma * max|h|)^2) per sample; bitwise identity for
/// gamma = 0 and reproducible for a fixed seed.
Measurement add_noise(const Measurement& h, const NoiseSpec& n);

} // namespace dotshape
