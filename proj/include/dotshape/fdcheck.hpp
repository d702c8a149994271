#pragma once

#include "dotshape/problems.hpp"

namespace dotshape {

/// Finite-difference oracles for the adjoint-based gradients. They re-solve
/// the full discrete problem on perturbed inputs and never touch the kernel
/// formulas they are checking.

/// Central FD of J_rho with respect to mu_in: two state solves at mu_in +- delta.
double fd_parameter_gradient(MeshPtr mesh, const Coefficients& c, const SourceSpec& s,
                             const Measurement& h, double rho, double delta);

/// Central FD of the misfit J under the deformation x -> x + t V, re-solving
/// the state on each deformed mesh (region tags transport the coefficients).
/// Halves t up to 8 times if a deformed mesh inverts.
double fd_shape_derivative(MeshPtr mesh, const Coefficients& c, const SourceSpec& s,
                           const Measurement& h, const DeformationField& V, double t);

/// Smooth random deformation field vanishing on the outer boundary: low-order
/// trigonometric modes with seeded coefficients times the cutoff
/// (R^2 - |x|^2)/R^2.
DeformationField random_smooth_field(const Mesh& mesh, unsigned seed);

} // namespace dotshape
