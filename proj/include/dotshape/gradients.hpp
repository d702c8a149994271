#pragma once

#include "dotshape/fem.hpp"

namespace dotshape {

/// Per-interface-node scalar kernel G, aligned with interface_normals(mesh).
struct InterfaceKernel {
    std::vector<int> nodes;
    std::vector<double> value;
};

/// Which f-term enters the interface kernel. The two published forms of the
/// Eulerian derivative disagree when f is continuous across the interface;
/// JumpF uses [[f]] p (identically zero for geometry-independent sources),
/// PlainF uses f p plus the [[alpha du/dn dp/dn]] term. JumpF is the shipped
/// default; a regression test keeps the finite-difference comparison that
/// settles it.
enum class FTermVariant { JumpF, PlainF };

/// d/d(mu_in) of J_rho via the adjoint: -int_omega u p + rho * mu_in * |omega|.
double parameter_gradient(const Field& u, const Field& p, const Coefficients& c,
                          double rho, const Mesh& mesh);

InterfaceKernel shape_gradient_kernel(const Field& u, const Field& p,
                                      const Coefficients& c, const SourceSpec& s,
                                      const Mesh& mesh,
                                      FTermVariant variant = FTermVariant::JumpF);

/// dJ(omega)[V] = int_(d omega) G V_n by the lumped nodal rule (the same rule
/// the Sobolev extension uses for its right-hand side).
double directional_shape_derivative(const InterfaceKernel& kernel,
                                    const DeformationField& V, const Mesh& mesh);

/// Discrete curvature: signed turning angle over lumped edge length, so that
/// int kappa V_n approximates the perimeter's shape derivative.
InterfaceKernel perimeter_kernel(const Mesh& mesh);

/// Componentwise H1 Riesz representative of -(G + rho1*kappa) n: solves
/// (grad V, grad phi) + (V, phi) = -<G_total n, phi> with V = 0 on the outer
/// boundary. The returned field caches ||V||^2_H1.
DeformationField sobolev_extension(const InterfaceKernel& shape_kernel, double rho1,
                                   MeshPtr mesh);

/// shape + rho1 * perimeter kernel, aligned slots.
InterfaceKernel combined_kernel(const InterfaceKernel& shape_kernel, double rho1,
                                const Mesh& mesh);

/// Nodal values of the [[alpha du/dn dp/dn]] term alone (used by the
/// mesh-refinement check of the continuity conditions).
InterfaceKernel normal_flux_jump_term(const Field& u, const Field& p,
                                      const Coefficients& c, const Mesh& mesh);

} // namespace dotshape
