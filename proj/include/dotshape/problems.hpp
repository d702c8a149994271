#pragma once

#include "dotshape/fem.hpp"

namespace dotshape {

/// Cost decomposition: total = misfit + tikhonov + perimeter_term exactly.
struct CostReport {
    double misfit = 0.0;         ///< 1/2 ||u - h||^2 over the (masked) boundary
    double tikhonov = 0.0;       ///< rho/2 ||mu||^2 over the domain
    double perimeter_term = 0.0; ///< rho1/2 * interface perimeter
    double total = 0.0;
};

/// Direction of a coefficient perturbation: a region indicator times a scalar.
struct MuDirection {
    Region region = Region::Inside;
    double scale = 1.0;
};

Field solve_state(MeshPtr mesh, const Coefficients& c, const SourceSpec& s);

/// Reuses an assembled system (state and adjoint share the matrix).
Field solve_state(const SparseSystem& sys, const SourceSpec& s);

/// Measurement values interpolated onto the boundary DOFs of a mesh:
/// arc lengths are matched as fractions of the respective total perimeters.
std::vector<double> boundary_values_from(const Measurement& h, const Mesh& mesh,
                                         int order);

Field solve_adjoint(const SparseSystem& sys, const Field& u, const Measurement& h);
Field solve_adjoint(MeshPtr mesh, const Coefficients& c, const Field& u,
                    const Measurement& h);

Field solve_sensitivity(const SparseSystem& sys, const Field& u, const MuDirection& nu);

Field solve_second_sensitivity(const SparseSystem& sys, const Field& udot1,
                               const MuDirection& nu1, const Field& udot2,
                               const MuDirection& nu2);

/// Boundary misfit of a state against a measurement (edge-wise quadrature of
/// the squared nodal difference).
double boundary_misfit(const Field& u, const Measurement& h);

/// ||mu||^2_{L2} from the exact region areas of the mesh.
double mu_l2_norm_sq(const Coefficients& c, const Mesh& mesh);

CostReport evaluate_cost(const Field& u, const Measurement& h, const Coefficients& c,
                         double rho, double rho1, const Polyline& interface);

} // namespace dotshape
