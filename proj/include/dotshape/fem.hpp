#pragma once

#include <Eigen/SparseCore>
#include <memory>
#include <optional>
#include <vector>

#include "dotshape/mesh.hpp"

namespace dotshape {

/// Piecewise-constant PDE data: diffusion alpha, absorption mu (per region)
/// and the Robin constant zeta. mu is the reconstruction target.
struct Coefficients {
    double alpha_out = 1.0;
    double alpha_in = 1.0;
    double mu_out = 1.0;
    double mu_in = 1.2;
    double zeta = 0.3;
    double mu_min = 1e-3;
    double mu_max = 100.0;

    double alpha(Region r) const {
        return r == Region::Inside ? alpha_in : alpha_out;
    }
    double mu(Region r) const { return r == Region::Inside ? mu_in : mu_out; }
    void validate() const;
};

struct SourceSpec {
    enum class Kind { Constant, Point, GaussianSum };

    Kind kind = Kind::Constant;
    double value = 1.0; ///< Constant: f == value

    Vec2 point{0.0, 0.0}; ///< Point: location of the delta source
    double strength = 1.0;

    // GaussianSum: amplitude * sum_i exp(1 - |x - x_i|^2 / eps^2),
    // x_i = ring_radius * (cos theta_i, sin theta_i).
    double eps = 0.5;
    double ring_radius = 2.99;
    std::vector<double> angles;
    double amplitude = 1.0;

    /// Pointwise value; not defined for point sources.
    double evaluate(const Vec2& x) const;
    void validate(double domain_radius) const;

    static SourceSpec constant(double c);
    static SourceSpec point_source(Vec2 x0, double strength);
    static SourceSpec gaussian_ring(std::vector<double> angles, double eps,
                                    double ring_radius, double amplitude = 1.0);
};

/// Nodal scalar function attached to a mesh (order 1: vertex DOFs; order 2:
/// vertex + edge-midpoint DOFs).
struct Field {
    MeshPtr mesh;
    int order = 1;
    std::vector<double> values;
};

/// Boundary trace samples (arc_length, value) along the outer boundary,
/// counterclockwise from the node nearest polar angle zero.
struct Measurement {
    std::vector<double> arc;
    std::vector<double> value;
    double total_arc = 0.0; ///< perimeter of the boundary polygon
    bool closed = true;     ///< true when the samples cover the full boundary

    /// Linear interpolation in arc length (wraps around when closed).
    double value_at(double s) const;
    double max_abs() const;
};

/// Angular sub-boundary mask [theta0, theta1] (counterclockwise, radians).
struct BoundaryMask {
    double theta0 = 0.0;
    double theta1 = 0.0;
};

/// Assembled symmetric system for a(mu; u, v); keeps a lazily-computed
/// factorization so state/adjoint pairs reuse one decomposition.
struct SparseSystem {
    Eigen::SparseMatrix<double> A;
    int order = 1;
    Coefficients coeffs;
    MeshPtr mesh;

    struct Factor;
    mutable std::shared_ptr<Factor> factor;
};

int dof_count(const Mesh& mesh, int order);

/// Stiffness + mass + Robin boundary term of the bilinear form.
SparseSystem assemble(MeshPtr mesh, const Coefficients& c, int order);

/// Unit-coefficient stiffness + mass matrix (the discrete H1 inner product);
/// no Robin term.
Eigen::SparseMatrix<double> assemble_h1(const Mesh& mesh, int order);

std::vector<double> assemble_load(const Mesh& mesh, const SourceSpec& s, int order);

/// SPD solve with relative residual <= 1e-10 (direct, CG fallback).
Field solve(const SparseSystem& sys, const std::vector<double>& rhs);

Measurement boundary_trace(const Field& f,
                           std::optional<BoundaryMask> mask = std::nullopt);

/// Discrete H1 norm squared: x^T (K + M) x with unit coefficients.
double h1_norm_sq(const Field& f);

/// Evaluate a field at an arbitrary point (throws if outside the mesh).
double field_value_at(const Field& f, const Vec2& x);

/// Arc-length parametrization of the boundary DOFs of a mesh.
struct BoundaryParam {
    std::vector<int> dofs;    ///< DOF ids in loop order
    std::vector<double> s;    ///< arc length of each DOF
    std::vector<double> angle;
    double total = 0.0;
};
BoundaryParam build_boundary_param(const Mesh& mesh, int order);

} // namespace dotshape
