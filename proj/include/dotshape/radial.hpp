#pragma once

#include <vector>

namespace dotshape {

/// Axisymmetric two-region problem on the disk of radius R with the interface
/// circle at Ra. Independent 1D verification path for the 2D solver; shares
/// no assembly code with the fem module.
struct RadialProblem {
    double R = 3.0;
    double Ra = 1.5;
    double alpha = 1.0;
    double mu_out = 1.0;
    double mu_in = 1.2;
    double zeta = 0.3;
    bool point_source = false; ///< centered delta of the given strength
    double source = 1.0;       ///< constant f value, or the point strength

    void validate() const;
};

struct RadialSolution {
    std::vector<double> r;
    std::vector<double> u;

    double value_at(double radius) const;
    double boundary_value() const { return u.back(); }
};

/// Second-order conservative finite-volume solve on a grid with a node
/// placed exactly at the interface radius. n_grid >= 1000.
RadialSolution radial_solve(const RadialProblem& p, int n_grid);

/// Modified Bessel functions of the first kind by power series (validates the
/// single-region closed form).
double bessel_i0(double x);
double bessel_i1(double x);

} // namespace dotshape
