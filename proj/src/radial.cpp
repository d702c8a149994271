#include "dotshape/radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dotshape/errors.hpp"

namespace dotshape {

void RadialProblem::validate() const {
    if (!(0.0 < Ra && Ra < R))
        throw ValidationError("radial problem needs 0 < Ra < R");
    if (!(alpha > 0.0 && mu_out > 0.0 && mu_in > 0.0 && zeta > 0.0))
        throw ValidationError("radial problem coefficients must be positive");
}

double RadialSolution::value_at(double radius) const {
    if (r.empty()) throw ValidationError("empty radial solution");
    if (radius <= r.front()) return u.front();
    if (radius >= r.back()) return u.back();
    const auto it = std::upper_bound(r.begin(), r.end(), radius);
    const std::size_t i = it - r.begin();
    const double w = (radius - r[i - 1]) / (r[i] - r[i - 1]);
    return u[i - 1] + (u[i] - u[i - 1]) * w;
}

RadialSolution radial_solve(const RadialProblem& p, int n_grid) {
    p.validate();
    if (n_grid < 1000) throw ValidationError("radial_solve: n_grid >= 1000 required");

    // Two uniform blocks with a node exactly at the interface.
    const int n1 = std::max(2, static_cast<int>(std::round(n_grid * p.Ra / p.R)));
    const int n2 = std::max(2, n_grid - n1);
    const int n = n1 + n2; // nodes 0..n
    const double h1 = p.Ra / n1;
    const double h2 = (p.R - p.Ra) / n2;

    RadialSolution sol;
    sol.r.resize(n + 1);
    for (int i = 0; i <= n1; ++i) sol.r[i] = i * h1;
    for (int i = 1; i <= n2; ++i) sol.r[n1 + i] = p.Ra + i * h2;

    auto mu_at = [&](double r) { return r < p.Ra ? p.mu_in : p.mu_out; };
    const double f_const = p.point_source ? 0.0 : p.source;

    // Control volume [lo, hi] moment integrals: int r dr = (hi^2 - lo^2)/2,
    // split at the interface so the jumping mu is integrated exactly.
    auto mu_moment = [&](double lo, double hi) {
        if (hi <= p.Ra || lo >= p.Ra)
            return mu_at(0.5 * (lo + hi)) * 0.5 * (hi * hi - lo * lo);
        return p.mu_in * 0.5 * (p.Ra * p.Ra - lo * lo) +
               p.mu_out * 0.5 * (hi * hi - p.Ra * p.Ra);
    };

    std::vector<double> lower(n + 1, 0.0), diag(n + 1, 0.0), upper(n + 1, 0.0),
        rhs(n + 1, 0.0);

    for (int i = 0; i <= n; ++i) {
        const double ri = sol.r[i];
        const double r_lo = i == 0 ? 0.0 : 0.5 * (sol.r[i - 1] + ri);
        const double r_hi = i == n ? p.R : 0.5 * (ri + sol.r[i + 1]);
        const double vol = 0.5 * (r_hi * r_hi - r_lo * r_lo);

        diag[i] += mu_moment(r_lo, r_hi);
        rhs[i] += f_const * vol;

        if (i > 0) {
            const double w = r_lo * p.alpha / (ri - sol.r[i - 1]);
            diag[i] += w;
            lower[i] -= w;
        }
        if (i < n) {
            const double w = r_hi * p.alpha / (sol.r[i + 1] - ri);
            diag[i] += w;
            upper[i] -= w;
        }
    }
    // Robin closure at r = R: alpha u'(R) = -u(R)/zeta.
    diag[n] += p.R / p.zeta;
    // Centered point source: lim 2 pi r alpha u'(r) = -strength.
    if (p.point_source) rhs[0] += p.source / (2.0 * std::numbers::pi);

    // Thomas algorithm.
    for (int i = 1; i <= n; ++i) {
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    sol.u.resize(n + 1);
    if (std::abs(diag[n]) < 1e-300)
        throw SolverError("radial oracle: singular tridiagonal system", 1.0);
    sol.u[n] = rhs[n] / diag[n];
    for (int i = n - 1; i >= 0; --i) sol.u[i] = (rhs[i] - upper[i] * sol.u[i + 1]) / diag[i];
    return sol;
}

double bessel_i0(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

double bessel_i1(double x) {
    const double q = 0.25 * x * x;
    double term = 0.5 * x, sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * (k + 1));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

} // namespace dotshape
