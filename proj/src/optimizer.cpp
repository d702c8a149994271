#include "dotshape/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dotshape/errors.hpp"

namespace dotshape {
namespace {

// Resample the interface polyline at ~spacing and rebuild a fresh mesh around
// it. Returns nullptr when the rebuild is not possible (kinked polygon or
// clearance violation); the caller keeps marching on the old mesh.
MeshPtr try_remesh(const Mesh& mesh, double spacing, double area_floor) {
    try {
        const Polyline iface = interface_polyline(mesh);
        const double perim = polyline_perimeter(iface);
        const int n = std::max(8, static_cast<int>(std::round(perim / spacing)));
        const auto curve = ParametricCurve::polygon(iface.pts);
        const Polyline resampled = sample_curve(curve, n);
        const auto rebuilt = ParametricCurve::polygon(resampled.pts);
        auto fresh = std::make_shared<const Mesh>(
            build_disk_mesh(mesh.domain_radius, spacing, rebuilt));
        // A ragged interface polygon can triangulate badly; never swap in a
        // mesh that would trip the run's quality floor.
        if (min_signed_area(*fresh) < area_floor) return nullptr;
        return fresh;
    } catch (const GeometryError&) {
        return nullptr;
    }
}

} // namespace
} // namespace dotshape


namespace dotshape {

void OptimizerConfig::validate() const {
    if (!(s > 0.0)) throw ValidationError("optimizer: step scale s must be positive");
    if (rho.has_value() == beta.has_value())
        throw ValidationError("optimizer: exactly one of rho / beta must be set");
    if (rho && !(*rho >= 0.0)) throw ValidationError("optimizer: rho must be >= 0");
    if (beta && !(*beta > 1.0)) throw ValidationError("optimizer: beta must be > 1");
    if (!(t0 > 0.0)) throw ValidationError("optimizer: t0 must be positive");
    if (max_iters <= 0) throw ValidationError("optimizer: max_iters must be positive");
    if (!(rho1 >= 0.0)) throw ValidationError("optimizer: rho1 must be >= 0");
}

double step_size(double misfit, const DeformationField& V, double s) {
    if (V.h1_norm_sq <= 0.0) return std::numeric_limits<double>::infinity();
    return s * misfit / V.h1_norm_sq;
}

double update_mu(double mu_in, double grad, double t, double mu_min, double mu_max) {
    return std::clamp(mu_in - t * grad, mu_min, mu_max);
}

double balancing_update(double misfit, const Coefficients& c, const Mesh& mesh,
                        double beta) {
    const double norm_sq = mu_l2_norm_sq(c, mesh);
    if (norm_sq <= 0.0) throw ValidationError("balancing_update: ||mu|| must be > 0");
    return 2.0 * (beta - 1.0) * misfit / norm_sq;
}

std::pair<double, Mesh> backtrack(const Mesh& mesh, const DeformationField& V,
                                  double t_init) {
    return backtrack_with_floor(mesh, V, t_init, 0.1 * min_signed_area(mesh));
}

std::pair<double, Mesh> backtrack_with_floor(const Mesh& mesh,
                                             const DeformationField& V, double t_init,
                                             double area_floor) {
    if (!(t_init > 0.0)) throw ValidationError("backtrack: t_init must be positive");
    double t = t_init;
    for (int j = 0; j <= 60; ++j, t *= 0.5) {
        Mesh candidate = deform_unchecked(mesh, V, t);
        if (min_signed_area(candidate) >= area_floor) return {t, std::move(candidate)};
    }
    throw StepFailureError("backtrack: no mesh-preserving step after 60 halvings");
}

RunResult run(const OptimizerConfig& cfg, const Problem& problem,
              const IterationCallback& callback) {
    cfg.validate();
    problem.coefficients.validate();

    RunResult result;
    MeshPtr mesh = problem.mesh;
    Coefficients c = problem.coefficients;
    c.mu_in = std::clamp(cfg.mu_in_init, c.mu_min, c.mu_max);
    const Measurement& h = problem.measurement;

    result.status = RunStatus::MaxIters;
    result.message = "iteration budget exhausted";

    // Mesh quality is anchored to the initial mesh: every accepted step keeps
    // at least 10% of the starting minimum area, so repeated backtracking
    // cannot erode the mesh to numerical death.
    const double area_floor = 0.1 * min_signed_area(*mesh);

    // Interface spacing of the initial mesh, reused as the remesh target.
    double spacing0 = 0.0;
    {
        const auto nrm = interface_normals(*mesh);
        for (const double l : nrm.lumped_len) spacing0 += l;
        spacing0 /= static_cast<double>(nrm.lumped_len.size());
    }

    double best_misfit = std::numeric_limits<double>::infinity();
    int last_improvement = -1;
    MeshPtr best_mesh = mesh;
    double best_mu = c.mu_in;

    for (int k = 0; k < cfg.max_iters; ++k) {
        const MeshPtr mesh_at_solve = mesh;
        const double mu_at_solve = c.mu_in;
        const auto sys = assemble(mesh, c, 1);
        const Field u = solve_state(sys, problem.source);
        const Field p = solve_adjoint(sys, u, h);

        const double misfit = boundary_misfit(u, h);
        const double mu_norm_sq = mu_l2_norm_sq(c, *mesh);
        const double rho = cfg.beta ? balancing_update(misfit, c, *mesh, *cfg.beta)
                                    : *cfg.rho;
        const Polyline iface = interface_polyline(*mesh);
        const double rho1_eff =
            cfg.rho1_misfit_factor > 0.0
                ? std::min(cfg.rho1, cfg.rho1_misfit_factor * misfit)
                : cfg.rho1;

        const double grad_mu = parameter_gradient(u, p, c, rho, *mesh);
        const auto kernel =
            shape_gradient_kernel(u, p, c, problem.source, *mesh, cfg.variant);
        const auto total_kernel = combined_kernel(kernel, rho1_eff, *mesh);
        const DeformationField V = sobolev_extension(kernel, rho1_eff, mesh);

        IterationRecord rec;
        rec.iter = k;
        rec.misfit = misfit;
        rec.tikhonov = 0.5 * rho * mu_norm_sq;
        rec.perimeter_term = 0.5 * rho1_eff * polyline_perimeter(iface);
        rec.total = rec.misfit + rec.tikhonov + rec.perimeter_term;
        rec.mu_in = c.mu_in;
        rec.rho = rho;
        rec.mu_norm_sq = mu_norm_sq;
        rec.vnorm_sq = V.h1_norm_sq;
        rec.riesz_abs_err =
            std::abs(directional_shape_derivative(total_kernel, V, *mesh) +
                     V.h1_norm_sq);

        if (V.h1_norm_sq <= 0.0) {
            rec.step = 0.0;
            rec.min_area = min_signed_area(*mesh);
            rec.interface = iface;
            result.history.push_back(rec);
            if (callback) callback(rec, *mesh);
            result.status = RunStatus::Converged;
            result.message = "descent direction vanished";
            break;
        }

        double t = step_size(misfit, V, cfg.s);
        if (misfit < cfg.shrink_when_cost_below) t *= 0.25;
        if (cfg.max_move_frac > 0.0) {
            double vmax = 0.0;
            for (const auto& v : V.v) vmax = std::max(vmax, v.norm());
            if (vmax > 0.0) {
                double spacing = 0.0;
                const auto nrm = interface_normals(*mesh);
                for (const double l : nrm.lumped_len) spacing += l;
                spacing /= static_cast<double>(nrm.lumped_len.size());
                t = std::min(t, cfg.max_move_frac * spacing / vmax);
            }
        }

        double t_acc;
        Mesh accepted;
        try {
            std::tie(t_acc, accepted) = backtrack_with_floor(*mesh, V, t, area_floor);
        } catch (const StepFailureError& e) {
            result.status = RunStatus::StepFailure;
            result.message = e.what();
            break;
        }

        // Decoupled override: Cauchy-type step in the mu variable, using the
        // same J/|gradient|^2 normalization the shape step uses.
        const double t_mu =
            cfg.decoupled_steps
                ? (grad_mu == 0.0 ? 0.0
                                  : cfg.s_mu * misfit / (grad_mu * grad_mu))
                : t_acc;
        const double mu_next = update_mu(c.mu_in, grad_mu, t_mu, c.mu_min, c.mu_max);

        if (cfg.relax_passes > 0) relax_interior_nodes(accepted, cfg.relax_passes);

        rec.step = t_acc;
        rec.min_area = min_signed_area(accepted);
        rec.interface = interface_polyline(accepted);
        result.history.push_back(rec);
        if (callback) callback(rec, accepted);

        mesh = std::make_shared<const Mesh>(std::move(accepted));
        c.mu_in = mu_next;

        if (cfg.remesh_every > 0 && (k + 1) % cfg.remesh_every == 0) {
            if (MeshPtr fresh = try_remesh(*mesh, spacing0, area_floor)) mesh = fresh;
        }

        if (t_acc < cfg.t0) {
            result.status = RunStatus::Converged;
            result.message = "step size fell below t0";
            break;
        }
        // The returned state is the best-fitting iterate seen, and replacing
        // the incumbent takes a meaningful improvement: late iterations jitter
        // in the data's null modes (and under noise they semiconverge: fit
        // first, then drift), which must not churn the incumbent.
        if (rec.misfit < best_misfit * (1.0 - cfg.stall_rel_tol)) {
            last_improvement = k;
            best_misfit = rec.misfit;
            best_mesh = mesh_at_solve;
            best_mu = mu_at_solve;
        }
        if (cfg.stall_window > 0 && cfg.stall_rel_tol > 0.0 &&
            k - last_improvement >= cfg.stall_window) {
            result.status = RunStatus::Converged;
            result.message = "misfit stagnated at the discretization floor";
            break;
        }
    }

    result.final_mesh = best_mesh;
    result.final_mu_in = best_mu;
    return result;
}

} // namespace dotshape
