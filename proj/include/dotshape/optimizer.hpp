#pragma once

#include <functional>
#include <optional>
#include <string>

#include "dotshape/gradients.hpp"
#include "dotshape/problems.hpp"

namespace dotshape {

struct OptimizerConfig {
    double s = 0.1;             ///< step scale in t = s * J / ||V||^2_H1
    std::optional<double> rho;  ///< fixed Tikhonov weight
    std::optional<double> beta; ///< balancing-principle trade-off (> 1)
    double rho1 = 0.0;          ///< perimeter regularization weight (cap)
    /// When positive, the effective perimeter weight follows the misfit
    /// (balancing-style): rho1_eff = min(rho1, rho1_misfit_factor * J).
    double rho1_misfit_factor = 0.0;
    double t0 = 1e-12;          ///< stop when the accepted step falls below
    int max_iters = 500;
    double shrink_when_cost_below = 1e-3; ///< quarter the step once J is small
    double mu_in_init = 1.1;
    FTermVariant variant = FTermVariant::JumpF;

    // Decoupled mu/shape steps (off by default: t1 = t2 = t).
    bool decoupled_steps = false;
    double s_mu = 0.1;

    /// Rebuild the mesh from the current interface polygon every this many
    /// accepted iterations (0 disables). Piecewise-constant coefficients
    /// transport through the region tags for free, and long interface marches
    /// otherwise squash elements until the forward solve loses the accuracy
    /// the misfit needs.
    int remesh_every = 10;

    /// Laplacian relaxation passes applied to free interior nodes after each
    /// accepted step (keeps element quality during long interface marches;
    /// connectivity and the interface polyline are untouched).
    int relax_passes = 2;

    /// Per-step node displacement cap as a fraction of the interface spacing
    /// (keeps noise-floor iterations from kicking the mesh around).
    double max_move_frac = 0.25;
    /// Stop when the best misfit has not improved by this relative amount
    /// over `stall_window` accepted iterations (0 disables); the same
    /// threshold gates incumbent updates.
    double stall_rel_tol = 1e-3;
    int stall_window = 40;

    void validate() const;
};

/// One accepted optimizer iteration. Cost values refer to the state solved at
/// the start of the iteration; mesh quantities to the accepted deformed mesh.
struct IterationRecord {
    int iter = 0;
    double misfit = 0.0;
    double tikhonov = 0.0;
    double perimeter_term = 0.0;
    double total = 0.0;
    double mu_in = 0.0;     ///< value used in this iteration's solves
    double rho = 0.0;       ///< value used in this iteration
    double step = 0.0;      ///< accepted step size
    double min_area = 0.0;  ///< of the accepted mesh
    double vnorm_sq = 0.0;  ///< ||V||^2_H1 of the descent field
    double riesz_abs_err = 0.0; ///< |<Gn,V> + ||V||^2|
    double mu_norm_sq = 0.0;    ///< ||mu||^2_L2 at solve time
    Polyline interface;         ///< post-step interface snapshot
};

enum class RunStatus { Converged, MaxIters, StepFailure };

struct Problem {
    MeshPtr mesh; ///< initial-guess mesh (interface at the initial curve)
    Coefficients coefficients;
    SourceSpec source;
    Measurement measurement;
};

struct RunResult {
    std::vector<IterationRecord> history;
    RunStatus status = RunStatus::MaxIters;
    std::string message;
    MeshPtr final_mesh;
    double final_mu_in = 0.0;
};

/// t = s * J / ||V||^2_H1; +infinity signals a vanished descent direction.
double step_size(double misfit, const DeformationField& V, double s);

/// Gradient step on mu_in, clamped to the admissible interval.
double update_mu(double mu_in, double grad, double t, double mu_min, double mu_max);

/// Balancing principle: rho with (beta - 1) J = (rho / 2) ||mu||^2.
double balancing_update(double misfit, const Coefficients& c, const Mesh& mesh,
                        double beta);

/// Largest t_init / 2^j (j <= 60) whose deformed mesh keeps at least 10% of
/// the pre-step minimum signed area. Throws StepFailureError if none works.
std::pair<double, Mesh> backtrack(const Mesh& mesh, const DeformationField& V,
                                  double t_init);

/// backtrack against an explicit area floor (run() anchors it to the initial
/// mesh so quality loss cannot compound across iterations).
std::pair<double, Mesh> backtrack_with_floor(const Mesh& mesh,
                                             const DeformationField& V, double t_init,
                                             double area_floor);

using IterationCallback =
    std::function<void(const IterationRecord&, const Mesh& accepted_mesh)>;

RunResult run(const OptimizerConfig& cfg, const Problem& problem,
              const IterationCallback& callback = {});

} // namespace dotshape
