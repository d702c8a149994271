#include "dotshape/synth.hpp"

#include <random>

#include "dotshape/errors.hpp"

namespace dotshape {

Measurement generate_measurement(double radius, const ParametricCurve& exact_interface,
                                 const Coefficients& c, const SourceSpec& s,
                                 double h_fine) {
    auto mesh =
        std::make_shared<Mesh>(build_disk_mesh(radius, h_fine, exact_interface));
    mesh->order = 2;
    MeshPtr fine = std::move(mesh);
    s.validate(radius);
    const auto sys = assemble(fine, c, 2);
    const Field u = solve(sys, assemble_load(*fine, s, 2));
    return boundary_trace(u);
}

Measurement add_noise(const Measurement& h, const NoiseSpec& n) {
    if (n.gamma < 0.0) throw ValidationError("noise level gamma must be >= 0");
    if (n.gamma == 0.0) return h;
    Measurement out = h;
    std::mt19937_64 rng(n.seed);
    std::normal_distribution<double> draw(0.0, n.gamma * h.max_abs());
    for (double& v : out.value) v += draw(rng);
    return out;
}

} // namespace dotshape
