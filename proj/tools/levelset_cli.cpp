// levelset <case> [--config PATH] [--mesh N] [--alpha A] [--kappa-d K] [--alt NAME]
//                 [--dt DT | --cfl C] [--out DIR] ...
//
// Cases: distortion, monotone1d, vortex2d, vortex3d, converge.

#include "levelset/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace levelset;

struct Overrides {
    std::string config;
    std::optional<int> mesh, degree, samples;
    std::optional<double> alpha, kappa_d, C, dt, cfl, t_end, grading_x, grading_y;
    std::optional<std::string> alt, family, tau, out, gmsh, levels, positivity, picard_limit;
    bool full = false;
    bool no_conserve = false;
};

void add_options(CLI::App& app, Overrides& o) {
    app.add_option("--config", o.config, "key = value configuration file");
    app.add_option("--mesh", o.mesh, "elements per direction");
    app.add_option("--degree", o.degree, "polynomial degree of quadrilateral patches");
    app.add_option("--family", o.family, "quad or tri");
    app.add_option("--alpha", o.alpha, "interface half-width in element lengths");
    app.add_option("--kappa-d", o.kappa_d, "smoothing of the redistancing projections");
    app.add_option("--alt", o.alt, "direct | proj-redist | proj-scale | proj-inv-scale");
    app.add_option("-C,--capturing", o.C, "discontinuity capturing constant");
    auto* dt = app.add_option("--dt", o.dt, "time step");
    auto* cfl = app.add_option("--cfl", o.cfl, "Courant number used to pick the time step");
    dt->excludes(cfl);
    app.add_option("--t-end", o.t_end, "final time");
    app.add_option("--tau", o.tau, "printed or conventional stabilization parameter");
    app.add_option("--positivity", o.positivity, "error or clamp when a projected scaling drops below its floor");
    app.add_option("--picard-limit", o.picard_limit, "error or accept when Picard reaches its iteration cap");
    app.add_option("--levels", o.levels, "comma separated element counts (converge)");
    app.add_option("--grading-x", o.grading_x, "element growth ratio along x (distortion)");
    app.add_option("--grading-y", o.grading_y, "element growth ratio along y (distortion)");
    app.add_option("--gmsh", o.gmsh, "imported triangle mesh, format 2.2");
    app.add_option("--samples", o.samples, "output lattice subdivisions per element");
    app.add_option("--out", o.out, "output directory");
    app.add_flag("--full", o.full, "converge: add the 80-element level and triangles");
    app.add_flag("--no-conserve", o.no_conserve, "disable the volume correction");
}

CaseConfig resolve(const std::string& name, const Overrides& o) {
    CaseConfig cfg;
    if (!o.config.empty()) cfg = load_config(o.config);
    cfg.case_name = name;
    const auto num = [](double v) { return format_double(v); };
    if (o.mesh) cfg.set("mesh", std::to_string(*o.mesh));
    if (o.degree) cfg.set("degree", std::to_string(*o.degree));
    if (o.samples) cfg.set("samples", std::to_string(*o.samples));
    if (o.family) cfg.set("family", *o.family);
    if (o.alpha) cfg.set("alpha", num(*o.alpha));
    if (o.kappa_d) cfg.set("kappa_d", num(*o.kappa_d));
    if (o.alt) cfg.set("alt", *o.alt);
    if (o.C) cfg.set("C", num(*o.C));
    if (o.dt) cfg.set("dt", num(*o.dt));
    if (o.cfl) {
        cfg.set("cfl", num(*o.cfl));
        cfg.set("dt", "0");
    }
    if (o.t_end) cfg.set("t_end", num(*o.t_end));
    if (o.tau) cfg.set("tau", *o.tau);
    if (o.levels) cfg.set("levels", *o.levels);
    if (o.positivity) cfg.set("positivity", *o.positivity);
    if (o.picard_limit) cfg.set("picard_limit", *o.picard_limit);
    if (o.grading_x) cfg.set("grading_x", num(*o.grading_x));
    if (o.grading_y) cfg.set("grading_y", num(*o.grading_y));
    if (o.gmsh) cfg.set("gmsh", *o.gmsh);
    if (o.out) cfg.set("out", *o.out);
    if (o.full) cfg.full = true;
    if (o.no_conserve) cfg.volume_conserve = false;
    cfg.validate();
    return cfg;
}

void print_vortex(const VortexResult& r) {
    std::printf("steps %d  dt %.6g  reference V1 %.12g\n", r.steps, r.dt, r.reference_volume);
    std::printf("max relative volume error %.3e\n", r.max_relative_volume_error);
    std::printf("max |correction| %.3e\n", r.max_abs_correction);
    std::printf("steps at the Picard cap %d  max clamped scaling points %zu\n", r.picard_unconverged_steps,
                r.max_clamped_points);
    std::printf("L1(H) %.4e  Linf(phi) %.4e\n", r.l1_heaviside, r.linf_phi);
    std::printf("wall time %.1f s\n", r.seconds);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Level-set interface capturing benchmarks"};
    app.require_subcommand(1);
    const char* cases[][2] = {
        {"distortion", "phi = x - y on a graded square: Heaviside jumps and interface drift"},
        {"monotone1d", "naive versus projected scaling on uniform and alternating 1D meshes"},
        {"vortex2d", "disc in the reversing single vortex, T = 8"},
        {"vortex3d", "sphere in the reversing 3D deformation field, T = 3"},
        {"converge", "vortex2d error table over dyadic meshes"},
    };
    Overrides o;
    for (const auto& c : cases) add_options(*app.add_subcommand(c[0], c[1]), o);
    CLI11_PARSE(app, argc, argv);

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        const CaseConfig cfg = resolve(name, o);
        if (name == "distortion") {
            const auto rep = run_distortion(cfg, &std::cout);
            std::printf("wall time %.1f s\n", rep.seconds);
        } else if (name == "monotone1d") {
            run_monotone1d(cfg, &std::cout);
        } else if (name == "vortex2d") {
            print_vortex(run_vortex2d(cfg, &std::cout));
        } else if (name == "vortex3d") {
            print_vortex(run_vortex3d(cfg, &std::cout));
        } else {
            const auto rows = run_convergence(cfg, &std::cout);
            std::printf("%-16s %5s %12s %7s %12s %7s\n", "discretization", "N", "L1(H)", "rate", "Linf(phi)",
                        "rate");
            for (const auto& r : rows)
                std::printf("%-16s %5d %12.3e %7.2f %12.3e %7.2f\n", r.discretization.c_str(), r.elements,
                            r.l1_heaviside, r.rate_l1, r.linf_phi, r.rate_linf);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "levelset: %s\n", e.what());
        return 1;
    }
    return 0;
}
