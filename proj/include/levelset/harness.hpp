#pragma once

// Benchmarks: distortion test, 1D monotonicity study, 2D and 3D vortex in a
// box, and the vortex convergence study. Each run is deterministic and can
// write CSV tables, VTK snapshots and a manifest of resolved parameters.

#include "levelset/errors.hpp"
#include "levelset/field.hpp"
#include "levelset/heaviside.hpp"
#include "levelset/io.hpp"
#include "levelset/mesh.hpp"
#include "levelset/redistance.hpp"
#include "levelset/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace levelset {

// ---------------------------------------------------------------- velocity

// cos(pi t / T) written as sin(pi (T/2 - t) / T), which is exactly zero at
// the reversal time t = T/2.

/// Single vortex in the unit square, reversed by cos(pi t / 8).
inline Vec<2> vortex2d_velocity(const Vec<2>& x, double t) {
    constexpr double pi = std::numbers::pi;
    const double c = std::sin(pi * (4.0 - t) / 8.0);
    const double sx = std::sin(pi * x[0]), sy = std::sin(pi * x[1]);
    return {c * std::sin(2.0 * pi * x[1]) * sx * sx, -c * std::sin(2.0 * pi * x[0]) * sy * sy};
}

/// Deformation field in the unit cube, reversed by cos(pi t / 3).
inline Vec<3> vortex3d_velocity(const Vec<3>& x, double t) {
    constexpr double pi = std::numbers::pi;
    const double c = std::sin(pi * (1.5 - t) / 3.0);
    const double sx = std::sin(pi * x[0]), sy = std::sin(pi * x[1]), sz = std::sin(pi * x[2]);
    const double s2x = std::sin(2.0 * pi * x[0]), s2y = std::sin(2.0 * pi * x[1]), s2z = std::sin(2.0 * pi * x[2]);
    return {2.0 * c * sx * sx * s2y * s2z, -c * s2x * sy * sy * s2z, -c * s2x * s2y * sz * sz};
}

struct Sphere3 {
    Vec<3> centre{0.35, 0.35, 0.35};
    double radius = 0.15;
};

inline constexpr Vec<2> vortex2d_centre{0.5, 0.75};
inline constexpr double vortex2d_radius = 0.15;

// ------------------------------------------------------------------ config

struct CaseConfig {
    std::string case_name = "vortex2d";
    /// quad or tri.
    std::string family = "quad";
    int mesh = 40;
    int degree = 1;
    /// NaN selects the case default.
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double kappa_d = std::numeric_limits<double>::quiet_NaN();
    Alternative alternative = Alternative::projected_inverse_scaling;
    double C = 1.0;
    /// dt > 0 overrides the CFL rule.
    double dt = 0.0;
    double cfl = 0.5;
    double t_end = std::numeric_limits<double>::quiet_NaN();
    TauVariant tau = TauVariant::printed;
    bool volume_conserve = true;
    /// Benchmarks run to completion by default; the library-level
    /// defaults are the strict error policies.
    PositivityPolicy positivity = PositivityPolicy::clamp;
    PicardLimit picard_limit = PicardLimit::accept;
    /// Convergence study: add the 80-element level and the triangle family.
    bool full = false;
    std::vector<int> levels{10, 20, 40};
    /// Distortion test: element growth ratio per direction.
    double grading_x = 1.05;
    double grading_y = 1.03;
    /// Optional imported triangle mesh for 2D cases.
    std::string gmsh;
    /// Output lattice subdivisions per element.
    int samples = 4;
    /// Empty: write nothing.
    std::string out_dir;

    [[nodiscard]] double resolved_alpha() const {
        if (!std::isnan(alpha)) return alpha;
        return (case_name == "distortion" || case_name == "monotone1d") ? 3.0 : 2.0;
    }

    [[nodiscard]] double resolved_kappa_d() const {
        if (!std::isnan(kappa_d)) return kappa_d;
        return family == "tri" ? 10.0 : 0.0;
    }

    [[nodiscard]] double resolved_t_end() const {
        if (!std::isnan(t_end)) return t_end;
        return case_name == "vortex3d" ? 3.0 : 8.0;
    }

    [[nodiscard]] int resolved_continuity() const { return degree - 1; }

    void validate() const {
        static const char* cases[] = {"distortion", "vortex2d", "vortex3d", "converge", "monotone1d"};
        if (std::find(std::begin(cases), std::end(cases), case_name) == std::end(cases))
            throw DomainError("unknown case '" + case_name + "'");
        if (family != "quad" && family != "tri") throw DomainError("family must be quad or tri");
        if (mesh < 4) throw DomainError("mesh must have at least 4 elements per direction");
        if (degree < 1 || degree > 3) throw DomainError("degree must be 1, 2 or 3");
        if (family == "tri" && degree != 1) throw DomainError("triangles are linear only");
        if (!(resolved_alpha() > 0.0)) throw DomainError("alpha must be positive");
        if (!(resolved_kappa_d() >= 0.0)) throw DomainError("kappa_d must be nonnegative");
        if (!(C >= 0.0)) throw DomainError("C must be nonnegative");
        if (!(dt >= 0.0) || !(cfl > 0.0)) throw DomainError("dt must be nonnegative and cfl positive");
        if (!(resolved_t_end() > 0.0)) throw DomainError("t_end must be positive");
        if (samples < 1) throw DomainError("samples must be at least 1");
        for (int n : levels)
            if (n < 4) throw DomainError("convergence levels must have at least 4 elements");
        if (!(grading_x > 0.0) || !(grading_y > 0.0)) throw DomainError("grading ratios must be positive");
    }

    /// Sets one key from its text form.
    void set(const std::string& key, const std::string& value) {
        const auto num = [&] {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) throw DomainError("bad number for " + key + ": " + value);
            return v;
        };
        const auto integer = [&] {
            std::size_t used = 0;
            const int v = std::stoi(value, &used);
            if (used != value.size()) throw DomainError("bad integer for " + key + ": " + value);
            return v;
        };
        const auto boolean = [&] {
            if (value == "true" || value == "1" || value == "yes") return true;
            if (value == "false" || value == "0" || value == "no") return false;
            throw DomainError("bad boolean for " + key + ": " + value);
        };
        try {
            if (key == "case") case_name = value;
            else if (key == "family") family = value;
            else if (key == "mesh") mesh = integer();
            else if (key == "degree") degree = integer();
            else if (key == "alpha") alpha = num();
            else if (key == "kappa_d") kappa_d = num();
            else if (key == "alt") alternative = parse_alternative(value);
            else if (key == "C") C = num();
            else if (key == "dt") dt = num();
            else if (key == "cfl") cfl = num();
            else if (key == "t_end") t_end = num();
            else if (key == "tau") {
                if (value == "printed") tau = TauVariant::printed;
                else if (value == "conventional") tau = TauVariant::conventional;
                else throw DomainError("tau must be printed or conventional");
            } else if (key == "volume_conserve") volume_conserve = boolean();
            else if (key == "positivity") {
                if (value == "error") positivity = PositivityPolicy::error;
                else if (value == "clamp") positivity = PositivityPolicy::clamp;
                else throw DomainError("positivity must be error or clamp");
            } else if (key == "picard_limit") {
                if (value == "error") picard_limit = PicardLimit::error;
                else if (value == "accept") picard_limit = PicardLimit::accept;
                else throw DomainError("picard_limit must be error or accept");
            }
            else if (key == "full") full = boolean();
            else if (key == "levels") {
                levels.clear();
                std::stringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ',')) levels.push_back(std::stoi(item));
            } else if (key == "grading_x") grading_x = num();
            else if (key == "grading_y") grading_y = num();
            else if (key == "gmsh") gmsh = value;
            else if (key == "samples") samples = integer();
            else if (key == "out") out_dir = value;
            else throw DomainError("unknown config key '" + key + "'");
        } catch (const std::logic_error&) {
            throw DomainError("bad value for " + key + ": " + value);
        }
    }

    /// Every resolved parameter, for the run manifest.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> manifest() const {
        std::string lv;
        for (std::size_t i = 0; i < levels.size(); ++i) lv += (i ? "," : "") + std::to_string(levels[i]);
        return {{"case", case_name},
                {"family", family},
                {"mesh", std::to_string(mesh)},
                {"degree", std::to_string(degree)},
                {"continuity", std::to_string(resolved_continuity())},
                {"alpha", format_double(resolved_alpha())},
                {"kappa_d", format_double(resolved_kappa_d())},
                {"alt", std::string(alternative_name(alternative))},
                {"C", format_double(C)},
                {"dt", format_double(dt)},
                {"cfl", format_double(cfl)},
                {"t_end", format_double(resolved_t_end())},
                {"tau", tau == TauVariant::printed ? "printed" : "conventional"},
                {"volume_conserve", volume_conserve ? "true" : "false"},
                {"positivity", positivity == PositivityPolicy::error ? "error" : "clamp"},
                {"picard_limit", picard_limit == PicardLimit::error ? "error" : "accept"},
                {"full", full ? "true" : "false"},
                {"levels", lv},
                {"grading_x", format_double(grading_x)},
                {"grading_y", format_double(grading_y)},
                {"gmsh", gmsh},
                {"samples", std::to_string(samples)},
                {"out", out_dir}};
    }
};

/// Flat key = value text; '#' starts a comment.
inline CaseConfig parse_config(std::istream& in, CaseConfig cfg = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DomainError("config line " + std::to_string(lineno) + ": expected key = value");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

inline CaseConfig load_config(const std::string& path, CaseConfig cfg = {}) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config '" + path + "'");
    return parse_config(in, std::move(cfg));
}

// ---------------------------------------------------------------- sampling

/// Evaluation sites (element, reference point) with their physical points.
/// Tensor patches: a global lattice with `samples` subdivisions per element,
/// x-fastest, dims points per direction. Simplices: one site per node.
template <int Dim>
struct SampleLattice {
    std::array<int, Dim> dims{};
    std::vector<std::pair<int, Vec<Dim>>> sites;
    std::vector<Vec<Dim>> points;
};

template <int Dim>
SampleLattice<Dim> sample_lattice(const MeshPatch<Dim>& patch, int samples) {
    SampleLattice<Dim> s;
    if (patch.family() == Family::simplex) {
        s.sites.assign(patch.num_dofs(), {-1, Vec<Dim>{}});
        for (int e = 0; e < patch.num_elements(); ++e) {
            const auto dofs = patch.element_dofs(e);
            for (int a = 0; a <= Dim; ++a) {
                if (s.sites[dofs[a]].first >= 0) continue;
                Vec<Dim> ref{};
                if (a > 0) ref[a - 1] = 1.0;
                s.sites[dofs[a]] = {e, ref};
            }
        }
        s.points = patch.control_points();
        s.dims.fill(1);
        s.dims[0] = patch.num_dofs();
        return s;
    }
    const auto& counts = patch.element_counts();
    std::size_t total = 1;
    for (int d = 0; d < Dim; ++d) {
        s.dims[d] = counts[d] * samples + 1;
        total *= s.dims[d];
    }
    s.sites.resize(total);
    s.points.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rem = i;
        std::array<int, Dim> g{};
        Vec<Dim> ref{};
        for (int d = 0; d < Dim; ++d) {
            const int k = static_cast<int>(rem % s.dims[d]);
            rem /= s.dims[d];
            g[d] = std::min(k / samples, counts[d] - 1);
            ref[d] = static_cast<double>(k - g[d] * samples) / samples;
        }
        const int e = patch.element_at(g);
        s.sites[i] = {e, ref};
        s.points[i] = patch.map(e, ref);
    }
    return s;
}

/// Element and reference coordinates of a physical point: direct for
/// axis-aligned structured patches, a search over cells for simplices.
template <int Dim>
std::pair<int, Vec<Dim>> locate_point(const MeshPatch<Dim>& patch, const Vec<Dim>& x) {
    if (patch.is_affine_box()) return patch.locate(x);
    if (patch.family() != Family::simplex) throw DomainError("locate_point: unsupported patch");
    double best = -std::numeric_limits<double>::infinity();
    std::pair<int, Vec<Dim>> found{-1, {}};
    for (int e = 0; e < patch.num_elements(); ++e) {
        const auto dofs = patch.element_dofs(e);
        const auto& pts = patch.control_points();
        Mat<Dim> j{};
        Vec<Dim> r{};
        for (int c = 0; c < Dim; ++c)
            for (int i = 0; i < Dim; ++i) j[i][c] = pts[dofs[c + 1]][i] - pts[dofs[0]][i];
        for (int i = 0; i < Dim; ++i) r[i] = x[i] - pts[dofs[0]][i];
        const Vec<Dim> ref = matvec<Dim>(inverse<Dim>(j), r);
        double lam0 = 1.0, m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < Dim; ++i) {
            lam0 -= ref[i];
            m = std::min(m, ref[i]);
        }
        m = std::min(m, lam0);
        if (m > best) {
            best = m;
            found = {e, ref};
        }
        if (m >= 0.0) break;
    }
    if (best < -1e-9) throw DomainError("locate_point: point outside mesh");
    // Project tiny negative barycentrics back into the cell.
    double sum = 0.0;
    for (int i = 0; i < Dim; ++i) {
        found.second[i] = std::max(found.second[i], 0.0);
        sum += found.second[i];
    }
    if (sum > 1.0)
        for (int i = 0; i < Dim; ++i) found.second[i] /= sum;
    return found;
}

/// Largest difference of the regularized Heaviside of phi_hat evaluated from
/// the two sides of every interior element face, at `per_face` points along
/// each face (2D patches).
inline double max_interelement_jump(const ScaledDistance<2>& hat, const HeavisideParams& heaviside,
                                    int per_face = 9) {
    const auto& patch = hat.phi().patch();
    double worst = 0.0;
    const auto H = [&](int e, const Vec<2>& r) { return regularized_heaviside(hat.value(e, r), heaviside); };
    if (patch.family() == Family::tensor_product) {
        const auto& counts = patch.element_counts();
        for (int e = 0; e < patch.num_elements(); ++e) {
            const auto g = patch.element_grid_index(e);
            for (int d = 0; d < 2; ++d) {
                if (g[d] + 1 >= counts[d]) continue;
                auto gn = g;
                gn[d] += 1;
                const int n = patch.element_at(gn);
                for (int k = 0; k < per_face; ++k) {
                    const double t = static_cast<double>(k) / (per_face - 1);
                    Vec<2> r0{}, r1{};
                    r0[d] = 1.0;
                    r1[d] = 0.0;
                    r0[1 - d] = r1[1 - d] = t;
                    worst = std::max(worst, std::abs(H(e, r0) - H(n, r1)));
                }
            }
        }
        return worst;
    }
    // Simplices: pair up cells through shared edges.
    std::map<std::pair<int, int>, std::pair<int, std::pair<int, int>>> edges;
    const auto vertex_ref = [](int a) {
        Vec<2> r{};
        if (a > 0) r[a - 1] = 1.0;
        return r;
    };
    for (int e = 0; e < patch.num_elements(); ++e) {
        const auto dofs = patch.element_dofs(e);
        for (int a = 0; a < 3; ++a) {
            const int b = (a + 1) % 3;
            const std::pair<int, int> key{std::min(dofs[a], dofs[b]), std::max(dofs[a], dofs[b])};
            // local vertices ordered by global index
            const std::pair<int, int> local = dofs[a] < dofs[b] ? std::pair{a, b} : std::pair{b, a};
            const auto it = edges.find(key);
            if (it == edges.end()) {
                edges.emplace(key, std::pair{e, local});
                continue;
            }
            const auto [f, lf] = it->second;
            for (int k = 0; k < per_face; ++k) {
                const double t = static_cast<double>(k) / (per_face - 1);
                Vec<2> re{}, rf{};
                for (int i = 0; i < 2; ++i) {
                    re[i] = (1.0 - t) * vertex_ref(local.first)[i] + t * vertex_ref(local.second)[i];
                    rf[i] = (1.0 - t) * vertex_ref(lf.first)[i] + t * vertex_ref(lf.second)[i];
                }
                worst = std::max(worst, std::abs(H(e, re) - H(f, rf)));
            }
        }
    }
    return worst;
}

// ------------------------------------------------------------------ output

namespace detail {

inline std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
}

}  // namespace detail

/// Writes phi, phi_hat and the regularized Heaviside on the sample lattice.
template <int Dim>
void emit_vtk(const ScaledDistance<Dim>& hat, const HeavisideParams& heaviside, int samples,
              const std::string& path) {
    const auto& patch = hat.phi().patch();
    const auto lat = sample_lattice(patch, samples);
    std::vector<double> phi(lat.sites.size()), phat(lat.sites.size()), H(lat.sites.size());
    for (std::size_t i = 0; i < lat.sites.size(); ++i) {
        const auto& [e, r] = lat.sites[i];
        phi[i] = hat.phi().value(e, r);
        phat[i] = hat.value(e, r);
        H[i] = regularized_heaviside(phat[i], heaviside);
    }
    const PointData data{{"phi", std::move(phi)}, {"phi_hat", std::move(phat)}, {"heaviside", std::move(H)}};
    if (patch.family() == Family::simplex) {
        std::vector<std::array<int, Dim + 1>> cells(patch.num_elements());
        for (int e = 0; e < patch.num_elements(); ++e) {
            const auto dofs = patch.element_dofs(e);
            std::copy(dofs.begin(), dofs.end(), cells[e].begin());
        }
        emit_vtk_simplices<Dim>(lat.points, cells, data, path);
    } else {
        emit_vtk_structured<Dim>(lat.dims, lat.points, data, path);
    }
}

// -------------------------------------------------------------- distortion

struct DistortionRow {
    Alternative alternative = Alternative::direct;
    double kappa_d = 0.0;
    double max_jump = 0.0;
    /// max |phi_hat| along the zero set of the input phi.
    double drift = 0.0;
};

struct DistortionReport {
    std::vector<DistortionRow> rows;
    int elements = 0;
    double seconds = 0.0;

    [[nodiscard]] const DistortionRow& find(Alternative a, double kappa_d) const {
        for (const auto& r : rows)
            if (r.alternative == a && r.kappa_d == kappa_d) return r;
        throw DomainError("DistortionReport: no such row");
    }
};

/// Unit square graded geometrically towards both axes (widths grow by
/// grading_x, grading_y per element); quads of the configured degree with
/// maximal continuity, or the triangulated linear version.
inline MeshPatch<2> distortion_mesh(const CaseConfig& cfg) {
    if (!cfg.gmsh.empty()) return read_gmsh22(cfg.gmsh);
    const int n = cfg.mesh;
    const int degree = cfg.family == "tri" ? 1 : cfg.degree;
    const auto base = build_structured<2>({0.0, 0.0}, {1.0, 1.0}, {n, n}, degree, degree - 1);
    auto graded = grade_structured<2>(base, {geometric_law(cfg.grading_x, n), geometric_law(cfg.grading_y, n)});
    if (cfg.family == "tri") return triangulate(graded);
    return graded;
}

/// phi = x - y on the distortion mesh, every alternative with kappa_d in
/// {0, 1, 10}.
inline DistortionReport run_distortion(const CaseConfig& cfg, std::ostream* log = nullptr) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const auto patch = distortion_mesh(cfg);
    const HeavisideParams heaviside{cfg.resolved_alpha()};
    const auto phi = patch.family() == Family::tensor_product && patch.basis().degree[0] > 1
                         ? project_l2<2>(patch, [](const Vec<2>& x) { return x[0] - x[1]; })
                         : interpolate<2>(patch, [](const Vec<2>& x) { return x[0] - x[1]; });

    // Sites on the zero set x = y, located once.
    constexpr int diag_samples = 2001;
    std::vector<std::pair<int, Vec<2>>> diag(diag_samples);
    for (int i = 0; i < diag_samples; ++i) {
        const double t = static_cast<double>(i) / (diag_samples - 1);
        diag[i] = locate_point<2>(patch, {t, t});
    }

    if (!cfg.out_dir.empty()) detail::ensure_dir(cfg.out_dir);
    DistortionReport report;
    report.elements = cfg.mesh;
    for (Alternative a : all_alternatives) {
        for (double k : {0.0, 1.0, 10.0}) {
            RedistanceParams rp{a, k};
            const auto hat = redistance(phi, rp);
            DistortionRow row{a, k, max_interelement_jump(hat, heaviside), 0.0};
            for (const auto& [e, r] : diag) row.drift = std::max(row.drift, std::abs(hat.value(e, r)));
            report.rows.push_back(row);
            if (log)
                *log << alternative_name(a) << " kappa_d=" << k << " max_jump=" << format_double(row.max_jump)
                     << " drift=" << format_double(row.drift) << '\n';
            if (!cfg.out_dir.empty()) {
                char name[96];
                std::snprintf(name, sizeof name, "distortion_%s_k%g.vtk", std::string(alternative_name(a)).c_str(),
                              k);
                emit_vtk<2>(hat, heaviside, cfg.samples, detail::join_path(cfg.out_dir, name));
            }
        }
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!cfg.out_dir.empty()) {
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : report.rows)
            rows.push_back({std::string(alternative_name(r.alternative)), format_double(r.kappa_d),
                            format_double(r.max_jump), format_double(r.drift)});
        emit_csv_cells({"alternative", "kappa_d", "max_jump", "drift"}, rows,
                 detail::join_path(cfg.out_dir, "distortion.csv"));
        emit_manifest(cfg.manifest(), detail::join_path(cfg.out_dir, "manifest.txt"));
    }
    return report;
}

// -------------------------------------------------------------- monotone1d

struct MonotoneCurve {
    std::string mesh;
    std::string method;
    std::vector<double> x;
    std::vector<double> phi_hat;
    std::vector<double> heaviside;
    bool monotone = true;
    /// Largest drop H[i] - H[i+1] between neighbouring samples.
    double max_descent = 0.0;
};

/// 1D patch on [0, 1] whose element widths alternate in the ratio 1 : 3
/// (0.05 / 0.15 for ten elements).
inline MeshPatch<1> alternating_mesh(int elements, int degree) {
    std::vector<double> widths(elements);
    for (int i = 0; i < elements; ++i) widths[i] = (i % 2 == 0) ? 1.0 : 3.0;
    const auto base = build_structured<1>({0.0}, {1.0}, {elements}, degree, degree - 1);
    return grade_structured<1>(base, widths_law(widths));
}

template <class Eval>
MonotoneCurve sample_curve(const MeshPatch<1>& patch, const HeavisideParams& heaviside, Eval&& eval,
                           std::string mesh, std::string method, int samples = 1000) {
    MonotoneCurve c{std::move(mesh), std::move(method), {}, {}, {}, true, 0.0};
    for (int i = 0; i < samples; ++i) {
        const double x = static_cast<double>(i) / (samples - 1);
        const auto [e, r] = patch.locate({x});
        const double v = eval(e, r);
        c.x.push_back(x);
        c.phi_hat.push_back(v);
        c.heaviside.push_back(regularized_heaviside(v, heaviside));
    }
    for (int i = 0; i + 1 < samples; ++i) c.max_descent = std::max(c.max_descent, c.heaviside[i] - c.heaviside[i + 1]);
    c.monotone = c.max_descent <= 0.0;
    return c;
}

/// phi = x - 0.5 on a uniform and an alternating 1D mesh; naive scaling and
/// the configured redistancing alternative.
inline std::vector<MonotoneCurve> run_monotone1d(const CaseConfig& cfg, std::ostream* log = nullptr) {
    cfg.validate();
    const HeavisideParams heaviside{cfg.resolved_alpha()};
    RedistanceParams rp{cfg.alternative, cfg.resolved_kappa_d()};
    rp.positivity = cfg.positivity;
    std::vector<MonotoneCurve> curves;
    const int n = cfg.mesh;
    const auto uniform = build_structured<1>({0.0}, {1.0}, {n}, cfg.degree, cfg.degree - 1);
    const auto graded = alternating_mesh(n, cfg.degree);
    for (const auto* patch : {&uniform, &graded}) {
        const std::string mesh = patch == &uniform ? "uniform" : "graded";
        const auto phi = interpolate<1>(*patch, [](const Vec<1>& x) { return x[0] - 0.5; });
        const auto naive = naive_scaled_distance(phi);
        curves.push_back(sample_curve(
            *patch, heaviside, [&](int e, const Vec<1>& r) { return naive.value(e, r); }, mesh, "naive"));
        const auto hat = redistance(phi, rp);
        curves.push_back(sample_curve(
            *patch, heaviside, [&](int e, const Vec<1>& r) { return hat.value(e, r); }, mesh,
            std::string(alternative_name(cfg.alternative))));
    }
    if (log)
        for (const auto& c : curves)
            *log << c.mesh << ' ' << c.method << (c.monotone ? " monotone" : " non-monotone")
                 << " max_descent=" << format_double(c.max_descent) << '\n';
    if (!cfg.out_dir.empty()) {
        detail::ensure_dir(cfg.out_dir);
        for (const auto& c : curves) {
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < c.x.size(); ++i) rows.push_back({c.x[i], c.phi_hat[i], c.heaviside[i]});
            emit_csv({"x", "phi_hat", "heaviside"}, rows,
                     detail::join_path(cfg.out_dir, "monotone1d_" + c.mesh + "_" + c.method + ".csv"));
        }
        emit_manifest(cfg.manifest(), detail::join_path(cfg.out_dir, "manifest.txt"));
    }
    return curves;
}

// ------------------------------------------------------------------ vortex

struct VortexResult {
    double dt = 0.0;
    int steps = 0;
    double reference_volume = 0.0;
    std::vector<double> times;
    std::vector<double> volumes;
    std::vector<double> corrections;
    std::vector<int> picard_iterations;
    double max_relative_volume_error = 0.0;
    double max_abs_correction = 0.0;
    /// Steps that stopped at picard_max (accept policy).
    int picard_unconverged_steps = 0;
    /// Largest number of clamped eps points in any step (clamp policy).
    std::size_t max_clamped_points = 0;
    /// int |H(phi_hat_T) - H(phi_hat_0)| and max |phi_T - phi_0|.
    double l1_heaviside = 0.0;
    double linf_phi = 0.0;
    double seconds = 0.0;
};

/// Step count: dt from the CFL number (or the explicit dt), rounded so an
/// even number of steps lands exactly on t_end (and on t_end / 2).
template <int Dim>
std::pair<int, double> vortex_time_steps(const MeshPatch<Dim>& patch, const VelocityField<Dim>& velocity,
                                         double t_end, double dt, double cfl) {
    if (!(dt > 0.0)) {
        double umax = 0.0;
        for (const auto& x : patch.cache().points) umax = std::max(umax, norm<Dim>(velocity(x, 0.0)));
        for (const auto& x : patch.control_points()) umax = std::max(umax, norm<Dim>(velocity(x, 0.0)));
        dt = umax > 0.0 ? cfl * patch.min_length() / umax : t_end;
    }
    int n = static_cast<int>(std::ceil(t_end / dt - 1e-9));
    n = std::max(2, n + (n % 2));
    return {n, t_end / n};
}

template <int Dim>
ScalarField<Dim> initial_field(const MeshPatch<Dim>& patch, const std::function<double(const Vec<Dim>&)>& f) {
    if (patch.family() == Family::tensor_product && patch.basis().degree[0] > 1) return project_l2<Dim>(patch, f);
    return interpolate<Dim>(patch, f);
}

/// Transports phi0 to t_end. Snapshots at t = 0, t_end / 2 and t_end go to
/// out_dir/<prefix>_t<time>.vtk, the time series to <prefix>_series.csv.
template <int Dim>
VortexResult run_vortex(const MeshPatch<Dim>& patch, const std::function<double(const Vec<Dim>&)>& phi0,
                        const VelocityField<Dim>& velocity, const CaseConfig& cfg, const std::string& prefix,
                        std::ostream* log = nullptr) {
    const auto t0 = std::chrono::steady_clock::now();
    const double t_end = cfg.resolved_t_end();
    const HeavisideParams heaviside{cfg.resolved_alpha()};
    RedistanceParams rp{cfg.alternative, cfg.resolved_kappa_d()};
    rp.positivity = cfg.positivity;
    const auto [steps, dt] = vortex_time_steps<Dim>(patch, velocity, t_end, cfg.dt, cfg.cfl);
    TransportParams tp;
    tp.dt = dt;
    tp.C = cfg.C;
    tp.tau = cfg.tau;
    tp.volume_conserve = cfg.volume_conserve;
    tp.on_limit = cfg.picard_limit;

    const bool write = !cfg.out_dir.empty();
    if (write) detail::ensure_dir(cfg.out_dir);
    const auto snapshot = [&](const ScaledDistance<Dim>& hat, double t) {
        if (!write) return;
        char name[64];
        std::snprintf(name, sizeof name, "_t%g.vtk", t);
        emit_vtk<Dim>(hat, heaviside, cfg.samples, detail::join_path(cfg.out_dir, prefix + name));
    };

    auto state = make_initial_state<Dim>(initial_field<Dim>(patch, phi0), 0.0, rp, heaviside);
    const auto hat0 = redistance(state.phi, rp);
    snapshot(hat0, 0.0);

    VortexResult res;
    res.dt = dt;
    res.steps = steps;
    res.reference_volume = state.reference_volume;
    res.times.push_back(0.0);
    res.volumes.push_back(state.reference_volume);
    res.corrections.push_back(0.0);
    res.picard_iterations.push_back(0);

    std::optional<ScaledDistance<Dim>> hat;
    for (int n = 1; n <= steps; ++n) {
        auto r = step<Dim>(state, velocity, tp, rp, heaviside);
        state = std::move(r.state);
        state.t = n * dt;  // no accumulated rounding in the clock
        hat.emplace(std::move(r.hat));
        res.times.push_back(state.t);
        res.volumes.push_back(r.report.volume);
        res.corrections.push_back(r.report.correction);
        res.picard_iterations.push_back(r.report.picard_iterations);
        res.max_relative_volume_error =
            std::max(res.max_relative_volume_error,
                     std::abs(r.report.volume - res.reference_volume) / res.reference_volume);
        res.max_abs_correction = std::max(res.max_abs_correction, std::abs(r.report.correction));
        res.picard_unconverged_steps += r.report.picard_unconverged ? 1 : 0;
        res.max_clamped_points = std::max(res.max_clamped_points, hat->clamped_points());
        if (2 * n == steps || n == steps) snapshot(*hat, state.t);
        if (log && (n % std::max(1, steps / 20) == 0 || n == steps))
            *log << prefix << " step " << n << '/' << steps << " t=" << format_double(state.t)
                 << " picard=" << r.report.picard_iterations << " correction=" << format_double(r.report.correction)
                 << '\n';
    }

    const auto b0 = hat0.at_quadrature();
    const auto bT = hat->at_quadrature();
    const auto& jxw = patch.cache().jxw;
    for (std::size_t p = 0; p < jxw.size(); ++p)
        res.l1_heaviside +=
            std::abs(regularized_heaviside(bT[p], heaviside) - regularized_heaviside(b0[p], heaviside)) * jxw[p];
    const auto phiT = state.corrected();
    const auto lat = sample_lattice(patch, cfg.samples);
    for (const auto& [e, r] : lat.sites)
        res.linf_phi = std::max(res.linf_phi, std::abs(phiT.value(e, r) - hat0.phi().value(e, r)));
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (write) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < res.times.size(); ++i)
            rows.push_back({static_cast<double>(i), res.times[i], res.volumes[i], res.corrections[i],
                            static_cast<double>(res.picard_iterations[i])});
        emit_csv({"step", "t", "V1", "correction", "picard_iterations"}, rows,
                 detail::join_path(cfg.out_dir, prefix + "_series.csv"));
    }
    return res;
}

/// Unit-square mesh for the 2D vortex with n elements per direction.
inline MeshPatch<2> vortex2d_mesh(const CaseConfig& cfg, int n) {
    if (!cfg.gmsh.empty()) return read_gmsh22(cfg.gmsh);
    if (cfg.family == "tri") return triangulate(build_structured<2>({0.0, 0.0}, {1.0, 1.0}, {n, n}, 1, 0));
    return build_structured<2>({0.0, 0.0}, {1.0, 1.0}, {n, n}, cfg.degree, cfg.degree - 1);
}

inline double vortex2d_initial(const Vec<2>& x) {
    return vortex2d_radius - std::hypot(x[0] - vortex2d_centre[0], x[1] - vortex2d_centre[1]);
}

inline VortexResult run_vortex2d(const CaseConfig& cfg, std::ostream* log = nullptr) {
    cfg.validate();
    const auto patch = vortex2d_mesh(cfg, cfg.mesh);
    auto res = run_vortex<2>(patch, vortex2d_initial, vortex2d_velocity, cfg, "vortex2d", log);
    if (!cfg.out_dir.empty()) emit_manifest(cfg.manifest(), detail::join_path(cfg.out_dir, "manifest.txt"));
    return res;
}

inline VortexResult run_vortex3d(const CaseConfig& cfg, std::ostream* log = nullptr) {
    cfg.validate();
    const Sphere3 sphere;
    const int n = cfg.mesh;
    const auto patch = build_structured<3>({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {n, n, n}, cfg.degree, cfg.degree - 1);
    const auto phi0 = [&](const Vec<3>& x) {
        return sphere.radius - std::sqrt((x[0] - sphere.centre[0]) * (x[0] - sphere.centre[0]) +
                                         (x[1] - sphere.centre[1]) * (x[1] - sphere.centre[1]) +
                                         (x[2] - sphere.centre[2]) * (x[2] - sphere.centre[2]));
    };
    auto res = run_vortex<3>(patch, phi0, vortex3d_velocity, cfg, "vortex3d", log);
    if (!cfg.out_dir.empty()) {
        auto m = cfg.manifest();
        m.emplace_back("sphere_centre", "0.35,0.35,0.35");
        m.emplace_back("sphere_radius", format_double(sphere.radius));
        emit_manifest(m, detail::join_path(cfg.out_dir, "manifest.txt"));
    }
    return res;
}

// ------------------------------------------------------------- convergence

struct ConvergenceRow {
    std::string discretization;
    int elements = 0;
    double l1_heaviside = 0.0;
    double rate_l1 = std::numeric_limits<double>::quiet_NaN();
    double linf_phi = 0.0;
    double rate_linf = std::numeric_limits<double>::quiet_NaN();
};

/// log2 of successive error ratios, attached to the finer level.
inline void fill_rates(std::vector<ConvergenceRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].discretization != rows[i - 1].discretization) continue;
        rows[i].rate_l1 = std::log2(rows[i - 1].l1_heaviside / rows[i].l1_heaviside);
        rows[i].rate_linf = std::log2(rows[i - 1].linf_phi / rows[i].linf_phi);
    }
}

struct Discretization {
    std::string name;
    std::string family;
    int degree;
};

inline std::vector<Discretization> convergence_discretizations(bool full) {
    std::vector<Discretization> d{{"linear-quad", "quad", 1}, {"quadratic-quad", "quad", 2}};
    if (full) d.insert(d.begin(), Discretization{"triangle", "tri", 1});
    return d;
}

/// Vortex runs over the dyadic levels for each discretization, with the
/// configured redistancing alternative.
inline std::vector<ConvergenceRow> run_convergence(const CaseConfig& cfg, std::ostream* log = nullptr) {
    cfg.validate();
    auto levels = cfg.levels;
    if (cfg.full && std::find(levels.begin(), levels.end(), 80) == levels.end()) levels.push_back(80);
    std::sort(levels.begin(), levels.end());
    std::vector<ConvergenceRow> rows;
    for (const auto& disc : convergence_discretizations(cfg.full)) {
        CaseConfig c = cfg;
        c.family = disc.family;
        c.degree = disc.degree;
        c.out_dir.clear();
        for (int n : levels) {
            const auto patch = vortex2d_mesh(c, n);
            const auto r = run_vortex<2>(patch, vortex2d_initial, vortex2d_velocity, c, disc.name, nullptr);
            rows.push_back({disc.name, n, r.l1_heaviside, std::numeric_limits<double>::quiet_NaN(), r.linf_phi,
                            std::numeric_limits<double>::quiet_NaN()});
            if (log)
                *log << disc.name << ' ' << n << " L1(H)=" << format_double(r.l1_heaviside)
                     << " Linf(phi)=" << format_double(r.linf_phi) << " steps=" << r.steps
                     << " picard_cap_steps=" << r.picard_unconverged_steps << " max_clamped=" << r.max_clamped_points
                     << " seconds=" << r.seconds << '\n';
        }
    }
    fill_rates(rows);
    if (!cfg.out_dir.empty()) {
        detail::ensure_dir(cfg.out_dir);
        std::vector<std::vector<std::string>> table;
        for (const auto& r : rows)
            table.push_back({r.discretization, std::to_string(r.elements), format_double(r.l1_heaviside),
                             format_double(r.rate_l1), format_double(r.linf_phi), format_double(r.rate_linf)});
        emit_csv_cells({"discretization", "elements", "L1_H", "rate_L1", "Linf_phi", "rate_Linf"}, table,
                 detail::join_path(cfg.out_dir, "convergence.csv"));
        emit_manifest(cfg.manifest(), detail::join_path(cfg.out_dir, "manifest.txt"));
    }
    return rows;
}

}  // namespace levelset
