#include "levelset/harness.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace levelset;

namespace {

std::string scratch_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("levelset_test_" + name);
    std::filesystem::remove_all(p);
    return p.string();
}

std::string first_line(const std::string& path) {
    std::ifstream in(path);
    std::string s;
    std::getline(in, s);
    return s;
}

}  // namespace

TEST(Config, ParsesKeysAndComments) {
    std::istringstream in("# vortex at a coarse level\ncase = vortex2d\nmesh = 24   # per direction\n"
                          "alt = proj-scale\nkappa_d=1.5\nlevels = 8,16\n\nvolume_conserve = no\n");
    const auto cfg = parse_config(in);
    EXPECT_EQ(cfg.case_name, "vortex2d");
    EXPECT_EQ(cfg.mesh, 24);
    EXPECT_EQ(cfg.alternative, Alternative::projected_scaling);
    EXPECT_EQ(cfg.resolved_kappa_d(), 1.5);
    EXPECT_EQ(cfg.levels, (std::vector<int>{8, 16}));
    EXPECT_FALSE(cfg.volume_conserve);
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, RejectsBadInput) {
    std::istringstream no_eq("mesh 10\n");
    EXPECT_THROW(parse_config(no_eq), DomainError);
    std::istringstream unknown("meshes = 10\n");
    EXPECT_THROW(parse_config(unknown), DomainError);
    CaseConfig cfg;
    EXPECT_THROW(cfg.set("mesh", "ten"), DomainError);
    EXPECT_THROW(cfg.set("positivity", "ignore"), DomainError);
    cfg.family = "tri";
    cfg.degree = 2;
    EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(Config, CaseDefaults) {
    CaseConfig cfg;
    EXPECT_EQ(cfg.resolved_alpha(), 2.0);
    EXPECT_EQ(cfg.resolved_t_end(), 8.0);
    EXPECT_EQ(cfg.resolved_kappa_d(), 0.0);
    cfg.case_name = "distortion";
    EXPECT_EQ(cfg.resolved_alpha(), 3.0);
    cfg.case_name = "vortex3d";
    EXPECT_EQ(cfg.resolved_t_end(), 3.0);
    cfg.family = "tri";
    EXPECT_EQ(cfg.resolved_kappa_d(), 10.0);
    bool found = false;
    for (const auto& [k, v] : cfg.manifest())
        if (k == "kappa_d") found = v == format_double(10.0);
    EXPECT_TRUE(found);
}

TEST(TimeSteps, EvenCountLandsOnEnd) {
    const auto m = build_structured<2>({0, 0}, {1, 1}, {10, 10}, 1, 0);
    const auto [n, dt] = vortex_time_steps<2>(m, vortex2d_velocity, 8.0, 0.0, 0.5);
    EXPECT_EQ(n % 2, 0);
    EXPECT_NEAR(n * dt, 8.0, 1e-12);
    // max |u| is just under 1 on the sampled points, so dt is near cfl h.
    EXPECT_LE(dt, 0.5 * 0.1 / 0.95);
    EXPECT_GE(dt, 0.5 * 0.1 * 0.95);
    const auto [n2, dt2] = vortex_time_steps<2>(m, vortex2d_velocity, 1.0, 0.3, 0.5);
    EXPECT_EQ(n2, 4);
    EXPECT_DOUBLE_EQ(dt2, 0.25);
}

TEST(Sampling, LatticeCoversPatch) {
    const auto m = grade_structured<2>(build_structured<2>({0, 0}, {2, 1}, {3, 2}, 2, 1), power_law(1.5));
    const auto lat = sample_lattice<2>(m, 4);
    EXPECT_EQ(lat.dims[0], 13);
    EXPECT_EQ(lat.dims[1], 9);
    ASSERT_EQ(lat.points.size(), 13u * 9u);
    EXPECT_NEAR(lat.points.front()[0], 0.0, 1e-14);
    EXPECT_NEAR(lat.points.back()[0], 2.0, 1e-14);
    EXPECT_NEAR(lat.points.back()[1], 1.0, 1e-14);
    for (std::size_t i = 0; i < lat.sites.size(); i += 7) {
        const auto x = m.map(lat.sites[i].first, lat.sites[i].second);
        EXPECT_NEAR(x[0], lat.points[i][0], 1e-14);
    }
}

TEST(Sampling, LocatePointOnTriangles) {
    const auto m = triangulate(build_structured<2>({0, 0}, {1, 1}, {5, 5}, 1, 0));
    for (const Vec<2>& x : {Vec<2>{0.13, 0.77}, Vec<2>{1.0, 1.0}, Vec<2>{0.4, 0.4}}) {
        const auto [e, r] = locate_point<2>(m, x);
        const auto y = m.map(e, r);
        EXPECT_NEAR(y[0], x[0], 1e-12);
        EXPECT_NEAR(y[1], x[1], 1e-12);
    }
    EXPECT_THROW(locate_point<2>(m, {1.2, 0.5}), DomainError);
}

TEST(Jumps, ContinuousFieldHasNoJump) {
    const auto m = grade_structured<2>(build_structured<2>({0, 0}, {1, 1}, {8, 8}, 1, 0), power_law(1.8));
    const auto phi = interpolate<2>(m, [](const Vec<2>& x) { return x[0] - x[1]; });
    const HeavisideParams hp{3.0};
    EXPECT_LT(max_interelement_jump(projected_inverse_scaling(phi, RedistanceParams{}), hp), 1e-12);
    EXPECT_GT(max_interelement_jump(direct_redistance(phi, RedistanceParams{}), hp), 1e-3);
    const auto tri = triangulate(m);
    const auto phit = interpolate<2>(tri, [](const Vec<2>& x) { return x[0] - x[1]; });
    EXPECT_LT(max_interelement_jump(projected_redistance(phit, RedistanceParams{}), hp), 1e-12);
}

TEST(Rates, Log2OfRatiosPerDiscretization) {
    std::vector<ConvergenceRow> rows{{"a", 10, 0.4, NAN, 1.0, NAN},
                                     {"a", 20, 0.1, NAN, 0.5, NAN},
                                     {"b", 10, 0.3, NAN, 0.3, NAN}};
    fill_rates(rows);
    EXPECT_TRUE(std::isnan(rows[0].rate_l1));
    EXPECT_DOUBLE_EQ(rows[1].rate_l1, 2.0);
    EXPECT_DOUBLE_EQ(rows[1].rate_linf, 1.0);
    EXPECT_TRUE(std::isnan(rows[2].rate_l1));
}

TEST(Monotone1d, WritesCurvesAndManifest) {
    CaseConfig cfg;
    cfg.case_name = "monotone1d";
    cfg.mesh = 10;
    cfg.out_dir = scratch_dir("monotone");
    const auto curves = run_monotone1d(cfg);
    ASSERT_EQ(curves.size(), 4u);
    EXPECT_TRUE(curves[0].monotone);   // uniform, naive
    EXPECT_FALSE(curves[2].monotone);  // graded, naive
    const auto t = read_csv(cfg.out_dir + "/monotone1d_graded_naive.csv");
    EXPECT_EQ(t.header, (std::vector<std::string>{"x", "phi_hat", "heaviside"}));
    ASSERT_EQ(t.rows.size(), 1000u);
    EXPECT_NEAR(t.rows[999][0], 1.0, 1e-15);
    std::ifstream manifest(cfg.out_dir + "/manifest.txt");
    std::stringstream text;
    text << manifest.rdbuf();
    EXPECT_NE(text.str().find("case = monotone1d\n"), std::string::npos);
    EXPECT_NE(text.str().find("alpha = 3\n"), std::string::npos);
}

TEST(Vortex2d, ShortRunConservesAndWrites) {
    CaseConfig cfg;
    cfg.mesh = 12;
    cfg.kappa_d = 1.0;
    cfg.t_end = 0.5;
    cfg.out_dir = scratch_dir("vortex");
    const auto r = run_vortex2d(cfg);
    EXPECT_EQ(r.steps % 2, 0);
    EXPECT_LE(r.max_relative_volume_error, 1e-10);
    EXPECT_EQ(r.volumes.size(), static_cast<std::size_t>(r.steps + 1));
    EXPECT_EQ(first_line(cfg.out_dir + "/vortex2d_t0.vtk"), "# vtk DataFile Version 3.0");
    EXPECT_TRUE(std::filesystem::exists(cfg.out_dir + "/vortex2d_t0.5.vtk"));
    const auto series = read_csv(cfg.out_dir + "/vortex2d_series.csv");
    ASSERT_EQ(series.rows.size(), r.volumes.size());
    EXPECT_NEAR(series.rows.back()[1], 0.5, 1e-12);
}

TEST(Distortion, ReportHasEveryAlternative) {
    CaseConfig cfg;
    cfg.case_name = "distortion";
    cfg.mesh = 6;
    cfg.degree = 2;
    const auto rep = run_distortion(cfg);
    EXPECT_EQ(rep.rows.size(), 12u);
    EXPECT_GT(rep.find(Alternative::direct, 0.0).max_jump, 1e-3);
    EXPECT_LT(rep.find(Alternative::projected_inverse_scaling, 1.0).max_jump, 1e-8);
    EXPECT_THROW((void)rep.find(Alternative::direct, 2.0), DomainError);
}
