#include "levelset/redistance.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace levelset;

namespace {

std::vector<double> uneven_widths() { return {1.0, 2.5, 0.7, 1.9, 3.0, 0.4, 1.2, 2.2}; }

MeshPatch<1> uneven_line() {
    const auto w = uneven_widths();
    return grade_structured<1>(build_structured<1>({0.0}, {1.0}, {static_cast<int>(w.size())}, 1, 0), widths_law(w));
}

// Dense system for P on a linear 1D mesh, built from the closed-form element
// matrices: mass h/6 [2 1; 1 2], reference stiffness h [1 -1; -1 1], and a
// right-hand side of the elementwise constant |phi_{i+1} - phi_i|.
Eigen::VectorXd oracle_eps(const std::vector<double>& nodes, const std::vector<double>& phi, double kappa_d) {
    const int n = static_cast<int>(nodes.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int e = 0; e + 1 < n; ++e) {
        const double h = nodes[e + 1] - nodes[e];
        const double g = std::abs(phi[e + 1] - phi[e]);
        a(e, e) += h / 3.0 + kappa_d * h;
        a(e + 1, e + 1) += h / 3.0 + kappa_d * h;
        a(e, e + 1) += h / 6.0 - kappa_d * h;
        a(e + 1, e) += h / 6.0 - kappa_d * h;
        b(e) += 0.5 * h * g;
        b(e + 1) += 0.5 * h * g;
    }
    return a.ldlt().solve(b);
}

ScalarField<2> random_smooth(const MeshPatch<2>& m, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = u(rng), b = u(rng), c = u(rng), d = 2.0 + 2.0 * u(rng), e = 0.3 * u(rng);
    return interpolate<2>(m, [=](const Vec<2>& x) {
        return a * (x[0] - 0.5) + b * (x[1] - 0.5) + c * std::sin(d * x[0] + 1.3 * x[1]) + e;
    });
}

}  // namespace

TEST(Projection, InverseScalingMatchesDenseOracle) {
    const auto m = uneven_line();
    const auto phi = interpolate<1>(m, [](const Vec<1>& x) { return std::sin(3.0 * x[0]) + x[0] - 0.6; });
    std::vector<double> nodes;
    for (const auto& p : m.control_points()) nodes.push_back(p[0]);
    for (double k : {0.0, 0.5, 3.0}) {
        RedistanceParams rp;
        rp.kappa_d = k;
        const auto hat = projected_inverse_scaling(phi, rp);
        const auto ref = oracle_eps(nodes, phi.coefficients(), k);
        const auto& eps = hat.aux()->coefficients();
        ASSERT_EQ(eps.size(), static_cast<std::size_t>(ref.size()));
        for (int i = 0; i < ref.size(); ++i) EXPECT_NEAR(eps[i], ref[i], 1e-10) << "kappa_d=" << k << " i=" << i;
    }
}

TEST(Projection, SystemIsSymmetric) {
    const auto m = build_structured<2>({0, 0}, {1, 1}, {5, 4}, 2, 1);
    std::vector<double> f(m.cache().jxw.size(), 1.0);
    EXPECT_LT(assemble_projection<2>(m, f, 2.0).asymmetry(), 1e-14);
}

TEST(Projection, ConstantIsReproducedForAnyKappa) {
    const auto m = grade_structured<2>(build_structured<2>({0, 0}, {1, 1}, {6, 6}, 2, 1), power_law(1.4));
    std::vector<double> f(m.cache().jxw.size(), 0.37);
    for (double k : {0.0, 1.0, 10.0}) {
        const auto x = solve_spd(assemble_projection<2>(m, f, k), 1e-13);
        for (double v : x) EXPECT_NEAR(v, 0.37, 1e-10);
    }
}

TEST(Alternatives, LinearFieldOnUniformMeshIsExactForAll) {
    // |grad_xi phi| = 3 / 10 everywhere, so phi_hat = 10 (x - 0.4). The
    // scaling alternatives project a constant, exact for any kappa_d.
    const auto m = build_structured<2>({0, 0}, {1, 1}, {10, 10}, 1, 0);
    const auto phi = interpolate<2>(m, [](const Vec<2>& x) { return 3.0 * (x[0] - 0.4); });
    const std::pair<Alternative, double> cases[] = {{Alternative::direct, 0.0},
                                                    {Alternative::projected_redistance, 0.0},
                                                    {Alternative::projected_scaling, 10.0},
                                                    {Alternative::projected_inverse_scaling, 10.0}};
    for (const auto& [a, k] : cases) {
        const auto hat = redistance(phi, RedistanceParams{a, k});
        for (int e : {0, 37, 99})
            for (const Vec<2>& r : {Vec<2>{0.2, 0.7}, Vec<2>{1.0, 0.0}}) {
                const double x = m.map(e, r)[0];
                EXPECT_NEAR(hat.value(e, r), 10.0 * (x - 0.4), 1e-9) << alternative_name(a);
                const auto g = hat.ref_gradient(e, r);
                EXPECT_NEAR(g[0], 1.0, 1e-9) << alternative_name(a);
                EXPECT_NEAR(g[1], 0.0, 1e-9) << alternative_name(a);
            }
    }
}

TEST(Alternatives, ScalingPreservesSignAtQuadraturePoints) {
    const auto m = grade_structured<2>(build_structured<2>({0, 0}, {1, 1}, {8, 8}, 2, 1), power_law(1.5));
    std::mt19937 rng(21);
    for (int trial = 0; trial < 6; ++trial) {
        const auto phi = random_smooth(m, rng);
        for (Alternative a : {Alternative::projected_scaling, Alternative::projected_inverse_scaling})
            for (double k : {0.0, 1.0, 10.0}) {
                RedistanceParams rp{a, k};
                rp.positivity = PositivityPolicy::clamp;
                const auto v = redistance(phi, rp).at_quadrature();
                for (std::size_t p = 0; p < v.size(); ++p) {
                    const double f = phi.value_at(p);
                    EXPECT_TRUE((f > 0) == (v[p] > 0) && (f < 0) == (v[p] < 0)) << "p=" << p;
                }
            }
    }
}

TEST(Alternatives, RefGradientMatchesDifferences) {
    const auto m = grade_structured<2>(build_structured<2>({0, 0}, {1, 1}, {6, 6}, 2, 1), power_law(1.3));
    const auto phi = project_l2<2>(m, [](const Vec<2>& x) { return 0.3 - std::hypot(x[0] - 0.45, x[1] - 0.5); });
    const double d = 1e-6;
    for (Alternative a : all_alternatives) {
        const auto hat = redistance(phi, RedistanceParams{a, 1.0});
        for (int e : {7, 14, 28}) {
            const Vec<2> r{0.35, 0.6};
            const auto g = hat.ref_gradient(e, r);
            for (int i = 0; i < 2; ++i) {
                Vec<2> rp = r, rm = r;
                rp[i] += d;
                rm[i] -= d;
                const double fd = (hat.value(e, rp) - hat.value(e, rm)) / (2 * d);
                EXPECT_NEAR(g[i], fd, 1e-6 * std::max(1.0, std::abs(fd))) << alternative_name(a);
            }
        }
    }
}

TEST(Alternatives, ShiftedAgreesWithRedistancingTheShiftedField) {
    const auto m = build_structured<2>({0, 0}, {1, 1}, {7, 7}, 2, 1);
    const auto phi = project_l2<2>(m, [](const Vec<2>& x) { return 0.25 - std::hypot(x[0] - 0.5, x[1] - 0.6); });
    for (Alternative a : all_alternatives) {
        const RedistanceParams rp{a, 1.0};
        const auto fast = redistance(phi, rp).shifted(0.013);
        const auto full = redistance(phi.shifted(0.013), rp);
        for (int e : {3, 24, 48}) {
            const Vec<2> r{0.5, 0.25};
            EXPECT_NEAR(fast.value(e, r), full.value(e, r), 1e-9) << alternative_name(a);
        }
        const auto sr = redistance(phi, rp).shift_response();
        const auto shifted = full.at_quadrature();
        for (std::size_t p = 0; p < shifted.size(); p += 17)
            EXPECT_NEAR(sr.base[p] + 0.013 * sr.slope[p], shifted[p], 1e-9) << alternative_name(a);
    }
}

TEST(Positivity, UndershootThrowsOrClamps) {
    // |grad_xi phi| jumps by a factor 400 across one element; the L2
    // projection of the jump undershoots below zero on the flat side.
    const auto m = build_structured<1>({0.0}, {1.0}, {20}, 1, 0);
    const auto kink = [](const Vec<1>& x) { return x[0] < 0.5 ? 0.0025 * (x[0] - 0.3) - 0.0005 : x[0] - 0.5; };
    const auto phi = interpolate<1>(m, kink);
    RedistanceParams rp{Alternative::projected_inverse_scaling, 0.0};
    EXPECT_THROW(projected_inverse_scaling(phi, rp), PositivityError);
    rp.positivity = PositivityPolicy::clamp;
    const auto hat = projected_inverse_scaling(phi, rp);
    EXPECT_GT(hat.clamped_points(), 0u);
    const auto v = hat.at_quadrature();
    for (std::size_t p = 0; p < v.size(); ++p) EXPECT_TRUE(std::isfinite(v[p]));
}

TEST(Params, NamesRoundTripAndValidation) {
    for (Alternative a : all_alternatives) EXPECT_EQ(parse_alternative(alternative_name(a)), a);
    EXPECT_THROW(parse_alternative("eikonal"), DomainError);
    EXPECT_THROW((RedistanceParams{Alternative::direct, -1.0}.validate()), DomainError);
    RedistanceParams bad;
    bad.delta = 0.0;
    EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Direct, FlatFieldUsesFloor) {
    const auto m = build_structured<2>({0, 0}, {1, 1}, {4, 4}, 1, 0);
    const auto hat = direct_redistance(ScalarField<2>(m, 2.0), RedistanceParams{});
    EXPECT_EQ(hat.gradient_floor(), 1e-8);
    EXPECT_NEAR(hat.value(5, {0.5, 0.5}), 2e8, 1e-4);
}
