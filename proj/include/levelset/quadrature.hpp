#pragma once

#include "levelset/errors.hpp"
#include "levelset/small_matrix.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace levelset {

/// Points and weights on a reference element. Weights sum to the reference
/// measure (1 for the unit box, 1/d! for the unit simplex).
template <int Dim>
struct QuadratureRule {
    std::vector<Vec<Dim>> points;
    std::vector<double> weights;

    [[nodiscard]] int size() const { return static_cast<int>(weights.size()); }
};

/// n-point Gauss-Legendre rule on [0, 1].
inline QuadratureRule<1> gauss_legendre(int n) {
    if (n < 1) throw DomainError("gauss_legendre: need at least one point");
    QuadratureRule<1> rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton on P_n starting from the Chebyshev-like guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute derivative at the converged root for the weight.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1, 1] -> [0, 1], ascending order.
        rule.points[n - 1 - i] = {0.5 * (x + 1.0)};
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

/// Tensor product of Gauss-Legendre rules with counts[d] points along d.
template <int Dim>
QuadratureRule<Dim> tensor_gauss(const std::array<int, Dim>& counts) {
    std::array<QuadratureRule<1>, Dim> lines;
    int total = 1;
    for (int d = 0; d < Dim; ++d) {
        lines[d] = gauss_legendre(counts[d]);
        total *= counts[d];
    }
    QuadratureRule<Dim> rule;
    rule.points.resize(total);
    rule.weights.resize(total);
    for (int q = 0; q < total; ++q) {
        int rem = q;
        double w = 1.0;
        for (int d = 0; d < Dim; ++d) {
            const int i = rem % counts[d];
            rem /= counts[d];
            rule.points[q][d] = lines[d].points[i][0];
            w *= lines[d].weights[i];
        }
        rule.weights[q] = w;
    }
    return rule;
}

/// Degree-2 exact rule on the unit reference simplex.
template <int Dim>
QuadratureRule<Dim> simplex_rule() {
    QuadratureRule<Dim> rule;
    if constexpr (Dim == 1) {
        return tensor_gauss<1>({2});
    } else if constexpr (Dim == 2) {
        rule.points = {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}};
        rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    } else {
        const double a = 0.1381966011250105, b = 0.5854101966249685;
        rule.points = {{a, a, a}, {b, a, a}, {a, b, a}, {a, a, b}};
        rule.weights = {1.0 / 24.0, 1.0 / 24.0, 1.0 / 24.0, 1.0 / 24.0};
    }
    return rule;
}

}  // namespace levelset
