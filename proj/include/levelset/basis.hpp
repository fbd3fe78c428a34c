#pragma once

// Shape functions: univariate B-splines (Cox-de Boor with derivatives),
// tensor-product NURBS with rational derivatives up to mixed second order,
// and linear simplex (barycentric) bases.

#include "levelset/errors.hpp"
#include "levelset/small_matrix.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace levelset {

enum class Family { tensor_product, simplex };

/// Knot vectors, degrees and weights of a tensor-product NURBS space, or the
/// linear simplex family (which uses none of the tensor fields).
template <int Dim>
struct BasisSpec {
    Family family = Family::tensor_product;
    std::array<int, Dim> degree{};
    std::array<std::vector<double>, Dim> knots;
    /// One weight per function, x-fastest ordering. Empty means all ones.
    std::vector<double> weights;

    [[nodiscard]] int num_functions(int dir) const {
        return static_cast<int>(knots[dir].size()) - degree[dir] - 1;
    }

    [[nodiscard]] int size() const {
        int n = 1;
        for (int d = 0; d < Dim; ++d) n *= num_functions(d);
        return n;
    }

    [[nodiscard]] double weight(int index) const {
        return weights.empty() ? 1.0 : weights[index];
    }

    /// Lowest continuity C^k over the interior knots of a direction
    /// (degree minus the largest interior multiplicity).
    [[nodiscard]] int continuity(int dir) const {
        const auto& k = knots[dir];
        const int p = degree[dir];
        int max_mult = 0;
        std::size_t i = p + 1;
        while (i + p + 1 < k.size()) {
            std::size_t j = i;
            while (j + 1 < k.size() && k[j + 1] == k[i]) ++j;
            max_mult = std::max(max_mult, static_cast<int>(j - i + 1));
            i = j + 1;
        }
        return p - max_mult;
    }

    void validate() const {
        if (family == Family::simplex) return;
        for (int d = 0; d < Dim; ++d) {
            const auto& k = knots[d];
            const int p = degree[d];
            if (p < 1) throw DomainError("BasisSpec: degree must be >= 1");
            if (static_cast<int>(k.size()) < 2 * (p + 1))
                throw DomainError("BasisSpec: knot vector too short");
            if (!std::is_sorted(k.begin(), k.end()))
                throw DomainError("BasisSpec: knots must be nondecreasing");
            for (int i = 0; i <= p; ++i) {
                if (k[i] != k[0] || k[k.size() - 1 - i] != k.back())
                    throw DomainError("BasisSpec: knot vector must be open (end knots repeated p+1 times)");
            }
            if (k.back() <= k.front()) throw DomainError("BasisSpec: empty knot range");
        }
        if (!weights.empty()) {
            if (static_cast<int>(weights.size()) != size())
                throw InvalidWeightsError("BasisSpec: weight count does not match function count");
            for (double w : weights)
                if (!(w > 0.0)) throw InvalidWeightsError("BasisSpec: weights must be strictly positive");
        }
    }
};

/// Open knot vector on [0, elements] with unit spans. Interior knots carry
/// multiplicity degree - continuity.
inline std::vector<double> uniform_knots(int elements, int degree, int continuity) {
    if (elements < 1) throw DomainError("uniform_knots: need at least one element");
    if (continuity < 0 || continuity >= degree)
        throw DomainError("uniform_knots: continuity must lie in [0, degree)");
    const int mult = degree - continuity;
    std::vector<double> k(degree + 1, 0.0);
    for (int i = 1; i < elements; ++i)
        for (int m = 0; m < mult; ++m) k.push_back(static_cast<double>(i));
    for (int i = 0; i <= degree; ++i) k.push_back(static_cast<double>(elements));
    return k;
}

/// Greville abscissae (knot averages) of a knot vector.
inline std::vector<double> greville_abscissae(const std::vector<double>& knots, int degree) {
    const int n = static_cast<int>(knots.size()) - degree - 1;
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 1; j <= degree; ++j) s += knots[i + j];
        g[i] = s / degree;
    }
    return g;
}

/// Indices s of the nonempty knot spans [knots[s], knots[s+1]), in order.
/// These are the elements along one direction.
inline std::vector<int> nonempty_spans(const std::vector<double>& knots, int degree) {
    std::vector<int> spans;
    const int n = static_cast<int>(knots.size()) - degree - 1;
    for (int s = degree; s < n; ++s)
        if (knots[s + 1] > knots[s]) spans.push_back(s);
    return spans;
}

/// Nonzero univariate functions at a point: functions first .. first+p.
struct UnivariateEval {
    int span = 0;
    int first = 0;
    std::vector<double> values;
    std::vector<double> first_derivatives;
    std::vector<double> second_derivatives;
};

/// Evaluates the p+1 functions supported on knot span `span` at xi, which may
/// lie anywhere in the closed span (derivatives up to second order).
inline UnivariateEval eval_bspline_in_span(const std::vector<double>& knots, int p, int span,
                                           double xi) {
    constexpr int nd = 2;
    const int order = p + 1;
    std::vector<double> left(order), right(order);
    // ndu holds basis values (upper triangle + diagonal) and knot differences.
    std::vector<std::vector<double>> ndu(order, std::vector<double>(order, 0.0));
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = xi - knots[span + 1 - j];
        right[j] = knots[span + j] - xi;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    std::vector<std::vector<double>> ders(nd + 1, std::vector<double>(order, 0.0));
    for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];

    std::vector<std::vector<double>> a(2, std::vector<double>(order, 0.0));
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= nd; ++k) {
            double d = 0.0;
            const int rk = r - k, pk = p - k;
            if (pk < 0) break;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::swap(s1, s2);
        }
    }
    int factor = p;
    for (int k = 1; k <= nd; ++k) {
        for (int j = 0; j <= p; ++j) ders[k][j] *= factor;
        factor *= (p - k);
    }

    UnivariateEval out;
    out.span = span;
    out.first = span - p;
    out.values = std::move(ders[0]);
    out.first_derivatives = std::move(ders[1]);
    out.second_derivatives = std::move(ders[2]);
    return out;
}

/// Span containing xi under the half-open convention; xi equal to the last
/// knot belongs to the last nonempty span.
inline int find_span(const std::vector<double>& knots, int p, double xi) {
    const int n = static_cast<int>(knots.size()) - p - 1;
    if (!(xi >= knots[p] && xi <= knots[n]))
        throw DomainError("parametric coordinate " + std::to_string(xi) + " outside knot range [" +
                          std::to_string(knots[p]) + ", " + std::to_string(knots[n]) + "]");
    if (xi == knots[n]) {
        int s = n - 1;
        while (knots[s + 1] <= knots[s]) --s;
        return s;
    }
    const auto it = std::upper_bound(knots.begin() + p, knots.begin() + n + 1, xi);
    return static_cast<int>(it - knots.begin()) - 1;
}

/// Univariate B-spline values and derivatives along one direction of a spec.
template <int Dim>
UnivariateEval eval_bspline(const BasisSpec<Dim>& spec, int direction, double xi) {
    const auto& k = spec.knots[direction];
    const int p = spec.degree[direction];
    return eval_bspline_in_span(k, p, find_span(k, p, xi), xi);
}

/// Shape-function values with parametric first and second derivatives.
/// For tensor-product evaluations `hessians` holds the full second-derivative
/// matrix; for simplices it is identically zero.
template <int Dim>
struct BasisEval {
    std::vector<int> indices;
    std::vector<double> values;
    std::vector<Vec<Dim>> gradients;
    std::vector<Mat<Dim>> hessians;

    [[nodiscard]] std::size_t size() const { return values.size(); }
};

/// Rational basis R_a = N_a w_a / W on the given spans, derivatives with
/// respect to the knot coordinates.
template <int Dim>
BasisEval<Dim> eval_rational_in_spans(const BasisSpec<Dim>& spec, const std::array<int, Dim>& spans,
                                      const Vec<Dim>& xi) {
    std::array<UnivariateEval, Dim> uni;
    std::array<int, Dim> count{};
    int total = 1;
    for (int d = 0; d < Dim; ++d) {
        uni[d] = eval_bspline_in_span(spec.knots[d], spec.degree[d], spans[d], xi[d]);
        count[d] = spec.degree[d] + 1;
        total *= count[d];
    }

    BasisEval<Dim> out;
    out.indices.resize(total);
    out.values.resize(total);
    out.gradients.assign(total, Vec<Dim>{});
    out.hessians.assign(total, Mat<Dim>{});

    // Weighted tensor products N_a w_a and their derivatives.
    std::array<int, Dim> local{};
    for (int a = 0; a < total; ++a) {
        int rem = a;
        for (int d = 0; d < Dim; ++d) {
            local[d] = rem % count[d];
            rem /= count[d];
        }
        int global = 0, stride = 1;
        for (int d = 0; d < Dim; ++d) {
            global += (uni[d].first + local[d]) * stride;
            stride *= spec.num_functions(d);
        }
        out.indices[a] = global;
        const double w = spec.weight(global);

        double value = w;
        for (int d = 0; d < Dim; ++d) value *= uni[d].values[local[d]];
        out.values[a] = value;
        for (int i = 0; i < Dim; ++i) {
            double g = w;
            for (int d = 0; d < Dim; ++d)
                g *= (d == i) ? uni[d].first_derivatives[local[d]] : uni[d].values[local[d]];
            out.gradients[a][i] = g;
            for (int j = 0; j < Dim; ++j) {
                double h = w;
                for (int d = 0; d < Dim; ++d) {
                    if (i == j && d == i) h *= uni[d].second_derivatives[local[d]];
                    else if (d == i || d == j) h *= uni[d].first_derivatives[local[d]];
                    else h *= uni[d].values[local[d]];
                }
                out.hessians[a][i][j] = h;
            }
        }
    }

    double W = 0.0;
    Vec<Dim> Wd{};
    Mat<Dim> Wdd{};
    for (int a = 0; a < total; ++a) {
        W += out.values[a];
        for (int i = 0; i < Dim; ++i) {
            Wd[i] += out.gradients[a][i];
            for (int j = 0; j < Dim; ++j) Wdd[i][j] += out.hessians[a][i][j];
        }
    }
    if (!(W > 0.0)) throw InvalidWeightsError("eval_rational: weight function W <= 0");

    // R = N/W, R_x = N_x/W - R W_x/W, R_xy = N_xy/W - R_x W_y/W - R_y W_x/W - R W_xy/W
    for (int a = 0; a < total; ++a) {
        const double R = out.values[a] / W;
        Vec<Dim> Rd{};
        for (int i = 0; i < Dim; ++i) Rd[i] = out.gradients[a][i] / W - R * Wd[i] / W;
        Mat<Dim> Rdd{};
        for (int i = 0; i < Dim; ++i)
            for (int j = 0; j < Dim; ++j)
                Rdd[i][j] = out.hessians[a][i][j] / W - Rd[i] * Wd[j] / W - Rd[j] * Wd[i] / W -
                            R * Wdd[i][j] / W;
        out.values[a] = R;
        out.gradients[a] = Rd;
        out.hessians[a] = Rdd;
    }
    return out;
}

/// Rational basis at a point of knot space (half-open span convention).
template <int Dim>
BasisEval<Dim> eval_rational(const BasisSpec<Dim>& spec, const Vec<Dim>& xi) {
    std::array<int, Dim> spans{};
    for (int d = 0; d < Dim; ++d) spans[d] = find_span(spec.knots[d], spec.degree[d], xi[d]);
    return eval_rational_in_spans<Dim>(spec, spans, xi);
}

/// Linear simplex basis at reference coordinates xi (barycentric
/// lambda_0 = 1 - sum(xi), lambda_k = xi_k). Gradients are constant.
template <int Dim>
BasisEval<Dim> eval_simplex(const Vec<Dim>& xi, double tolerance = 1e-12) {
    double sum = 0.0;
    for (int d = 0; d < Dim; ++d) {
        if (xi[d] < -tolerance) throw DomainError("eval_simplex: point outside reference simplex");
        sum += xi[d];
    }
    if (sum > 1.0 + tolerance) throw DomainError("eval_simplex: point outside reference simplex");

    BasisEval<Dim> out;
    out.indices.resize(Dim + 1);
    std::iota(out.indices.begin(), out.indices.end(), 0);
    out.values.resize(Dim + 1);
    out.gradients.assign(Dim + 1, Vec<Dim>{});
    out.hessians.assign(Dim + 1, Mat<Dim>{});
    out.values[0] = 1.0 - sum;
    for (int d = 0; d < Dim; ++d) {
        out.values[d + 1] = xi[d];
        out.gradients[0][d] = -1.0;
        out.gradients[d + 1][d] = 1.0;
    }
    return out;
}

}  // namespace levelset
