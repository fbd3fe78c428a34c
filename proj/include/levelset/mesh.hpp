#pragma once

// Geometry: tensor-product NURBS patches and linear simplicial meshes,
// element Jacobians with respect to the element reference coordinates,
// metric tensors, directional mesh sizes and per-element quadrature caches.
//
// Reference coordinates: every tensor-product element maps its knot span
// box onto [0,1]^d, and every simplex is the unit right simplex. All
// "parametric" derivatives in the library are taken with respect to these
// coordinates, so one unit of parametric length is one element length.

#include "levelset/basis.hpp"
#include "levelset/errors.hpp"
#include "levelset/linalg.hpp"
#include "levelset/quadrature.hpp"
#include "levelset/small_matrix.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace levelset {

/// G = (dxi/dx)^T (dxi/dx) and its inverse G^-1 = (dx/dxi)(dx/dxi)^T.
template <int Dim>
struct MetricPair {
    Mat<Dim> G{};
    Mat<Dim> G_inv{};
};

template <int Dim>
MetricPair<Dim> metric_from_jacobian(const Mat<Dim>& jac) {
    const Mat<Dim> jinv = inverse<Dim>(jac);
    return {matmul<Dim>(transpose<Dim>(jinv), jinv), matmul<Dim>(jac, transpose<Dim>(jac))};
}

/// Shortest length scale of an element: the smallest singular value of dx/dxi.
template <int Dim>
double min_element_length(const MetricPair<Dim>& m) {
    return std::sqrt(std::max(0.0, symmetric_eigenvalues<Dim>(m.G_inv)[0]));
}

/// h = |grad phi| / sqrt(grad phi . G grad phi): element length along the
/// direction of a physical gradient.
template <int Dim>
double meshsize_physical(const Vec<Dim>& grad_phi, const MetricPair<Dim>& m) {
    const double g = norm<Dim>(grad_phi);
    if (!(g > 0.0)) throw DegenerateDirectionError("meshsize_physical: zero gradient");
    return g / std::sqrt(quadratic_form<Dim>(grad_phi, m.G));
}

/// h = sqrt(grad phi . G^-1 grad phi) / |grad phi|.
template <int Dim>
double meshsize_parametric(const Vec<Dim>& grad_hat_phi, const MetricPair<Dim>& m) {
    const double g = norm<Dim>(grad_hat_phi);
    if (!(g > 0.0)) throw DegenerateDirectionError("meshsize_parametric: zero gradient");
    return std::sqrt(quadratic_form<Dim>(grad_hat_phi, m.G_inv)) / g;
}

/// meshsize_physical, falling back to the element's shortest length along a
/// vanishing gradient.
template <int Dim>
double meshsize_physical_or_fallback(const Vec<Dim>& grad_phi, const MetricPair<Dim>& m) {
    if (!(norm<Dim>(grad_phi) > 0.0)) return min_element_length<Dim>(m);
    return meshsize_physical<Dim>(grad_phi, m);
}

template <int Dim>
double meshsize_parametric_or_fallback(const Vec<Dim>& grad_hat_phi, const MetricPair<Dim>& m) {
    if (!(norm<Dim>(grad_hat_phi) > 0.0)) return min_element_length<Dim>(m);
    return meshsize_parametric<Dim>(grad_hat_phi, m);
}

/// CSR structure of the dof-coupling graph with an element scatter map:
/// scatter[(e * n + a) * n + b] is the value slot of entry (dof_a, dof_b).
struct SparsityPattern {
    std::vector<std::int64_t> row_offsets;
    std::vector<int> column_indices;
    std::vector<std::int64_t> scatter;

    [[nodiscard]] SparseSystem make_system() const {
        SparseSystem s;
        s.dimension = static_cast<int>(row_offsets.size()) - 1;
        s.row_offsets = row_offsets;
        s.column_indices = column_indices;
        s.values.assign(column_indices.size(), 0.0);
        s.rhs.assign(s.dimension, 0.0);
        return s;
    }
};

/// Per quadrature point data, flattened element-major: point (e, q) has
/// index e * points_per_element + q, function a of that point has index
/// (e * points_per_element + q) * nodes_per_element + a.
template <int Dim>
struct QuadratureCache {
    int points_per_element = 0;
    int nodes_per_element = 0;
    std::vector<double> values;
    std::vector<Vec<Dim>> ref_gradients;
    std::vector<Vec<Dim>> gradients;
    std::vector<Mat<Dim>> jacobians;
    std::vector<Mat<Dim>> inverse_jacobians;
    std::vector<double> jxw;
    std::vector<Vec<Dim>> points;
};

/// Immutable discretized domain: basis, control points (or nodes), element
/// connectivity, quadrature and the caches derived from them.
template <int Dim>
class MeshPatch {
public:
    /// Tensor-product NURBS patch; control points in x-fastest order. `box`
    /// marks a patch whose geometry is affine in knot space per direction
    /// over that axis-aligned box (enables locate()).
    MeshPatch(BasisSpec<Dim> basis, std::vector<Vec<Dim>> control_points,
              std::optional<std::pair<Vec<Dim>, Vec<Dim>>> box = std::nullopt)
        : basis_(std::move(basis)), points_(std::move(control_points)), box_(std::move(box)) {
        basis_.validate();
        if (basis_.family != Family::tensor_product)
            throw DomainError("MeshPatch: tensor constructor needs a tensor-product basis");
        if (static_cast<int>(points_.size()) != basis_.size())
            throw DomainError("MeshPatch: control point count does not match basis size");
        nodes_per_element_ = 1;
        std::array<int, Dim> qcount{};
        for (int d = 0; d < Dim; ++d) {
            spans_[d] = nonempty_spans(basis_.knots[d], basis_.degree[d]);
            counts_[d] = static_cast<int>(spans_[d].size());
            nodes_per_element_ *= basis_.degree[d] + 1;
            qcount[d] = basis_.degree[d] + 1;
        }
        quadrature_ = tensor_gauss<Dim>(qcount);
        int ne = 1;
        for (int d = 0; d < Dim; ++d) ne *= counts_[d];
        num_elements_ = ne;
        connectivity_.resize(static_cast<std::size_t>(ne) * nodes_per_element_);
        for (int e = 0; e < ne; ++e) {
            const auto idx = eval(e, Vec<Dim>{}).indices;  // ordering only
            std::copy(idx.begin(), idx.end(), connectivity_.begin() + e * nodes_per_element_);
        }
        finalize();
    }

    /// Linear simplicial mesh. Cells are reoriented to positive Jacobian.
    MeshPatch(std::vector<Vec<Dim>> nodes, std::vector<std::array<int, Dim + 1>> cells)
        : points_(std::move(nodes)) {
        basis_.family = Family::simplex;
        basis_.degree.fill(1);
        nodes_per_element_ = Dim + 1;
        num_elements_ = static_cast<int>(cells.size());
        if (num_elements_ == 0) throw DomainError("MeshPatch: empty simplex mesh");
        quadrature_ = simplex_rule<Dim>();
        connectivity_.reserve(cells.size() * (Dim + 1));
        for (auto cell : cells) {
            for (int v : cell)
                if (v < 0 || v >= static_cast<int>(points_.size()))
                    throw DomainError("MeshPatch: cell references missing node");
            if (determinant<Dim>(simplex_jacobian(cell)) < 0.0) std::swap(cell[Dim - 1], cell[Dim]);
            connectivity_.insert(connectivity_.end(), cell.begin(), cell.end());
        }
        finalize();
    }

    [[nodiscard]] Family family() const { return basis_.family; }
    [[nodiscard]] const BasisSpec<Dim>& basis() const { return basis_; }
    [[nodiscard]] int num_dofs() const { return static_cast<int>(points_.size()); }
    [[nodiscard]] int num_elements() const { return num_elements_; }
    [[nodiscard]] int nodes_per_element() const { return nodes_per_element_; }
    [[nodiscard]] const std::vector<Vec<Dim>>& control_points() const { return points_; }
    [[nodiscard]] const QuadratureRule<Dim>& quadrature() const { return quadrature_; }
    [[nodiscard]] const QuadratureCache<Dim>& cache() const { return cache_; }
    [[nodiscard]] const SparsityPattern& pattern() const { return pattern_; }
    [[nodiscard]] double measure() const { return measure_; }
    /// Smallest element length over the mesh (at element centres).
    [[nodiscard]] double min_length() const { return min_length_; }

    [[nodiscard]] std::span<const int> element_dofs(int e) const {
        return {connectivity_.data() + static_cast<std::size_t>(e) * nodes_per_element_,
                static_cast<std::size_t>(nodes_per_element_)};
    }

    /// Elements per direction (tensor-product patches only).
    [[nodiscard]] const std::array<int, Dim>& element_counts() const { return counts_; }

    [[nodiscard]] std::array<int, Dim> element_grid_index(int e) const {
        std::array<int, Dim> g{};
        for (int d = 0; d < Dim; ++d) {
            g[d] = e % counts_[d];
            e /= counts_[d];
        }
        return g;
    }

    [[nodiscard]] int element_at(const std::array<int, Dim>& g) const {
        int e = 0, stride = 1;
        for (int d = 0; d < Dim; ++d) {
            e += g[d] * stride;
            stride *= counts_[d];
        }
        return e;
    }

    /// Knot-space box of a tensor-product element along direction d.
    [[nodiscard]] std::pair<double, double> element_knot_range(int e, int d) const {
        const int s = spans_[d][element_grid_index(e)[d]];
        return {basis_.knots[d][s], basis_.knots[d][s + 1]};
    }

    /// Basis on element e at reference coordinates, derivatives with respect
    /// to the reference coordinates. Local ordering matches element_dofs(e).
    [[nodiscard]] BasisEval<Dim> eval(int e, const Vec<Dim>& ref) const {
        if (basis_.family == Family::simplex) {
            auto b = eval_simplex<Dim>(ref, 1e-9);
            const auto dofs = element_dofs(e);
            for (int a = 0; a <= Dim; ++a) b.indices[a] = dofs[a];
            return b;
        }
        const auto g = element_grid_index(e);
        std::array<int, Dim> spans{};
        Vec<Dim> xi{};
        Vec<Dim> len{};
        for (int d = 0; d < Dim; ++d) {
            if (ref[d] < -1e-9 || ref[d] > 1.0 + 1e-9)
                throw DomainError("MeshPatch::eval: reference point outside element");
            spans[d] = spans_[d][g[d]];
            const double k0 = basis_.knots[d][spans[d]];
            len[d] = basis_.knots[d][spans[d] + 1] - k0;
            xi[d] = k0 + std::clamp(ref[d], 0.0, 1.0) * len[d];
        }
        auto b = eval_rational_in_spans<Dim>(basis_, spans, xi);
        for (std::size_t a = 0; a < b.size(); ++a) {
            for (int i = 0; i < Dim; ++i) {
                b.gradients[a][i] *= len[i];
                for (int j = 0; j < Dim; ++j) b.hessians[a][i][j] *= len[i] * len[j];
            }
        }
        return b;
    }

    /// Physical point of reference coordinates on element e.
    [[nodiscard]] Vec<Dim> map(int e, const Vec<Dim>& ref) const { return map(eval(e, ref)); }

    [[nodiscard]] Vec<Dim> map(const BasisEval<Dim>& b) const {
        Vec<Dim> x{};
        for (std::size_t a = 0; a < b.size(); ++a)
            for (int i = 0; i < Dim; ++i) x[i] += b.values[a] * points_[b.indices[a]][i];
        return x;
    }

    /// dx/dxi on element e; throws InvertedElementError when det <= 0.
    [[nodiscard]] Mat<Dim> jacobian(int e, const Vec<Dim>& ref) const {
        return checked_jacobian(e, eval(e, ref));
    }

    [[nodiscard]] MetricPair<Dim> metric(int e, const Vec<Dim>& ref) const {
        return metric_from_jacobian<Dim>(jacobian(e, ref));
    }

    /// Reference centre of an element.
    [[nodiscard]] Vec<Dim> element_centre() const {
        Vec<Dim> c{};
        c.fill(basis_.family == Family::simplex ? 1.0 / (Dim + 1) : 0.5);
        return c;
    }

    /// Structured patches built on an axis-aligned box keep an affine relation
    /// between knot coordinates and physical coordinates per direction.
    [[nodiscard]] bool is_affine_box() const { return box_.has_value(); }
    [[nodiscard]] const std::pair<Vec<Dim>, Vec<Dim>>& box() const {
        if (!box_) throw DomainError("MeshPatch: not an axis-aligned structured patch");
        return *box_;
    }

    /// Element and reference coordinates of a physical point (affine-box
    /// patches only).
    [[nodiscard]] std::pair<int, Vec<Dim>> locate(const Vec<Dim>& x) const {
        const auto& [lo, hi] = box();
        std::array<int, Dim> g{};
        Vec<Dim> ref{};
        for (int d = 0; d < Dim; ++d) {
            const auto& k = basis_.knots[d];
            const double k0 = k.front(), k1 = k.back();
            const double u = (x[d] - lo[d]) / (hi[d] - lo[d]);
            if (u < -1e-12 || u > 1.0 + 1e-12) throw DomainError("MeshPatch::locate: point outside box");
            const double xi = k0 + std::clamp(u, 0.0, 1.0) * (k1 - k0);
            const int s = find_span(k, basis_.degree[d], xi);
            const auto it = std::lower_bound(spans_[d].begin(), spans_[d].end(), s);
            g[d] = static_cast<int>(it - spans_[d].begin());
            ref[d] = std::clamp((xi - k[s]) / (k[s + 1] - k[s]), 0.0, 1.0);
        }
        return {element_at(g), ref};
    }

private:
    Mat<Dim> simplex_jacobian(const std::array<int, Dim + 1>& cell) const {
        Mat<Dim> j{};
        for (int c = 0; c < Dim; ++c)
            for (int i = 0; i < Dim; ++i) j[i][c] = points_[cell[c + 1]][i] - points_[cell[0]][i];
        return j;
    }

    Mat<Dim> checked_jacobian(int e, const BasisEval<Dim>& b) const {
        Mat<Dim> j{};
        for (std::size_t a = 0; a < b.size(); ++a)
            for (int i = 0; i < Dim; ++i)
                for (int k = 0; k < Dim; ++k) j[i][k] += points_[b.indices[a]][i] * b.gradients[a][k];
        const double det = determinant<Dim>(j);
        if (!(det > 0.0)) throw InvertedElementError(e, det);
        return j;
    }

    void finalize() {
        build_cache();
        build_pattern();
    }

    void build_cache() {
        const int nq = quadrature_.size();
        const int nl = nodes_per_element_;
        const std::size_t npts = static_cast<std::size_t>(num_elements_) * nq;
        cache_.points_per_element = nq;
        cache_.nodes_per_element = nl;
        cache_.values.resize(npts * nl);
        cache_.ref_gradients.resize(npts * nl);
        cache_.gradients.resize(npts * nl);
        cache_.jacobians.resize(npts);
        cache_.inverse_jacobians.resize(npts);
        cache_.jxw.resize(npts);
        cache_.points.resize(npts);
        measure_ = 0.0;
        min_length_ = std::numeric_limits<double>::infinity();

        // Simplex bases are the same on every element.
        std::optional<BasisEval<Dim>> simplex_ref;
        for (int e = 0; e < num_elements_; ++e) {
            {
                const auto m = metric_from_jacobian<Dim>(jacobian(e, element_centre()));
                min_length_ = std::min(min_length_, min_element_length<Dim>(m));
            }
            for (int q = 0; q < nq; ++q) {
                const std::size_t p = static_cast<std::size_t>(e) * nq + q;
                const auto b = eval(e, quadrature_.points[q]);
                const Mat<Dim> j = checked_jacobian(e, b);
                const Mat<Dim> jinv = inverse<Dim>(j);
                cache_.jacobians[p] = j;
                cache_.inverse_jacobians[p] = jinv;
                cache_.jxw[p] = determinant<Dim>(j) * quadrature_.weights[q];
                cache_.points[p] = map(b);
                measure_ += cache_.jxw[p];
                for (int a = 0; a < nl; ++a) {
                    cache_.values[p * nl + a] = b.values[a];
                    cache_.ref_gradients[p * nl + a] = b.gradients[a];
                    // grad N = J^-T grad_xi N
                    cache_.gradients[p * nl + a] = left_multiply<Dim>(b.gradients[a], jinv);
                }
            }
        }
    }

    void build_pattern() {
        const int n = num_dofs();
        const int nl = nodes_per_element_;
        std::vector<std::vector<int>> rows(n);
        for (int e = 0; e < num_elements_; ++e) {
            const auto dofs = element_dofs(e);
            for (int a : dofs)
                for (int b : dofs) rows[a].push_back(b);
        }
        pattern_.row_offsets.assign(n + 1, 0);
        for (int i = 0; i < n; ++i) {
            auto& r = rows[i];
            std::sort(r.begin(), r.end());
            r.erase(std::unique(r.begin(), r.end()), r.end());
            pattern_.row_offsets[i + 1] = pattern_.row_offsets[i] + static_cast<std::int64_t>(r.size());
        }
        pattern_.column_indices.reserve(pattern_.row_offsets.back());
        for (const auto& r : rows)
            pattern_.column_indices.insert(pattern_.column_indices.end(), r.begin(), r.end());

        pattern_.scatter.resize(static_cast<std::size_t>(num_elements_) * nl * nl);
        for (int e = 0; e < num_elements_; ++e) {
            const auto dofs = element_dofs(e);
            for (int a = 0; a < nl; ++a) {
                const auto begin = pattern_.column_indices.begin() + pattern_.row_offsets[dofs[a]];
                const auto end = pattern_.column_indices.begin() + pattern_.row_offsets[dofs[a] + 1];
                for (int b = 0; b < nl; ++b) {
                    const auto it = std::lower_bound(begin, end, dofs[b]);
                    pattern_.scatter[(static_cast<std::size_t>(e) * nl + a) * nl + b] =
                        it - pattern_.column_indices.begin();
                }
            }
        }
    }

    BasisSpec<Dim> basis_;
    std::vector<Vec<Dim>> points_;
    std::array<std::vector<int>, Dim> spans_{};
    std::array<int, Dim> counts_{};
    int num_elements_ = 0;
    int nodes_per_element_ = 0;
    std::vector<int> connectivity_;
    QuadratureRule<Dim> quadrature_;
    QuadratureCache<Dim> cache_;
    SparsityPattern pattern_;
    double measure_ = 0.0;
    double min_length_ = 0.0;
    std::optional<std::pair<Vec<Dim>, Vec<Dim>>> box_;
};

namespace detail {

template <int Dim>
std::vector<Vec<Dim>> box_control_points(const BasisSpec<Dim>& basis, const Vec<Dim>& lo,
                                         const Vec<Dim>& hi) {
    std::array<std::vector<double>, Dim> coords;
    for (int d = 0; d < Dim; ++d) {
        const auto& k = basis.knots[d];
        const auto g = greville_abscissae(k, basis.degree[d]);
        coords[d].resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            coords[d][i] = lo[d] + (hi[d] - lo[d]) * (g[i] - k.front()) / (k.back() - k.front());
    }
    std::vector<Vec<Dim>> pts(basis.size());
    for (int a = 0; a < basis.size(); ++a) {
        int rem = a;
        for (int d = 0; d < Dim; ++d) {
            const int n = basis.num_functions(d);
            pts[a][d] = coords[d][rem % n];
            rem /= n;
        }
    }
    return pts;
}

}  // namespace detail

/// Uniform tensor-product patch on [lo, hi] with unit knot spans.
template <int Dim>
MeshPatch<Dim> build_structured(const Vec<Dim>& lo, const Vec<Dim>& hi,
                                const std::array<int, Dim>& counts, int degree, int continuity) {
    BasisSpec<Dim> basis;
    for (int d = 0; d < Dim; ++d) {
        if (counts[d] < 1) throw DomainError("build_structured: element count must be >= 1");
        basis.degree[d] = degree;
        basis.knots[d] = uniform_knots(counts[d], degree, continuity);
    }
    auto pts = detail::box_control_points<Dim>(basis, lo, hi);
    return MeshPatch<Dim>(std::move(basis), std::move(pts), std::make_pair(lo, hi));
}

/// Strictly increasing map of [0,1] onto itself.
using GradingLaw = std::function<double(double)>;

inline GradingLaw identity_law() {
    return [](double s) { return s; };
}

inline GradingLaw power_law(double exponent) {
    return [exponent](double s) { return std::pow(s, exponent); };
}

/// Element widths growing by `ratio` from one element to the next when
/// applied to a patch with `elements` uniform elements.
inline GradingLaw geometric_law(double ratio, int elements) {
    if (std::abs(ratio - 1.0) < 1e-14) return identity_law();
    const double denom = std::pow(ratio, elements) - 1.0;
    return [ratio, elements, denom](double s) {
        return (std::pow(ratio, elements * s) - 1.0) / denom;
    };
}

/// Piecewise-linear law sending i/n to the cumulative sum of the first i
/// widths (normalised to total 1).
inline GradingLaw widths_law(std::vector<double> widths) {
    double total = 0.0;
    for (double w : widths) total += w;
    std::vector<double> cum{0.0};
    for (double w : widths) cum.push_back(cum.back() + w / total);
    cum.back() = 1.0;
    return [cum = std::move(cum)](double s) {
        const int n = static_cast<int>(cum.size()) - 1;
        const double t = std::clamp(s, 0.0, 1.0) * n;
        const int i = std::min(static_cast<int>(t), n - 1);
        return cum[i] + (t - i) * (cum[i + 1] - cum[i]);
    };
}

namespace detail {

inline void check_law(const GradingLaw& law) {
    constexpr int samples = 2000;
    if (std::abs(law(0.0)) > 1e-12 || std::abs(law(1.0) - 1.0) > 1e-12)
        throw InvalidGradingError("grading law must map 0 to 0 and 1 to 1");
    double prev = law(0.0);
    for (int i = 1; i <= samples; ++i) {
        const double v = law(static_cast<double>(i) / samples);
        if (!(v > prev)) throw InvalidGradingError("grading law must be strictly increasing");
        prev = v;
    }
}

}  // namespace detail

/// Regrades an affine-box patch: knots are remapped through the law along
/// each direction and control points are placed at the Greville abscissae of
/// the new knots, so the geometry stays affine in knot space. The element
/// structure (counts, degree, continuity) is unchanged; element widths follow
/// the law.
template <int Dim>
MeshPatch<Dim> grade_structured(const MeshPatch<Dim>& patch, const std::array<GradingLaw, Dim>& laws) {
    const auto [lo, hi] = patch.box();
    BasisSpec<Dim> basis = patch.basis();
    for (int d = 0; d < Dim; ++d) {
        detail::check_law(laws[d]);
        auto& k = basis.knots[d];
        const double k0 = k.front(), k1 = k.back();
        for (auto& v : k) {
            const double u = (v - k0) / (k1 - k0);
            v = (u <= 0.0) ? k0 : (u >= 1.0) ? k1 : k0 + (k1 - k0) * laws[d](u);
        }
        // Validate strict growth of nonempty spans after remapping.
        for (std::size_t i = 1; i < k.size(); ++i)
            if (k[i] < k[i - 1]) throw InvalidGradingError("grading produced decreasing knots");
    }
    auto pts = detail::box_control_points<Dim>(basis, lo, hi);
    return MeshPatch<Dim>(std::move(basis), std::move(pts), std::make_pair(lo, hi));
}

template <int Dim>
MeshPatch<Dim> grade_structured(const MeshPatch<Dim>& patch, const GradingLaw& law) {
    std::array<GradingLaw, Dim> laws;
    laws.fill(law);
    return grade_structured<Dim>(patch, laws);
}

enum class SplitRule {
    /// Two triangles per quad; the right angle of each triangle sits on a
    /// grid corner so both legs are grid edges.
    diagonal,
    /// Four triangles per quad around an added centre node.
    crossed,
};

/// Splits a linear quadrilateral patch into triangles. With the diagonal
/// rule the node set is preserved.
inline MeshPatch<2> triangulate(const MeshPatch<2>& patch, SplitRule rule = SplitRule::diagonal) {
    if (patch.family() != Family::tensor_product || patch.basis().degree[0] != 1 ||
        patch.basis().degree[1] != 1)
        throw DomainError("triangulate: needs a linear quadrilateral patch");
    std::vector<Vec<2>> nodes = patch.control_points();
    std::vector<std::array<int, 3>> cells;
    for (int e = 0; e < patch.num_elements(); ++e) {
        const auto d = patch.element_dofs(e);  // (0,0) (1,0) (0,1) (1,1)
        const int n00 = d[0], n10 = d[1], n01 = d[2], n11 = d[3];
        if (rule == SplitRule::diagonal) {
            cells.push_back({n10, n11, n00});
            cells.push_back({n01, n00, n11});
        } else {
            Vec<2> c{};
            for (int v : {n00, n10, n01, n11})
                for (int i = 0; i < 2; ++i) c[i] += 0.25 * nodes[v][i];
            const int nc = static_cast<int>(nodes.size());
            nodes.push_back(c);
            cells.push_back({nc, n00, n10});
            cells.push_back({nc, n10, n11});
            cells.push_back({nc, n11, n01});
            cells.push_back({nc, n01, n00});
        }
    }
    return MeshPatch<2>(std::move(nodes), std::move(cells));
}

}  // namespace levelset
