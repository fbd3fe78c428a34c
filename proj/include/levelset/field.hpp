#pragma once

#include "levelset/errors.hpp"
#include "levelset/linalg.hpp"
#include "levelset/mesh.hpp"

#include <functional>
#include <vector>

namespace levelset {

/// Coefficient vector over the basis of a mesh patch. The patch must outlive
/// the field.
template <int Dim>
class ScalarField {
public:
    ScalarField(const MeshPatch<Dim>& patch, std::vector<double> coefficients)
        : patch_(&patch), coeffs_(std::move(coefficients)) {
        if (static_cast<int>(coeffs_.size()) != patch.num_dofs())
            throw DomainError("ScalarField: coefficient count does not match basis dimension");
    }

    explicit ScalarField(const MeshPatch<Dim>& patch, double constant = 0.0)
        : patch_(&patch), coeffs_(patch.num_dofs(), constant) {}

    [[nodiscard]] const MeshPatch<Dim>& patch() const { return *patch_; }
    [[nodiscard]] const std::vector<double>& coefficients() const { return coeffs_; }
    [[nodiscard]] std::vector<double>& coefficients() { return coeffs_; }

    /// Field plus a constant (partition of unity: a coefficient-wise shift).
    [[nodiscard]] ScalarField shifted(double c) const {
        ScalarField out = *this;
        for (double& v : out.coeffs_) v += c;
        return out;
    }

    [[nodiscard]] double value(const BasisEval<Dim>& b) const {
        double s = 0.0;
        for (std::size_t a = 0; a < b.size(); ++a) s += b.values[a] * coeffs_[b.indices[a]];
        return s;
    }

    /// Gradient with respect to the element reference coordinates.
    [[nodiscard]] Vec<Dim> ref_gradient(const BasisEval<Dim>& b) const {
        Vec<Dim> g{};
        for (std::size_t a = 0; a < b.size(); ++a)
            for (int i = 0; i < Dim; ++i) g[i] += b.gradients[a][i] * coeffs_[b.indices[a]];
        return g;
    }

    [[nodiscard]] Mat<Dim> ref_hessian(const BasisEval<Dim>& b) const {
        Mat<Dim> h{};
        for (std::size_t a = 0; a < b.size(); ++a)
            for (int i = 0; i < Dim; ++i)
                for (int j = 0; j < Dim; ++j) h[i][j] += b.hessians[a][i][j] * coeffs_[b.indices[a]];
        return h;
    }

    [[nodiscard]] double value(int e, const Vec<Dim>& ref) const { return value(patch_->eval(e, ref)); }

    [[nodiscard]] Vec<Dim> ref_gradient(int e, const Vec<Dim>& ref) const {
        return ref_gradient(patch_->eval(e, ref));
    }

    /// Physical gradient at an arbitrary point of element e.
    [[nodiscard]] Vec<Dim> gradient(int e, const Vec<Dim>& ref) const {
        const auto jinv = inverse<Dim>(patch_->jacobian(e, ref));
        return left_multiply<Dim>(ref_gradient(e, ref), jinv);
    }

    // Quadrature-point access through the patch cache; p = e * nq + q.

    [[nodiscard]] double value_at(std::size_t p) const {
        const auto& c = patch_->cache();
        const int nl = c.nodes_per_element;
        const auto dofs = patch_->element_dofs(static_cast<int>(p / c.points_per_element));
        double s = 0.0;
        for (int a = 0; a < nl; ++a) s += c.values[p * nl + a] * coeffs_[dofs[a]];
        return s;
    }

    [[nodiscard]] Vec<Dim> ref_gradient_at(std::size_t p) const {
        const auto& c = patch_->cache();
        const int nl = c.nodes_per_element;
        const auto dofs = patch_->element_dofs(static_cast<int>(p / c.points_per_element));
        Vec<Dim> g{};
        for (int a = 0; a < nl; ++a)
            for (int i = 0; i < Dim; ++i) g[i] += c.ref_gradients[p * nl + a][i] * coeffs_[dofs[a]];
        return g;
    }

    [[nodiscard]] Vec<Dim> gradient_at(std::size_t p) const {
        const auto& c = patch_->cache();
        const int nl = c.nodes_per_element;
        const auto dofs = patch_->element_dofs(static_cast<int>(p / c.points_per_element));
        Vec<Dim> g{};
        for (int a = 0; a < nl; ++a)
            for (int i = 0; i < Dim; ++i) g[i] += c.gradients[p * nl + a][i] * coeffs_[dofs[a]];
        return g;
    }

    /// Values at every quadrature point of the patch.
    [[nodiscard]] std::vector<double> values_at_quadrature() const {
        std::vector<double> v(patch_->cache().jxw.size());
        for (std::size_t p = 0; p < v.size(); ++p) v[p] = value_at(p);
        return v;
    }

private:
    const MeshPatch<Dim>* patch_;
    std::vector<double> coeffs_;
};

/// Coefficients set to f at the control points. Exact for fields linear in
/// x (the geometry reproduces them); nodal interpolation on linear meshes.
template <int Dim>
ScalarField<Dim> interpolate(const MeshPatch<Dim>& patch, const std::function<double(const Vec<Dim>&)>& f) {
    std::vector<double> c(patch.num_dofs());
    const auto& pts = patch.control_points();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = f(pts[i]);
    return ScalarField<Dim>(patch, std::move(c));
}

/// Consistent mass matrix of the patch.
template <int Dim>
SparseSystem assemble_mass(const MeshPatch<Dim>& patch) {
    auto sys = patch.pattern().make_system();
    const auto& c = patch.cache();
    const int nq = c.points_per_element, nl = c.nodes_per_element;
    for (int e = 0; e < patch.num_elements(); ++e) {
        const std::size_t base = static_cast<std::size_t>(e) * nl * nl;
        for (int q = 0; q < nq; ++q) {
            const std::size_t p = static_cast<std::size_t>(e) * nq + q;
            const double* N = &c.values[p * nl];
            for (int a = 0; a < nl; ++a)
                for (int b = 0; b < nl; ++b)
                    sys.values[patch.pattern().scatter[base + a * nl + b]] += N[a] * N[b] * c.jxw[p];
        }
    }
    return sys;
}

/// L2 projection of f onto the patch space.
template <int Dim>
ScalarField<Dim> project_l2(const MeshPatch<Dim>& patch, const std::function<double(const Vec<Dim>&)>& f,
                            double rel_tol = 1e-12) {
    auto sys = assemble_mass(patch);
    const auto& c = patch.cache();
    const int nq = c.points_per_element, nl = c.nodes_per_element;
    for (int e = 0; e < patch.num_elements(); ++e) {
        const auto dofs = patch.element_dofs(e);
        for (int q = 0; q < nq; ++q) {
            const std::size_t p = static_cast<std::size_t>(e) * nq + q;
            const double fv = f(c.points[p]) * c.jxw[p];
            for (int a = 0; a < nl; ++a) sys.rhs[dofs[a]] += c.values[p * nl + a] * fv;
        }
    }
    return ScalarField<Dim>(patch, solve_spd(sys, rel_tol));
}

}  // namespace levelset
