#pragma once

// Heaviside family, scaled distances, subdomain volumes and material blending.
//
// Sign convention: phi > 0 marks the subdomain whose indicator is H = 1.

#include "levelset/errors.hpp"
#include "levelset/field.hpp"
#include "levelset/mesh.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace levelset {

/// Interface half-width alpha, in element lengths.
struct HeavisideParams {
    double alpha = 2.0;

    void validate() const {
        if (!(alpha > 0.0)) throw DomainError("HeavisideParams: alpha must be positive");
    }
};

/// 0 below zero, 1/2 at zero, 1 above.
constexpr double sharp_heaviside(double phi) {
    if (phi < 0.0) return 0.0;
    if (phi > 0.0) return 1.0;
    return 0.5;
}

/// 1/2 (1 + sin(pi phi_hat / (2 alpha))) inside |phi_hat| <= alpha, clamped
/// to 0 and 1 outside.
inline double regularized_heaviside(double phi_hat, const HeavisideParams& params) {
    const double a = params.alpha;
    if (phi_hat <= -a) return 0.0;
    if (phi_hat >= a) return 1.0;
    return 0.5 * (1.0 + std::sin(0.5 * std::numbers::pi * phi_hat / a));
}

/// d/d(phi_hat) of regularized_heaviside; vanishes outside the band.
inline double regularized_heaviside_derivative(double phi_hat, const HeavisideParams& params) {
    const double a = params.alpha;
    if (phi_hat <= -a || phi_hat >= a) return 0.0;
    return 0.25 * std::numbers::pi / a * std::cos(0.5 * std::numbers::pi * phi_hat / a);
}

/// Physical-length form with smoothing length eps_len = alpha * h.
inline double regularized_heaviside_physical(double phi, double eps_len) {
    if (!(eps_len > 0.0)) throw DomainError("regularized_heaviside_physical: eps_len must be positive");
    return regularized_heaviside(phi / eps_len, HeavisideParams{1.0});
}

/// rho0 (1 - H) + rho1 H.
inline double blend_property(double phi_hat, const HeavisideParams& params, double rho0, double rho1) {
    const double h = regularized_heaviside(phi_hat, params);
    return rho0 * (1.0 - h) + rho1 * h;
}

/// |grad_xi phi| = |grad phi . dx/dxi| at a point of element e.
template <int Dim>
double parametric_gradient_norm(const ScalarField<Dim>& phi, int e, const Vec<Dim>& ref) {
    return norm<Dim>(phi.ref_gradient(e, ref));
}

/// phi_hat = phi / h with the local directional mesh size h = |grad phi| /
/// sqrt(grad phi . G grad phi). Purely pointwise; neither continuous nor
/// monotone on non-uniform meshes.
template <int Dim>
class NaiveScaledDistance {
public:
    explicit NaiveScaledDistance(const ScalarField<Dim>& phi) : phi_(&phi) {}

    [[nodiscard]] double value(int e, const Vec<Dim>& ref) const {
        const auto& patch = phi_->patch();
        const auto b = patch.eval(e, ref);
        const auto jac = patch.jacobian(e, ref);
        const auto m = metric_from_jacobian<Dim>(jac);
        const Vec<Dim> grad = left_multiply<Dim>(phi_->ref_gradient(b), inverse<Dim>(jac));
        return phi_->value(b) / meshsize_physical_or_fallback<Dim>(grad, m);
    }

    [[nodiscard]] std::vector<double> at_quadrature() const {
        const auto& c = phi_->patch().cache();
        std::vector<double> out(c.jxw.size());
        for (std::size_t p = 0; p < out.size(); ++p) {
            const auto m = metric_from_jacobian<Dim>(c.jacobians[p]);
            out[p] = phi_->value_at(p) / meshsize_physical_or_fallback<Dim>(phi_->gradient_at(p), m);
        }
        return out;
    }

private:
    const ScalarField<Dim>* phi_;
};

template <int Dim>
NaiveScaledDistance<Dim> naive_scaled_distance(const ScalarField<Dim>& phi) {
    return NaiveScaledDistance<Dim>(phi);
}

/// (V0, V1) = (int 1 - H, int H) from phi_hat sampled at the patch's
/// quadrature points.
template <int Dim>
std::pair<double, double> subdomain_volumes(const MeshPatch<Dim>& patch, std::span<const double> phi_hat_at_qp,
                                            const HeavisideParams& params) {
    const auto& jxw = patch.cache().jxw;
    if (phi_hat_at_qp.size() != jxw.size()) throw DomainError("subdomain_volumes: sample count mismatch");
    double v0 = 0.0, v1 = 0.0;
    for (std::size_t p = 0; p < jxw.size(); ++p) {
        const double h = regularized_heaviside(phi_hat_at_qp[p], params);
        v1 += h * jxw[p];
        v0 += (1.0 - h) * jxw[p];
    }
    return {v0, v1};
}

template <int Dim>
std::pair<double, double> subdomain_volumes(const ScalarField<Dim>& phi_hat, const HeavisideParams& params) {
    const auto v = phi_hat.values_at_quadrature();
    return subdomain_volumes<Dim>(phi_hat.patch(), v, params);
}

}  // namespace levelset
