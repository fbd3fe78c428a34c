#pragma once

// Redistancing without an Eikonal solve: four ways of turning a convected
// level set phi into a distance measured in element lengths, phi_hat, with
// |grad_xi phi_hat| ~ 1.
//
//   direct                     phi_hat = phi / |grad_xi phi|, pointwise
//   projected redistance       phi_hat = P(phi / |grad_xi phi|)
//   projected scaling          eps = P(1 / |grad_xi phi|), phi_hat = phi eps
//   projected inverse scaling  eps = P(|grad_xi phi|),     phi_hat = phi / eps
//
// P solves (w, u) + kappa_d (grad_xi w, grad_xi u) = (w, f) over the whole
// domain with natural boundary conditions.

#include "levelset/errors.hpp"
#include "levelset/field.hpp"
#include "levelset/linalg.hpp"
#include "levelset/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace levelset {

enum class Alternative {
    direct,
    projected_redistance,
    projected_scaling,
    projected_inverse_scaling,
};

inline constexpr Alternative all_alternatives[] = {Alternative::direct, Alternative::projected_redistance,
                                                   Alternative::projected_scaling,
                                                   Alternative::projected_inverse_scaling};

/// Short name used by the CLI and in output files.
inline std::string_view alternative_name(Alternative a) {
    switch (a) {
        case Alternative::direct: return "direct";
        case Alternative::projected_redistance: return "proj-redist";
        case Alternative::projected_scaling: return "proj-scale";
        case Alternative::projected_inverse_scaling: return "proj-inv-scale";
    }
    return "?";
}

inline Alternative parse_alternative(std::string_view name) {
    for (Alternative a : all_alternatives)
        if (alternative_name(a) == name) return a;
    throw DomainError("unknown redistancing alternative '" + std::string(name) + "'");
}

/// What the scaling alternatives do when the projected eps falls below its
/// floor at a quadrature point.
enum class PositivityPolicy {
    /// Throw PositivityError with the location.
    error,
    /// Evaluate with max(eps, floor) everywhere; the sign of phi is kept.
    clamp,
};

struct RedistanceParams {
    Alternative alternative = Alternative::projected_inverse_scaling;
    double kappa_d = 0.0;
    /// Gradient floor, relative to the mean |grad_xi phi| over the patch.
    double delta = 1e-8;
    double solve_tol = 1e-12;
    PositivityPolicy positivity = PositivityPolicy::error;

    void validate() const {
        if (!(kappa_d >= 0.0)) throw DomainError("RedistanceParams: kappa_d must be nonnegative");
        if (!(delta > 0.0)) throw DomainError("RedistanceParams: delta must be positive");
    }
};

namespace detail {

/// Absolute floor for |grad_xi phi|: delta times its mean over the
/// quadrature points (delta itself for a constant field).
template <int Dim>
double gradient_floor(const ScalarField<Dim>& phi, double delta) {
    const std::size_t n = phi.patch().cache().jxw.size();
    double sum = 0.0;
    for (std::size_t p = 0; p < n; ++p) sum += norm<Dim>(phi.ref_gradient_at(p));
    const double mean = sum / static_cast<double>(n);
    return mean > 0.0 ? delta * mean : delta;
}

template <int Dim>
std::vector<double> clamped_gradient_norms(const ScalarField<Dim>& phi, double floor) {
    std::vector<double> g(phi.patch().cache().jxw.size());
    for (std::size_t p = 0; p < g.size(); ++p) g[p] = std::max(norm<Dim>(phi.ref_gradient_at(p)), floor);
    return g;
}

}  // namespace detail

/// Right-hand side (w, f) from integrand samples at the quadrature points.
template <int Dim>
std::vector<double> projection_rhs(const MeshPatch<Dim>& patch, std::span<const double> integrand_at_qp) {
    const auto& c = patch.cache();
    if (integrand_at_qp.size() != c.jxw.size()) throw DomainError("projection_rhs: sample count mismatch");
    const int nq = c.points_per_element, nl = c.nodes_per_element;
    std::vector<double> rhs(patch.num_dofs(), 0.0);
    for (int e = 0; e < patch.num_elements(); ++e) {
        const auto dofs = patch.element_dofs(e);
        for (int q = 0; q < nq; ++q) {
            const std::size_t p = static_cast<std::size_t>(e) * nq + q;
            const double fw = integrand_at_qp[p] * c.jxw[p];
            for (int a = 0; a < nl; ++a) rhs[dofs[a]] += c.values[p * nl + a] * fw;
        }
    }
    return rhs;
}

/// Mass plus kappa_d times the stiffness in reference coordinates, with the
/// right-hand side of the given integrand. Symmetric positive definite.
template <int Dim>
SparseSystem assemble_projection(const MeshPatch<Dim>& patch, std::span<const double> integrand_at_qp,
                                 double kappa_d) {
    if (!(kappa_d >= 0.0)) throw DomainError("assemble_projection: kappa_d must be nonnegative");
    auto sys = patch.pattern().make_system();
    const auto& c = patch.cache();
    const auto& scatter = patch.pattern().scatter;
    const int nq = c.points_per_element, nl = c.nodes_per_element;
    for (int e = 0; e < patch.num_elements(); ++e) {
        const std::size_t base = static_cast<std::size_t>(e) * nl * nl;
        for (int q = 0; q < nq; ++q) {
            const std::size_t p = static_cast<std::size_t>(e) * nq + q;
            const double* N = &c.values[p * nl];
            const Vec<Dim>* dN = &c.ref_gradients[p * nl];
            for (int a = 0; a < nl; ++a)
                for (int b = 0; b < nl; ++b)
                    sys.values[scatter[base + a * nl + b]] +=
                        (N[a] * N[b] + kappa_d * dot<Dim>(dN[a], dN[b])) * c.jxw[p];
        }
    }
    sys.rhs = projection_rhs<Dim>(patch, integrand_at_qp);
    return sys;
}

template <int Dim>
SparseSystem assemble_projection(const MeshPatch<Dim>& patch,
                                 const std::function<double(const Vec<Dim>&)>& integrand, double kappa_d) {
    const auto& pts = patch.cache().points;
    std::vector<double> f(pts.size());
    for (std::size_t p = 0; p < f.size(); ++p) f[p] = integrand(pts[p]);
    return assemble_projection<Dim>(patch, f, kappa_d);
}

/// phi_hat(phi + s) at the quadrature points is base + s * slope for every
/// alternative: a constant shift leaves grad_xi phi unchanged.
struct ShiftResponse {
    std::vector<double> base;
    std::vector<double> slope;
};

/// Result of a redistancing alternative: evaluable anywhere on the patch.
/// `aux` is phi_hat itself for projected redistance and the scaling eps for
/// the two scaling alternatives; `slope` (projected redistance only) is
/// P(1 / |grad_xi phi|), the response of phi_hat to a shift of phi.
template <int Dim>
class ScaledDistance {
public:
    ScaledDistance(Alternative alternative, ScalarField<Dim> phi, std::optional<ScalarField<Dim>> aux,
                   std::optional<ScalarField<Dim>> slope, double floor, double eps_clamp = 0.0,
                   std::size_t clamped_points = 0)
        : alt_(alternative), phi_(std::move(phi)), aux_(std::move(aux)), slope_(std::move(slope)),
          floor_(floor), eps_clamp_(eps_clamp), clamped_(clamped_points) {}

    [[nodiscard]] Alternative alternative() const { return alt_; }
    [[nodiscard]] const ScalarField<Dim>& phi() const { return phi_; }
    [[nodiscard]] const std::optional<ScalarField<Dim>>& aux() const { return aux_; }
    [[nodiscard]] double gradient_floor() const { return floor_; }
    /// Quadrature points whose eps was raised to the floor (clamp policy).
    [[nodiscard]] std::size_t clamped_points() const { return clamped_; }

    [[nodiscard]] double value(int e, const Vec<Dim>& ref) const {
        const auto b = phi_.patch().eval(e, ref);
        const double f = phi_.value(b);
        switch (alt_) {
            case Alternative::direct:
                return f / std::max(norm<Dim>(phi_.ref_gradient(b)), floor_);
            case Alternative::projected_redistance: return aux_->value(b);
            case Alternative::projected_scaling: return f * eps(aux_->value(b));
            case Alternative::projected_inverse_scaling: return f / eps(aux_->value(b));
        }
        return 0.0;
    }

    /// Gradient of phi_hat with respect to the reference coordinates.
    [[nodiscard]] Vec<Dim> ref_gradient(int e, const Vec<Dim>& ref) const {
        const auto b = phi_.patch().eval(e, ref);
        const double f = phi_.value(b);
        const Vec<Dim> df = phi_.ref_gradient(b);
        Vec<Dim> out{};
        switch (alt_) {
            case Alternative::direct: {
                const double g = norm<Dim>(df);
                if (g <= floor_) {
                    for (int i = 0; i < Dim; ++i) out[i] = df[i] / floor_;
                    break;
                }
                // grad g = H grad phi / g
                const Vec<Dim> dg = matvec<Dim>(phi_.ref_hessian(b), df);
                for (int i = 0; i < Dim; ++i) out[i] = df[i] / g - f * dg[i] / (g * g * g);
                break;
            }
            case Alternative::projected_redistance: out = aux_->ref_gradient(b); break;
            case Alternative::projected_scaling: {
                const double raw = aux_->value(b), e = eps(raw);
                const Vec<Dim> de = raw == e ? aux_->ref_gradient(b) : Vec<Dim>{};
                for (int i = 0; i < Dim; ++i) out[i] = e * df[i] + f * de[i];
                break;
            }
            case Alternative::projected_inverse_scaling: {
                const double raw = aux_->value(b), e = eps(raw);
                const Vec<Dim> de = raw == e ? aux_->ref_gradient(b) : Vec<Dim>{};
                for (int i = 0; i < Dim; ++i) out[i] = df[i] / e - f * de[i] / (e * e);
                break;
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<double> at_quadrature() const {
        const auto r = shift_response();
        return r.base;
    }

    [[nodiscard]] ShiftResponse shift_response() const {
        const std::size_t n = phi_.patch().cache().jxw.size();
        ShiftResponse r{std::vector<double>(n), std::vector<double>(n)};
        for (std::size_t p = 0; p < n; ++p) {
            const double f = phi_.value_at(p);
            switch (alt_) {
                case Alternative::direct: {
                    const double g = std::max(norm<Dim>(phi_.ref_gradient_at(p)), floor_);
                    r.base[p] = f / g;
                    r.slope[p] = 1.0 / g;
                    break;
                }
                case Alternative::projected_redistance:
                    r.base[p] = aux_->value_at(p);
                    r.slope[p] = slope_->value_at(p);
                    break;
                case Alternative::projected_scaling: {
                    const double e = eps(aux_->value_at(p));
                    r.base[p] = f * e;
                    r.slope[p] = e;
                    break;
                }
                case Alternative::projected_inverse_scaling: {
                    const double e = eps(aux_->value_at(p));
                    r.base[p] = f / e;
                    r.slope[p] = 1.0 / e;
                    break;
                }
            }
        }
        return r;
    }

    /// The scaled distance of phi + s, without redoing any projection.
    [[nodiscard]] ScaledDistance shifted(double s) const {
        ScaledDistance out = *this;
        out.phi_ = phi_.shifted(s);
        if (alt_ == Alternative::projected_redistance) {
            auto& c = out.aux_->coefficients();
            const auto& k = slope_->coefficients();
            for (std::size_t i = 0; i < c.size(); ++i) c[i] += s * k[i];
        }
        return out;
    }

private:
    [[nodiscard]] double eps(double raw) const { return std::max(raw, eps_clamp_); }

    Alternative alt_;
    ScalarField<Dim> phi_;
    std::optional<ScalarField<Dim>> aux_;
    std::optional<ScalarField<Dim>> slope_;
    double floor_;
    double eps_clamp_;
    std::size_t clamped_;
};

template <int Dim>
ScaledDistance<Dim> direct_redistance(const ScalarField<Dim>& phi, const RedistanceParams& params) {
    params.validate();
    return ScaledDistance<Dim>(Alternative::direct, phi, std::nullopt, std::nullopt,
                               detail::gradient_floor(phi, params.delta));
}

template <int Dim>
ScaledDistance<Dim> projected_redistance(const ScalarField<Dim>& phi, const RedistanceParams& params) {
    params.validate();
    const auto& patch = phi.patch();
    const double floor = detail::gradient_floor(phi, params.delta);
    const auto g = detail::clamped_gradient_norms(phi, floor);
    std::vector<double> f(g.size()), inv(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) {
        inv[p] = 1.0 / g[p];
        f[p] = phi.value_at(p) * inv[p];
    }
    auto sys = assemble_projection<Dim>(patch, f, params.kappa_d);
    ScalarField<Dim> hat(patch, solve_spd(sys, params.solve_tol));
    sys.rhs = projection_rhs<Dim>(patch, inv);
    ScalarField<Dim> slope(patch, solve_spd(sys, params.solve_tol));
    return ScaledDistance<Dim>(Alternative::projected_redistance, phi, std::move(hat), std::move(slope), floor);
}

namespace detail {

/// Projects the integrand into eps and applies the positivity policy with
/// floor delta * mean(integrand).
template <int Dim>
ScaledDistance<Dim> scaling_alternative(Alternative alt, const ScalarField<Dim>& phi, const std::vector<double>& f,
                                        double gradient_floor, const RedistanceParams& params) {
    const auto& patch = phi.patch();
    const auto sys = assemble_projection<Dim>(patch, f, params.kappa_d);
    ScalarField<Dim> eps(patch, solve_spd(sys, params.solve_tol));
    double mean = 0.0;
    for (double v : f) mean += v;
    const double floor = params.delta * mean / static_cast<double>(f.size());
    const int nq = patch.cache().points_per_element;
    std::size_t clamped = 0;
    for (std::size_t p = 0; p < f.size(); ++p) {
        const double v = eps.value_at(p);
        if (v >= floor) continue;
        if (params.positivity == PositivityPolicy::error)
            throw PositivityError(static_cast<int>(p / nq), static_cast<int>(p % nq), v, floor);
        ++clamped;
    }
    const double clamp = params.positivity == PositivityPolicy::clamp ? floor : 0.0;
    return ScaledDistance<Dim>(alt, phi, std::move(eps), std::nullopt, gradient_floor, clamp, clamped);
}

}  // namespace detail

/// eps = P(1 / |grad_xi phi|). Positivity as for projected_inverse_scaling,
/// with the floor taken relative to the mean of 1 / |grad_xi phi|.
template <int Dim>
ScaledDistance<Dim> projected_scaling(const ScalarField<Dim>& phi, const RedistanceParams& params) {
    params.validate();
    const double floor = detail::gradient_floor(phi, params.delta);
    auto f = detail::clamped_gradient_norms(phi, floor);
    for (double& v : f) v = 1.0 / v;
    return detail::scaling_alternative(Alternative::projected_scaling, phi, f, floor, params);
}

/// eps = P(|grad_xi phi|). When eps falls below delta times the mean
/// |grad_xi phi| at a quadrature point, throws PositivityError (default) or
/// clamps, per params.positivity.
template <int Dim>
ScaledDistance<Dim> projected_inverse_scaling(const ScalarField<Dim>& phi, const RedistanceParams& params) {
    params.validate();
    const double floor = detail::gradient_floor(phi, params.delta);
    const auto f = detail::clamped_gradient_norms(phi, floor);
    return detail::scaling_alternative(Alternative::projected_inverse_scaling, phi, f, floor, params);
}

template <int Dim>
ScaledDistance<Dim> redistance(const ScalarField<Dim>& phi, const RedistanceParams& params) {
    switch (params.alternative) {
        case Alternative::direct: return direct_redistance(phi, params);
        case Alternative::projected_redistance: return projected_redistance(phi, params);
        case Alternative::projected_scaling: return projected_scaling(phi, params);
        case Alternative::projected_inverse_scaling: return projected_inverse_scaling(phi, params);
    }
    throw DomainError("redistance: unknown alternative");
}

}  // namespace levelset
