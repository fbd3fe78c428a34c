#pragma once

// Level-set convection: SUPG with residual-based discontinuity capturing,
// Crank-Nicolson in time, Picard iteration on the capturing coefficient,
// followed by redistancing and a global volume-restoring shift.
//
// A step solves, for every test function w,
//   (w + tau u.grad w, phi_t + u.grad phi_m) + (grad_xi w, kappa_c grad_xi phi_m) = 0
// with phi_t = (phi^{n+1} - (phi^n + phi'^n)) / dt, phi_m the average of the
// two time levels and u evaluated at the midpoint time.

#include "levelset/errors.hpp"
#include "levelset/field.hpp"
#include "levelset/heaviside.hpp"
#include "levelset/linalg.hpp"
#include "levelset/mesh.hpp"
#include "levelset/redistance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace levelset {

template <int Dim>
using VelocityField = std::function<Vec<Dim>(const Vec<Dim>& x, double t)>;

enum class TauVariant {
    /// (dt^2 + u.G u)^(-1/2)
    printed,
    /// ((2/dt)^2 + u.G u)^(-1/2)
    conventional,
};

/// What a step does when Picard reaches picard_max above picard_tol.
enum class PicardLimit {
    /// Throw PicardError with the residual trace.
    error,
    /// Keep the last iterate; the report flags the step.
    accept,
};

struct TransportParams {
    double dt = 0.01;
    double C = 1.0;
    double picard_tol = 1e-8;
    int picard_max = 20;
    /// Anderson mixing depth for the Picard map; 0 gives plain Picard.
    int anderson_depth = 3;
    PicardLimit on_limit = PicardLimit::error;
    bool volume_conserve = true;
    TauVariant tau = TauVariant::printed;
    double solve_tol = 1e-12;

    void validate() const {
        if (!(dt > 0.0)) throw DomainError("TransportParams: dt must be positive");
        if (!(C >= 0.0)) throw DomainError("TransportParams: C must be nonnegative");
        if (picard_max < 1) throw DomainError("TransportParams: picard_max must be at least 1");
        if (anderson_depth < 0) throw DomainError("TransportParams: anderson_depth must be nonnegative");
    }
};

template <int Dim>
double stabilization_tau(const Vec<Dim>& u, const MetricPair<Dim>& m, double dt,
                         TauVariant variant = TauVariant::printed) {
    if (!(dt > 0.0)) throw DomainError("stabilization_tau: dt must be positive");
    const double t = variant == TauVariant::printed ? dt * dt : (2.0 / dt) * (2.0 / dt);
    return 1.0 / std::sqrt(t + quadratic_form<Dim>(u, m.G));
}

inline double capturing_kappa(double residual, double C) { return C * std::abs(residual); }

/// phi is the uncorrected field; phi + phi_prime is the level set.
/// reference_volume is the subdomain volume V1 every correction restores.
template <int Dim>
struct TimeState {
    ScalarField<Dim> phi;
    double phi_prime = 0.0;
    double t = 0.0;
    double reference_volume = std::numeric_limits<double>::quiet_NaN();

    [[nodiscard]] ScalarField<Dim> corrected() const { return phi.shifted(phi_prime); }
};

/// Velocity and SUPG parameter at every quadrature point for one step.
template <int Dim>
struct StepCoefficients {
    std::vector<Vec<Dim>> velocity;
    std::vector<double> tau;
};

template <int Dim>
StepCoefficients<Dim> step_coefficients(const MeshPatch<Dim>& patch, const VelocityField<Dim>& velocity,
                                        double t_mid, const TransportParams& params) {
    const auto& c = patch.cache();
    StepCoefficients<Dim> k{std::vector<Vec<Dim>>(c.jxw.size()), std::vector<double>(c.jxw.size())};
    for (std::size_t p = 0; p < c.jxw.size(); ++p) {
        k.velocity[p] = velocity(c.points[p], t_mid);
        const auto& jinv = c.inverse_jacobians[p];
        const MetricPair<Dim> m{matmul<Dim>(transpose<Dim>(jinv), jinv), {}};
        k.tau[p] = stabilization_tau<Dim>(k.velocity[p], m, params.dt, params.tau);
    }
    return k;
}

/// The linear system for phi^{n+1} with kappa_c frozen at the iterate
/// `guess`. `start` is phi^n + phi'^n.
template <int Dim>
SparseSystem assemble_supg(const ScalarField<Dim>& guess, const ScalarField<Dim>& start,
                           const StepCoefficients<Dim>& coeffs, const TransportParams& params) {
    const auto& patch = start.patch();
    const auto& c = patch.cache();
    const auto& scatter = patch.pattern().scatter;
    const int nq = c.points_per_element, nl = c.nodes_per_element;
    const double dt = params.dt;
    auto sys = patch.pattern().make_system();
    std::vector<double> adv(nl), test(nl);
    for (int e = 0; e < patch.num_elements(); ++e) {
        const auto dofs = patch.element_dofs(e);
        const std::size_t base = static_cast<std::size_t>(e) * nl * nl;
        for (int q = 0; q < nq; ++q) {
            const std::size_t p = static_cast<std::size_t>(e) * nq + q;
            const double* N = &c.values[p * nl];
            const Vec<Dim>* dN = &c.gradients[p * nl];
            const Vec<Dim>* dNr = &c.ref_gradients[p * nl];
            const Vec<Dim>& u = coeffs.velocity[p];
            const double tau = coeffs.tau[p];

            double f0 = 0.0, fk = 0.0, u_grad_f0 = 0.0, u_grad_fk = 0.0;
            Vec<Dim> rgrad_f0{};
            for (int a = 0; a < nl; ++a) {
                const double s0 = start.coefficients()[dofs[a]];
                const double sk = guess.coefficients()[dofs[a]];
                adv[a] = dot<Dim>(u, dN[a]);
                test[a] = N[a] + tau * adv[a];
                f0 += N[a] * s0;
                fk += N[a] * sk;
                u_grad_f0 += adv[a] * s0;
                u_grad_fk += adv[a] * sk;
                for (int i = 0; i < Dim; ++i) rgrad_f0[i] += dNr[a][i] * s0;
            }
            const double residual = (fk - f0) / dt + 0.5 * (u_grad_fk + u_grad_f0);
            const double kappa = capturing_kappa(residual, params.C);
            const double w = c.jxw[p];
            const double known = f0 / dt - 0.5 * u_grad_f0;
            for (int a = 0; a < nl; ++a) {
                sys.rhs[dofs[a]] += (test[a] * known - 0.5 * kappa * dot<Dim>(dNr[a], rgrad_f0)) * w;
                for (int b = 0; b < nl; ++b)
                    sys.values[scatter[base + a * nl + b]] +=
                        (test[a] * (N[b] / dt + 0.5 * adv[b]) + 0.5 * kappa * dot<Dim>(dNr[a], dNr[b])) * w;
            }
        }
    }
    return sys;
}

struct VolumeCorrection {
    double shift = 0.0;
    double residual = 0.0;
    bool bisection_fallback = false;
};

/// Shift s with V1(phi_hat(phi + s)) = target, from the scaled distance of
/// the unshifted phi. Newton with the analytic derivative, then bisection on
/// a geometrically grown bracket.
template <int Dim>
VolumeCorrection volume_correction(const ScaledDistance<Dim>& hat, double target, const HeavisideParams& heaviside,
                                   double tol = -1.0) {
    const auto& patch = hat.phi().patch();
    const double measure = patch.measure();
    if (!(target > 0.0 && target < measure))
        throw ConservationError("volume_correction: target volume must lie strictly inside (0, |domain|)");
    if (tol <= 0.0) tol = 1e-12 * measure;
    const auto r = hat.shift_response();
    const auto& jxw = patch.cache().jxw;
    const auto f = [&](double s) {
        double v = 0.0;
        for (std::size_t p = 0; p < jxw.size(); ++p)
            v += regularized_heaviside(r.base[p] + s * r.slope[p], heaviside) * jxw[p];
        return v - target;
    };
    const auto df = [&](double s) {
        double d = 0.0;
        for (std::size_t p = 0; p < jxw.size(); ++p)
            d += regularized_heaviside_derivative(r.base[p] + s * r.slope[p], heaviside) * r.slope[p] * jxw[p];
        return d;
    };

    VolumeCorrection out;
    try {
        out.shift = scalar_newton(f, df, 0.0, tol, 50);
        out.residual = f(out.shift);
        return out;
    } catch (const Error&) {
    }
    out.bisection_fallback = true;
    double width = 1e-8;
    for (int i = 0; i < 80; ++i, width *= 2.0) {
        const double flo = f(-width), fhi = f(width);
        if ((flo > 0.0) != (fhi > 0.0) || std::abs(flo) <= tol || std::abs(fhi) <= tol) {
            out.shift = bisection(f, -width, width, tol);
            out.residual = f(out.shift);
            if (std::abs(out.residual) > tol)
                throw ConservationError("volume_correction: bisection stalled above tolerance");
            return out;
        }
    }
    throw ConservationError("volume_correction: target volume cannot be bracketed");
}

template <int Dim>
VolumeCorrection volume_correction(const ScalarField<Dim>& phi, double target, const HeavisideParams& heaviside,
                                   const RedistanceParams& redistance_params) {
    return volume_correction(redistance(phi, redistance_params), target, heaviside);
}

/// V1 of the scaled distance of phi.
template <int Dim>
double indicator_volume(const ScaledDistance<Dim>& hat, const HeavisideParams& heaviside) {
    const auto v = hat.at_quadrature();
    return subdomain_volumes<Dim>(hat.phi().patch(), v, heaviside).second;
}

template <int Dim>
TimeState<Dim> make_initial_state(ScalarField<Dim> phi0, double t0, const RedistanceParams& redistance_params,
                                  const HeavisideParams& heaviside) {
    TimeState<Dim> s{std::move(phi0), 0.0, t0, 0.0};
    s.reference_volume = indicator_volume(redistance(s.phi, redistance_params), heaviside);
    return s;
}

struct StepReport {
    int picard_iterations = 0;
    std::vector<double> picard_trace;
    /// Picard stopped at picard_max above picard_tol (accept policy only).
    bool picard_unconverged = false;
    double correction = 0.0;
    bool bisection_fallback = false;
    /// V1 after the step, before and after the correction.
    double volume_uncorrected = 0.0;
    double volume = 0.0;
};

template <int Dim>
struct StepResult {
    TimeState<Dim> state;
    /// Scaled distance of the corrected level set.
    ScaledDistance<Dim> hat;
    StepReport report;
};

namespace detail {

/// Anderson mixing over the last few Picard maps g = G(x): the next iterate
/// is g_k - dG gamma with gamma minimising |f_k - dF gamma|, f = g - x.
class AndersonMixer {
public:
    explicit AndersonMixer(int depth) : depth_(depth) {}

    std::vector<double> next(const std::vector<double>& x, std::vector<double> g) {
        std::vector<double> f(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) f[i] = g[i] - x[i];
        if (depth_ == 0) return g;
        if (!prev_f_.empty()) {
            df_.push_back(f);
            dg_.push_back(g);
            for (std::size_t i = 0; i < f.size(); ++i) {
                df_.back()[i] -= prev_f_[i];
                dg_.back()[i] -= prev_g_[i];
            }
            if (static_cast<int>(df_.size()) > depth_) {
                df_.erase(df_.begin());
                dg_.erase(dg_.begin());
            }
        }
        prev_f_ = f;
        prev_g_ = g;
        const int m = static_cast<int>(df_.size());
        if (m == 0) return g;
        // Normal equations, lightly regularised, solved by elimination.
        std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
        double scale = 0.0;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) a[i][j] = dot(df_[i], df_[j]);
            a[i][m] = dot(df_[i], f);
            scale = std::max(scale, a[i][i]);
        }
        if (!(scale > 0.0)) return g;
        for (int i = 0; i < m; ++i) a[i][i] += 1e-12 * scale;
        for (int c = 0; c < m; ++c) {
            int piv = c;
            for (int r = c + 1; r < m; ++r)
                if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
            std::swap(a[c], a[piv]);
            if (a[c][c] == 0.0) return g;
            for (int r = c + 1; r < m; ++r) {
                const double q = a[r][c] / a[c][c];
                for (int k = c; k <= m; ++k) a[r][k] -= q * a[c][k];
            }
        }
        std::vector<double> gamma(m);
        for (int c = m - 1; c >= 0; --c) {
            double v = a[c][m];
            for (int k = c + 1; k < m; ++k) v -= a[c][k] * gamma[k];
            gamma[c] = v / a[c][c];
        }
        for (int j = 0; j < m; ++j)
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gamma[j] * dg_[j][i];
        return g;
    }

private:
    int depth_;
    std::vector<double> prev_f_, prev_g_;
    std::vector<std::vector<double>> df_, dg_;
};

}  // namespace detail

/// Picard-converged SUPG solve for phi^{n+1} (no redistancing). The first
/// iterate solves with kappa_c = 0; each further pass freezes kappa_c at the
/// current iterate and solves, and successive solutions are combined by
/// Anderson mixing. Iteration stops once the nonlinear
/// residual |A(x) x - b(x)| / |b(x)| of an iterate is at most picard_tol;
/// the trace holds that relative residual for every iterate checked. When
/// picard_max solves do not get there, throws PicardError or keeps the last
/// iterate, per params.on_limit.
template <int Dim>
ScalarField<Dim> advance(const ScalarField<Dim>& start, const VelocityField<Dim>& velocity, double t,
                         const TransportParams& params, StepReport* report = nullptr) {
    params.validate();
    const auto& patch = start.patch();
    const auto coeffs = step_coefficients<Dim>(patch, velocity, t + 0.5 * params.dt, params);
    ScalarField<Dim> iterate = start;
    std::vector<double> trace;
    const auto finish = [&](int solves) {
        if (report) {
            report->picard_iterations = solves;
            report->picard_trace = trace;
        }
        return iterate;
    };
    const auto relative_residual = [&](const SparseSystem& sys) {
        std::vector<double> r(sys.dimension);
        sys.multiply(iterate.coefficients(), r);
        for (int i = 0; i < sys.dimension; ++i) r[i] -= sys.rhs[i];
        const double bnorm = detail::norm2(sys.rhs);
        return bnorm > 0.0 ? detail::norm2(r) / bnorm : detail::norm2(r);
    };

    // First iterate: the solve without capturing. Starting from phi^n
    // instead can land on a spurious root, since the capturing term's
    // natural boundary flux admits solutions with nonzero residual.
    TransportParams plain = params;
    plain.C = 0.0;
    auto sys = assemble_supg<Dim>(iterate, start, coeffs, plain);
    iterate.coefficients() = solve_nonsymmetric(sys, params.solve_tol, SolveDefaults::max_iter,
                                                std::span<const double>(iterate.coefficients()));
    if (params.C == 0.0) return finish(1);
    sys = assemble_supg<Dim>(iterate, start, coeffs, params);
    detail::AndersonMixer mixer(params.anderson_depth);
    for (int solves = 1;; ++solves) {
        const double rel = relative_residual(sys);
        trace.push_back(rel);
        if (rel <= params.picard_tol) return finish(solves);
        if (solves == params.picard_max) break;
        auto g = solve_nonsymmetric(sys, params.solve_tol, SolveDefaults::max_iter,
                                    std::span<const double>(iterate.coefficients()));
        iterate.coefficients() = mixer.next(iterate.coefficients(), std::move(g));
        sys = assemble_supg<Dim>(iterate, start, coeffs, params);
    }
    if (params.on_limit == PicardLimit::error) throw PicardError(std::move(trace));
    if (report) report->picard_unconverged = true;
    return finish(params.picard_max);
}

/// One complete step: transport, redistancing of the new field, volume
/// correction towards state.reference_volume.
template <int Dim>
StepResult<Dim> step(const TimeState<Dim>& state, const VelocityField<Dim>& velocity, const TransportParams& params,
                     const RedistanceParams& redistance_params, const HeavisideParams& heaviside) {
    StepReport report;
    auto next = advance<Dim>(state.corrected(), velocity, state.t, params, &report);
    auto hat = redistance(next, redistance_params);
    report.volume_uncorrected = indicator_volume(hat, heaviside);
    double shift = 0.0;
    if (params.volume_conserve) {
        const double target = std::isnan(state.reference_volume) ? indicator_volume(
                                                                         redistance(state.corrected(), redistance_params), heaviside)
                                                                   : state.reference_volume;
        const auto vc = volume_correction(hat, target, heaviside);
        shift = vc.shift;
        report.bisection_fallback = vc.bisection_fallback;
        if (shift != 0.0) hat = hat.shifted(shift);
        report.volume = indicator_volume(hat, heaviside);
    } else {
        report.volume = report.volume_uncorrected;
    }
    report.correction = shift;
    TimeState<Dim> out{std::move(next), shift, state.t + params.dt, state.reference_volume};
    return {std::move(out), std::move(hat), std::move(report)};
}

}  // namespace levelset
