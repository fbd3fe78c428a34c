#pragma once

#include "levelset/errors.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace levelset {

/// Compressed-row matrix plus right-hand side.
///
/// Column indices of each row are sorted strictly increasing, which is what
/// makes element assembly (see assembly.hpp) deterministic.
struct SparseSystem {
    std::vector<std::int64_t> row_offsets;
    std::vector<int> column_indices;
    std::vector<double> values;
    std::vector<double> rhs;
    int dimension = 0;

    /// Throws DomainError when the structural invariants do not hold.
    void validate() const {
        if (dimension <= 0) throw DomainError("SparseSystem: dimension must be positive");
        if (row_offsets.size() != static_cast<std::size_t>(dimension) + 1)
            throw DomainError("SparseSystem: row_offsets must have dimension+1 entries");
        if (row_offsets.front() != 0 ||
            row_offsets.back() != static_cast<std::int64_t>(values.size()) ||
            column_indices.size() != values.size())
            throw DomainError("SparseSystem: offsets inconsistent with values");
        if (rhs.size() != static_cast<std::size_t>(dimension))
            throw DomainError("SparseSystem: rhs size mismatch");
        for (int i = 0; i < dimension; ++i) {
            if (row_offsets[i + 1] < row_offsets[i])
                throw DomainError("SparseSystem: row_offsets decreasing");
            for (auto k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
                const int c = column_indices[k];
                if (c < 0 || c >= dimension)
                    throw DomainError("SparseSystem: column index out of range");
                if (k > row_offsets[i] && column_indices[k - 1] >= c)
                    throw DomainError("SparseSystem: row columns not strictly increasing");
            }
        }
    }

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (int i = 0; i < dimension; ++i) {
            double s = 0.0;
            for (auto k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
                s += values[k] * x[column_indices[k]];
            y[i] = s;
        }
    }

    [[nodiscard]] std::vector<double> diagonal() const {
        std::vector<double> d(dimension, 0.0);
        for (int i = 0; i < dimension; ++i)
            for (auto k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
                if (column_indices[k] == i) d[i] = values[k];
        return d;
    }

    /// Entry (i, j), zero outside the pattern.
    [[nodiscard]] double at(int i, int j) const {
        for (auto k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
            if (column_indices[k] == j) return values[k];
        return 0.0;
    }

    /// max |A_ij - A_ji| over the pattern.
    [[nodiscard]] double asymmetry() const {
        double m = 0.0;
        for (int i = 0; i < dimension; ++i)
            for (auto k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
                m = std::max(m, std::abs(values[k] - at(column_indices[k], i)));
        return m;
    }
};

struct SolveDefaults {
    static constexpr double rel_tol = 1e-10;
    /// max_iter <= 0 means 10 * dimension.
    static constexpr int max_iter = 0;
};

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline std::vector<double> jacobi_inverse(const SparseSystem& system) {
    auto d = system.diagonal();
    for (double& v : d) v = (v != 0.0) ? 1.0 / v : 1.0;
    return d;
}

inline int iteration_cap(const SparseSystem& system, int max_iter) {
    return max_iter > 0 ? max_iter : 10 * system.dimension;
}

}  // namespace detail

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite
/// systems. Returns x with ||Ax - b|| / ||b|| <= rel_tol.
inline std::vector<double> solve_spd(const SparseSystem& system,
                                     double rel_tol = SolveDefaults::rel_tol,
                                     int max_iter = SolveDefaults::max_iter,
                                     std::optional<std::span<const double>> initial_guess = {}) {
    const int n = system.dimension;
    const int cap = detail::iteration_cap(system, max_iter);
    const auto& b = system.rhs;
    std::vector<double> x(n, 0.0);
    if (initial_guess) x.assign(initial_guess->begin(), initial_guess->end());

    const double bnorm = detail::norm2(b);
    if (bnorm == 0.0) return std::vector<double>(n, 0.0);

    const auto dinv = detail::jacobi_inverse(system);
    std::vector<double> r(n), z(n), p(n), q(n);
    system.multiply(x, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    double rnorm = detail::norm2(r);
    if (rnorm <= rel_tol * bnorm) return x;
    for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    p = z;
    double rz = detail::dot(r, z);

    for (int it = 1; it <= cap; ++it) {
        system.multiply(p, q);
        const double pq = detail::dot(p, q);
        if (pq <= 0.0)
            throw IterationLimitError("solve_spd: matrix not positive definite", it, rnorm / bnorm);
        const double alpha = rz / pq;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rnorm = detail::norm2(r);
        if (rnorm <= rel_tol * bnorm) {
            // Guard against drift of the recursively updated residual.
            std::vector<double> ax(n);
            system.multiply(x, ax);
            for (int i = 0; i < n; ++i) r[i] = b[i] - ax[i];
            rnorm = detail::norm2(r);
            if (rnorm <= rel_tol * bnorm) return x;
        }
        for (int i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
        const double rz_new = detail::dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw IterationLimitError("solve_spd: no convergence", cap, rnorm / bnorm);
}

/// BiCGStab(2) with right Jacobi preconditioning for general nonsingular
/// systems. Plain BiCGStab stalls on some advection systems when started
/// close to the solution (its one-dimensional minimal-residual step
/// degenerates); the two-dimensional step does not. Each bi-conjugate step
/// counts as one iteration against max_iter.
inline std::vector<double> solve_nonsymmetric(
    const SparseSystem& system, double rel_tol = SolveDefaults::rel_tol,
    int max_iter = SolveDefaults::max_iter,
    std::optional<std::span<const double>> initial_guess = {}) {
    constexpr int ell = 2;
    const int n = system.dimension;
    const int cap = detail::iteration_cap(system, max_iter);
    const auto& b = system.rhs;
    std::vector<double> x(n, 0.0);
    if (initial_guess) x.assign(initial_guess->begin(), initial_guess->end());

    const double bnorm = detail::norm2(b);
    if (bnorm == 0.0) return std::vector<double>(n, 0.0);

    // Iterate on y with A D y = b, x = D y.
    const auto dinv = detail::jacobi_inverse(system);
    std::vector<double> y(n), scratch(n);
    for (int i = 0; i < n; ++i) y[i] = x[i] / dinv[i];
    const auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
        for (int i = 0; i < n; ++i) scratch[i] = dinv[i] * v[i];
        system.multiply(scratch, out);
    };
    const auto true_residual = [&](std::vector<double>& r) {
        apply(y, r);
        for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
        return detail::norm2(r);
    };

    std::vector<std::vector<double>> r(ell + 1, std::vector<double>(n)), u(ell + 1, std::vector<double>(n));
    std::vector<double> shadow;
    double tau[ell + 1][ell + 1] = {}, sigma[ell + 1] = {}, g0[ell + 1] = {}, g1[ell + 1] = {}, g2[ell + 1] = {};
    double rho0 = 1.0, alpha = 0.0, omega = 1.0, rnorm = true_residual(r[0]);
    bool restart = true;

    for (int it = 0; it < cap;) {
        if (restart) {
            shadow = r[0];
            for (auto& v : u) std::fill(v.begin(), v.end(), 0.0);
            rho0 = 1.0, alpha = 0.0, omega = 1.0;
            restart = false;
        }
        if (rnorm <= rel_tol * bnorm) {
            // Confirm against the true residual before returning.
            rnorm = true_residual(r[0]);
            if (rnorm <= rel_tol * bnorm) {
                for (int i = 0; i < n; ++i) x[i] = dinv[i] * y[i];
                return x;
            }
            restart = true;
            continue;
        }

        // Bi-conjugate part.
        rho0 = -omega * rho0;
        bool breakdown = false;
        for (int j = 0; j < ell && !breakdown; ++j, ++it) {
            const double rho1 = detail::dot(r[j], shadow);
            if (rho0 == 0.0 || rho1 == 0.0) {
                breakdown = true;
                break;
            }
            const double beta = alpha * rho1 / rho0;
            rho0 = rho1;
            for (int i = 0; i <= j; ++i)
                for (int k = 0; k < n; ++k) u[i][k] = r[i][k] - beta * u[i][k];
            apply(u[j], u[j + 1]);
            const double us = detail::dot(u[j + 1], shadow);
            if (us == 0.0) {
                breakdown = true;
                break;
            }
            alpha = rho0 / us;
            for (int i = 0; i <= j; ++i)
                for (int k = 0; k < n; ++k) r[i][k] -= alpha * u[i + 1][k];
            apply(r[j], r[j + 1]);
            for (int k = 0; k < n; ++k) y[k] += alpha * u[0][k];
        }
        if (!breakdown) {
            // Minimal-residual part over r_1 .. r_ell (modified Gram-Schmidt).
            for (int j = 1; j <= ell; ++j) {
                for (int i = 1; i < j; ++i) {
                    tau[i][j] = detail::dot(r[j], r[i]) / sigma[i];
                    for (int k = 0; k < n; ++k) r[j][k] -= tau[i][j] * r[i][k];
                }
                sigma[j] = detail::dot(r[j], r[j]);
                if (sigma[j] == 0.0) breakdown = true;
                else g1[j] = detail::dot(r[0], r[j]) / sigma[j];
            }
        }
        if (breakdown) {
            rnorm = true_residual(r[0]);
            restart = true;
            ++it;
            continue;
        }
        g0[ell] = omega = g1[ell];
        for (int j = ell - 1; j >= 1; --j) {
            g0[j] = g1[j];
            for (int i = j + 1; i <= ell; ++i) g0[j] -= tau[j][i] * g0[i];
        }
        for (int j = 1; j < ell; ++j) {
            g2[j] = g0[j + 1];
            for (int i = j + 1; i < ell; ++i) g2[j] += tau[j][i] * g0[i + 1];
        }
        for (int k = 0; k < n; ++k) {
            y[k] += g0[1] * r[0][k];
            r[0][k] -= g1[ell] * r[ell][k];
            u[0][k] -= g0[ell] * u[ell][k];
        }
        for (int j = 1; j < ell; ++j)
            for (int k = 0; k < n; ++k) {
                u[0][k] -= g0[j] * u[j][k];
                y[k] += g2[j] * r[j][k];
                r[0][k] -= g1[j] * r[j][k];
            }
        rnorm = detail::norm2(r[0]);
        if (omega == 0.0 || !std::isfinite(rnorm)) {
            rnorm = true_residual(r[0]);
            restart = true;
        }
    }
    throw IterationLimitError("solve_nonsymmetric: no convergence", cap, rnorm / bnorm);
}

/// Scalar root finding: Newton-Raphson, falling back to bisection when a
/// sign-changing bracket is supplied and Newton stagnates, leaves the
/// bracket, or meets a vanishing derivative.
inline double scalar_newton(const std::function<double(double)>& f,
                            const std::function<double(double)>& df, double x0, double tol,
                            int max_iter,
                            std::optional<std::pair<double, double>> bracket = std::nullopt) {
    double lo = 0.0, hi = 0.0, flo = 0.0;
    if (bracket) {
        lo = bracket->first;
        hi = bracket->second;
        if (lo > hi) std::swap(lo, hi);
        flo = f(lo);
        const double fhi = f(hi);
        if (std::abs(flo) <= tol) return lo;
        if (std::abs(fhi) <= tol) return hi;
        if ((flo > 0) == (fhi > 0)) throw DomainError("scalar_newton: bracket does not change sign");
        if (!(x0 > lo && x0 < hi)) x0 = 0.5 * (lo + hi);
    }

    double x = x0;
    double fx = f(x);
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fx) <= tol) return x;
        if (bracket) {
            if ((fx > 0) == (flo > 0)) {
                lo = x;
                flo = fx;
            } else {
                hi = x;
            }
        }
        const double d = df(x);
        double next = std::numeric_limits<double>::quiet_NaN();
        if (std::isfinite(d) && std::abs(d) > std::numeric_limits<double>::min())
            next = x - fx / d;
        const bool usable = std::isfinite(next) && (!bracket || (next > lo && next < hi));
        if (!usable) {
            if (!bracket) throw Error("scalar_newton: derivative vanished with no bracket");
            next = 0.5 * (lo + hi);
        }
        if (next == x) {
            if (!bracket || hi - lo <= 0.0) break;
            next = 0.5 * (lo + hi);
            if (next == x) break;
        }
        x = next;
        fx = f(x);
    }
    if (std::abs(fx) <= tol) return x;
    throw IterationLimitError("scalar_newton: no convergence", max_iter, std::abs(fx));
}

/// Plain bisection on a sign-changing bracket; stops when |f| <= tol or the
/// bracket collapses to adjacent doubles.
inline double bisection(const std::function<double(double)>& f, double lo, double hi, double tol,
                        int max_iter = 400) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (std::abs(flo) <= tol) return lo;
    if (std::abs(fhi) <= tol) return hi;
    if ((flo > 0) == (fhi > 0)) throw DomainError("bisection: bracket does not change sign");
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::abs(fm) <= tol || mid == lo || mid == hi) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return mid;
}

}  // namespace levelset
