#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace levelset {

template <int Dim>
using Vec = std::array<double, Dim>;

/// Row-major dense Dim x Dim matrix: m[i][j].
template <int Dim>
using Mat = std::array<std::array<double, Dim>, Dim>;

template <int Dim>
constexpr double dot(const Vec<Dim>& a, const Vec<Dim>& b) {
    double s = 0.0;
    for (int i = 0; i < Dim; ++i) s += a[i] * b[i];
    return s;
}

template <int Dim>
double norm(const Vec<Dim>& a) {
    return std::sqrt(dot<Dim>(a, a));
}

template <int Dim>
constexpr Mat<Dim> identity() {
    Mat<Dim> m{};
    for (int i = 0; i < Dim; ++i) m[i][i] = 1.0;
    return m;
}

template <int Dim>
constexpr Mat<Dim> transpose(const Mat<Dim>& a) {
    Mat<Dim> t{};
    for (int i = 0; i < Dim; ++i)
        for (int j = 0; j < Dim; ++j) t[i][j] = a[j][i];
    return t;
}

template <int Dim>
constexpr Mat<Dim> matmul(const Mat<Dim>& a, const Mat<Dim>& b) {
    Mat<Dim> c{};
    for (int i = 0; i < Dim; ++i)
        for (int k = 0; k < Dim; ++k)
            for (int j = 0; j < Dim; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

template <int Dim>
constexpr Vec<Dim> matvec(const Mat<Dim>& a, const Vec<Dim>& v) {
    Vec<Dim> r{};
    for (int i = 0; i < Dim; ++i)
        for (int j = 0; j < Dim; ++j) r[i] += a[i][j] * v[j];
    return r;
}

/// v^T a, i.e. a^T v.
template <int Dim>
constexpr Vec<Dim> left_multiply(const Vec<Dim>& v, const Mat<Dim>& a) {
    Vec<Dim> r{};
    for (int i = 0; i < Dim; ++i)
        for (int j = 0; j < Dim; ++j) r[j] += v[i] * a[i][j];
    return r;
}

template <int Dim>
constexpr double quadratic_form(const Vec<Dim>& v, const Mat<Dim>& a) {
    return dot<Dim>(v, matvec<Dim>(a, v));
}

template <int Dim>
constexpr double determinant(const Mat<Dim>& a) {
    if constexpr (Dim == 1) {
        return a[0][0];
    } else if constexpr (Dim == 2) {
        return a[0][0] * a[1][1] - a[0][1] * a[1][0];
    } else {
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
               a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    }
}

/// Inverse by cofactors; caller guarantees a nonzero determinant.
template <int Dim>
constexpr Mat<Dim> inverse(const Mat<Dim>& a) {
    const double det = determinant<Dim>(a);
    Mat<Dim> inv{};
    if constexpr (Dim == 1) {
        inv[0][0] = 1.0 / det;
    } else if constexpr (Dim == 2) {
        inv[0][0] = a[1][1] / det;
        inv[0][1] = -a[0][1] / det;
        inv[1][0] = -a[1][0] / det;
        inv[1][1] = a[0][0] / det;
    } else {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
                const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
                inv[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / det;
            }
        }
    }
    return inv;
}

/// Eigenvalues of a symmetric matrix, ascending (cyclic Jacobi rotations).
template <int Dim>
Vec<Dim> symmetric_eigenvalues(Mat<Dim> a) {
    for (int sweep = 0; sweep < 50; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < Dim; ++p)
            for (int q = p + 1; q < Dim; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-300) break;
        for (int p = 0; p < Dim; ++p) {
            for (int q = p + 1; q < Dim; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < Dim; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < Dim; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    Vec<Dim> ev{};
    for (int i = 0; i < Dim; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

}  // namespace levelset
