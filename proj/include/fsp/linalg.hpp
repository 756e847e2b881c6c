#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace fsp {

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;
using Mat4 = std::array<Vec4, 4>;      // M[row][col]
using Ten3 = std::array<Mat4, 4>;      // T[a][b][c]
using Ten4 = std::array<Ten3, 4>;      // T[a][b][c][d]

using cplx = std::complex<double>;
using CVec3 = std::array<cplx, 3>;
using CVec4 = std::array<cplx, 4>;

inline Mat4 zero_mat4() { return Mat4{}; }
inline Ten3 zero_ten3() { return Ten3{}; }
inline Ten4 zero_ten4() { return Ten4{}; }

inline bool all_finite(const Vec4& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(const Mat4& m) {
    for (const auto& row : m)
        if (!all_finite(row)) return false;
    return true;
}

inline bool all_finite(const Ten3& t) {
    for (const auto& m : t)
        if (!all_finite(m)) return false;
    return true;
}

inline bool all_finite(const Ten4& t) {
    for (const auto& m : t)
        if (!all_finite(m)) return false;
    return true;
}

inline double max_abs(const Vec4& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs(const Mat4& a) {
    double m = 0.0;
    for (const auto& row : a) m = std::max(m, max_abs(row));
    return m;
}

inline double max_abs(const Ten3& t) {
    double m = 0.0;
    for (const auto& a : t) m = std::max(m, max_abs(a));
    return m;
}

inline double max_abs(const Ten4& t) {
    double m = 0.0;
    for (const auto& a : t) m = std::max(m, max_abs(a));
    return m;
}

// Largest |a - a^T| entry; zero for an exactly symmetric matrix.
inline double symmetry_defect(const Mat4& a) {
    double m = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) m = std::max(m, std::abs(a[i][j] - a[j][i]));
    return m;
}

inline Mat4 matmul(const Mat4& a, const Mat4& b) {
    Mat4 c{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            const double aik = a[i][k];
            for (int j = 0; j < 4; ++j) c[i][j] += aik * b[k][j];
        }
    return c;
}

inline Vec4 matvec(const Mat4& a, const Vec4& v) {
    Vec4 r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r[i] += a[i][j] * v[j];
    return r;
}

inline double dot(const Mat4& g, const Vec4& u, const Vec4& v) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) s += g[i][j] * u[i] * v[j];
    return s;
}

// Gaussian elimination with partial pivoting. Returns false when a pivot
// vanishes; det receives the determinant either way.
bool invert4(const Mat4& a, Mat4& inv, double& det);

double det4(const Mat4& a);

// Elementwise helpers used by the fixed-step integrators.
template <std::size_t N>
inline std::array<double, N> axpy(double a, const std::array<double, N>& x,
                                  const std::array<double, N>& y) {
    std::array<double, N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a * x[i] + y[i];
    return r;
}

}  // namespace fsp
