#include "fsp/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace fsp {

bool invert4(const Mat4& a, Mat4& inv, double& det) {
    // Augmented [a | I], row-reduced in place.
    double m[4][8];
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            m[i][j] = a[i][j];
            m[i][j + 4] = (i == j) ? 1.0 : 0.0;
        }
    }
    det = 1.0;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        if (pivot != col) {
            for (int j = 0; j < 8; ++j) std::swap(m[pivot][j], m[col][j]);
            det = -det;
        }
        const double p = m[col][col];
        det *= p;
        if (p == 0.0) {
            return false;
        }
        const double ip = 1.0 / p;
        for (int j = 0; j < 8; ++j) m[col][j] *= ip;
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = m[r][col];
            if (f == 0.0) continue;
            for (int j = 0; j < 8; ++j) m[r][j] -= f * m[col][j];
        }
    }
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) inv[i][j] = m[i][j + 4];
    return true;
}

double det4(const Mat4& a) {
    Mat4 scratch;
    double det = 0.0;
    invert4(a, scratch, det);
    return det;
}

}  // namespace fsp
