#pragma once

// Direct, unoptimized reference computations used by the unit and acceptance
// tests. Nothing here shares code with the library beyond the grid types.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "scb/core_model.hpp"
#include "scb/smoother.hpp"

namespace scb::oracle {

inline long double kernel_profile(Kernel::Type type, long double u) {
    if (std::fabs(u) >= 1.0L) return 0.0L;
    if (type == Kernel::Type::Epanechnikov) return 0.75L * (1.0L - u * u);
    // Normalizing constant is irrelevant once the weights are normalized.
    return std::exp(-0.5L * u * u);
}

/// Local linear weights at x for d = 1, evaluated literally:
///   s_l = (ph)^-1 sum_j (x_j - x)^l K((x_j - x)/h)
///   w_j = (ph)^-1 (s_2 - (x_j - x) s_1) K((x_j - x)/h),  W_j = w_j / sum w.
/// Returns a dense vector of length p.
inline std::vector<long double> weights_1d(const Grid& design, double x, double h, Kernel::Type type) {
    const std::size_t p = design.size();
    const long double ph = static_cast<long double>(p) * h;
    long double s1 = 0.0L, s2 = 0.0L;
    for (std::size_t j = 0; j < p; ++j) {
        const long double d = static_cast<long double>(design.point(j)[0]) - x;
        const long double k = kernel_profile(type, d / h);
        s1 += d * k / ph;
        s2 += d * d * k / ph;
    }
    std::vector<long double> w(p);
    long double total = 0.0L;
    for (std::size_t j = 0; j < p; ++j) {
        const long double d = static_cast<long double>(design.point(j)[0]) - x;
        w[j] = (s2 - d * s1) * kernel_profile(type, d / h) / ph;
        total += w[j];
    }
    for (auto& v : w) v /= total;
    return w;
}

/// Local linear weights at x for d = 2 by solving the 3x3 weighted normal
/// equations (X^T K X) beta = X^T K e_j with Gaussian elimination and reading
/// off the intercept. Dense vector of length p.
inline std::vector<long double> weights_2d(const Grid& design, Point x, std::array<double, 2> h, Kernel::Type type) {
    const std::size_t p = design.size();
    std::array<std::array<long double, 3>, 3> m{};
    std::vector<std::array<long double, 3>> rows(p);
    std::vector<long double> k(p);
    for (std::size_t j = 0; j < p; ++j) {
        const auto xj = design.point(j);
        const long double d1 = static_cast<long double>(xj[0]) - x[0];
        const long double d2 = static_cast<long double>(xj[1]) - x[1];
        k[j] = kernel_profile(type, d1 / h[0]) * kernel_profile(type, d2 / h[1]);
        rows[j] = {1.0L, d1, d2};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) m[a][b] += k[j] * rows[j][a] * rows[j][b];
    }
    // First row of m^{-1}: solve m^T y = e_1 (m is symmetric).
    std::array<std::array<long double, 4>, 3> aug{};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) aug[a][b] = m[a][b];
        aug[a][3] = a == 0 ? 1.0L : 0.0L;
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::fabs(aug[r][col]) > std::fabs(aug[piv][col])) piv = r;
        std::swap(aug[col], aug[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const long double f = aug[r][col] / aug[col][col];
            for (int c = col; c < 4; ++c) aug[r][c] -= f * aug[col][c];
        }
    }
    std::array<long double, 3> y{};
    for (int a = 0; a < 3; ++a) y[a] = aug[a][3] / aug[a][a];
    std::vector<long double> w(p);
    for (std::size_t j = 0; j < p; ++j) w[j] = k[j] * (y[0] * rows[j][0] + y[1] * rows[j][1] + y[2] * rows[j][2]);
    return w;
}

/// Densifies a sparse weight vector.
inline std::vector<double> dense(const WeightVector& w, std::size_t p) {
    std::vector<double> out(p, 0.0);
    for (std::size_t a = 0; a < w.index.size(); ++a) out[w.index[a]] = w.weight[a];
    return out;
}

}  // namespace scb::oracle
