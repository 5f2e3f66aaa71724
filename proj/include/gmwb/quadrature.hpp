#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gmwb/common.hpp"

namespace gmwb {

/// Composite Simpson rule over values sampled on a uniform grid with step h.
/// Requires an odd number of points (even number of intervals).
inline double simpson(std::span<const double> f, double h) {
    detail::require(f.size() >= 3 && f.size() % 2 == 1,
                    "simpson: need an odd number of points >= 3");
    double odd = 0.0, even = 0.0;
    for (std::size_t i = 1; i + 1 < f.size(); i += 2) odd += f[i];
    for (std::size_t i = 2; i + 1 < f.size(); i += 2) even += f[i];
    return h / 3.0 * (f.front() + f.back() + 4.0 * odd + 2.0 * even);
}

/// Prefix integrals cum[i] = integral of f from x_0 to x_i on a uniform grid.
/// Even nodes use composite Simpson; odd nodes add a half-step evaluated with
/// the 3-point Newton-Cotes rule, so the result is third-order everywhere.
inline std::vector<double> prefix_integral(std::span<const double> f, double h) {
    detail::require(f.size() >= 3, "prefix_integral: need at least 3 points");
    std::vector<double> cum(f.size(), 0.0);
    for (std::size_t i = 2; i < f.size(); i += 2)
        cum[i] = cum[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
    for (std::size_t i = 1; i < f.size(); i += 2) {
        if (i + 1 < f.size())
            cum[i] = cum[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
        else // even point count: close the last half-step backwards
            cum[i] = cum[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
    }
    return cum;
}

/// Integral of the quadratic through (x_j-..x_j+h..x_j+2h) over [x_j, x_j + s],
/// 0 <= s <= h, with the three node values f0, f1, f2 at spacing h.
inline double partial_cell_integral(double f0, double f1, double f2, double h, double s) {
    const double u = s / h;
    // quadratic in u through u = 0, 1, 2
    const double a = f0;
    const double b = (-3.0 * f0 + 4.0 * f1 - f2) / 2.0;
    const double c = (f0 - 2.0 * f1 + f2) / 2.0;
    return h * (a * u + b * u * u / 2.0 + c * u * u * u / 3.0);
}

/// Uniform grid helper: n points from lo to hi inclusive.
inline std::vector<double> linspace(double lo, double hi, int n) {
    detail::require(n >= 2 && hi > lo, "linspace: need n >= 2 and hi > lo");
    std::vector<double> x(static_cast<std::size_t>(n));
    const double h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = lo + h * i;
    x.back() = hi;
    return x;
}

/// Cubic 4-point (Lagrange) interpolation of values sampled on a uniform grid.
/// Returns 0 outside [lo, lo + (n-1) h].
inline double interp_uniform(std::span<const double> f, double lo, double h, double x) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(f.size());
    const double u = (x - lo) / h;
    if (u < 0.0 || u > static_cast<double>(n - 1)) return 0.0;
    std::ptrdiff_t j = static_cast<std::ptrdiff_t>(u);
    if (j > n - 2) j = n - 2;
    if (n < 4) { // linear fallback for tiny grids
        const double t = u - static_cast<double>(j);
        return f[j] * (1.0 - t) + f[j + 1] * t;
    }
    std::ptrdiff_t j0 = j - 1;
    if (j0 < 0) j0 = 0;
    if (j0 > n - 4) j0 = n - 4;
    const double t = u - static_cast<double>(j0);
    // Lagrange weights for nodes at offsets 0,1,2,3
    const double w0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    const double w1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    const double w2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    const double w3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    return w0 * f[j0] + w1 * f[j0 + 1] + w2 * f[j0 + 2] + w3 * f[j0 + 3];
}

} // namespace gmwb
