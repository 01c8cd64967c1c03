#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "pathprop/errors.hpp"

namespace pathprop {

inline constexpr double kMachineEps = std::numeric_limits<double>::epsilon();

/// Step size rule for one-sided numerical derivatives of Lagrangian-like
/// callables: h = eps^(1/3) * max(1, |arg|).
inline double fd_step(double arg) {
    static const double base = std::cbrt(kMachineEps);
    return base * std::max(1.0, std::abs(arg));
}

/// Composite trapezoid rule on an arbitrary strictly increasing grid.
inline double trapezoid(std::span<const double> t, std::span<const double> f) {
    if (t.size() != f.size() || t.size() < 2)
        throw NumericsError("trapezoid: need matching grids with >= 2 samples");
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k)
        acc += 0.5 * (t[k + 1] - t[k]) * (f[k] + f[k + 1]);
    return acc;
}

/// Composite Simpson rule on a uniform grid; a 3/8 block absorbs an even
/// interval count.
inline double simpson_uniform(double h, std::span<const double> f) {
    const std::size_t n = f.size();
    if (n < 3) throw NumericsError("simpson_uniform: need >= 3 samples");
    double acc = 0.0;
    std::size_t start = 0;
    if ((n - 1) % 2 != 0) {
        if (n < 4) throw NumericsError("simpson_uniform: even interval count needs >= 4 samples");
        acc += 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
        start = 3;
    }
    for (std::size_t k = start; k + 2 < n; k += 2)
        acc += h / 3.0 * (f[k] + 4.0 * f[k + 1] + f[k + 2]);
    return acc;
}

/// Fornberg's algorithm: weights of the m-th derivative at z for samples on
/// the nodes x (exact for polynomials up to degree x.size()-1).
inline std::vector<double> fornberg_weights(double z, std::span<const double> x, int m) {
    const int n = static_cast<int>(x.size()) - 1;
    if (n < m) throw NumericsError("fornberg_weights: too few nodes for derivative order");
    std::vector<std::vector<double>> c(static_cast<std::size_t>(n + 1),
                                       std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[static_cast<std::size_t>(i)] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                        c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                              c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) / c2;
                c[static_cast<std::size_t>(i)][0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
                    (c4 * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] -
                     k * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k - 1)]) / c3;
            c[static_cast<std::size_t>(j)][0] = c4 * c[static_cast<std::size_t>(j)][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) w[i] = c[i][static_cast<std::size_t>(m)];
    return w;
}

namespace detail {

// Gauss-Kronrod 7-15 pair on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <typename F>
inline void gk15(const F& f, double a, double b, double& result, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kKronrodNodes[i]);
        fv[14 - i] = f(c + h * kKronrodNodes[i]);
    }
    fv[7] = f(c);
    double kron = kKronrodWeights[7] * fv[7];
    double gauss = kGaussWeights[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        kron += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (fv[i] + fv[14 - i]);
    }
    result = kron * h;
    err = std::abs((kron - gauss) * h);
}

template <typename F>
inline double integrate_adaptive_impl(const F& f, double a, double b, double tol, int depth) {
    double result = 0.0, err = 0.0;
    gk15(f, a, b, result, err);
    if (err <= tol || depth <= 0) {
        if (depth <= 0 && err > tol * 16.0)
            throw NumericsError("integrate_adaptive: failed to converge (possible non-integrable "
                                "singularity inside the interval)");
        return result;
    }
    const double c = 0.5 * (a + b);
    return integrate_adaptive_impl(f, a, c, 0.5 * tol, depth - 1) +
           integrate_adaptive_impl(f, c, b, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Gauss-Kronrod quadrature with an absolute tolerance.
template <typename F>
inline double integrate_adaptive(const F& f, double a, double b,
                                 double abs_tol = 1e-10, int max_depth = 48) {
    if (a == b) return 0.0;
    const double sign = (a < b) ? 1.0 : -1.0;
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double val = detail::integrate_adaptive_impl(f, lo, hi, abs_tol, max_depth);
    if (!std::isfinite(val))
        throw NumericsError("integrate_adaptive: non-finite result");
    return sign * val;
}

/// Neville polynomial extrapolation of (x_i, y_i) to x = 0.
template <typename T>
inline T neville_at_zero(std::span<const double> x, std::span<const T> y) {
    if (x.size() != y.size() || x.empty())
        throw NumericsError("neville_at_zero: bad inputs");
    std::vector<T> p(y.begin(), y.end());
    const std::size_t n = x.size();
    for (std::size_t level = 1; level < n; ++level)
        for (std::size_t i = 0; i + level < n; ++i)
            p[i] = (p[i + 1] * (0.0 - x[i]) - p[i] * (0.0 - x[i + level])) / (x[i + level] - x[i]);
    return p[0];
}

/// Least-squares slope of log|err| vs log h; used for convergence-order fits.
inline double fit_convergence_order(std::span<const double> h, std::span<const double> err) {
    if (h.size() != err.size() || h.size() < 2)
        throw NumericsError("fit_convergence_order: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log(h[i]);
        const double y = std::log(std::max(err[i], 1e-300));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace pathprop
