#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <vector>

#include "pathprop/errors.hpp"
#include "pathprop/model.hpp"
#include "pathprop/path.hpp"

namespace pathprop {

inline constexpr double kResonanceTol = 1e-12;

/// Straight-line interpolant between the boundary points (classical path of
/// the free L0).
inline Path straight_line_path(const BoundaryData& bc, std::size_t samples) {
    bc.validate();
    auto grid = uniform_grid(bc.t_a, bc.t_b, samples);
    const double slope = (bc.x_b - bc.x_a) / bc.duration();
    std::vector<double> x(samples), v(samples, slope);
    for (std::size_t k = 0; k < samples; ++k)
        x[k] = (bc.x_b * (grid[k] - bc.t_a) + bc.x_a * (bc.t_b - grid[k])) / bc.duration();
    x.front() = bc.x_a;
    x.back() = bc.x_b;
    return Path(std::move(grid), std::move(x), std::move(v));
}

/// Sinusoidal interpolant solving xddot = -omega^2 x with the given boundary
/// data. Undefined (resonant) when |sin(omega T)| < 1e-12.
inline Path harmonic_reference_path(const BoundaryData& bc, double omega, std::size_t samples) {
    bc.validate();
    if (omega == 0.0) return straight_line_path(bc, samples);
    const double T = bc.duration();
    const double s = std::sin(omega * T);
    if (std::abs(s) < kResonanceTol)
        throw ResonanceError("harmonic_reference_path: sin(omega*(t_b - t_a)) vanishes at omega = " +
                             std::to_string(omega) + ", T = " + std::to_string(T));
    auto grid = uniform_grid(bc.t_a, bc.t_b, samples);
    std::vector<double> x(samples), v(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const double ta = grid[k] - bc.t_a, tb = bc.t_b - grid[k];
        x[k] = (bc.x_b * std::sin(omega * ta) + bc.x_a * std::sin(omega * tb)) / s;
        v[k] = omega * (bc.x_b * std::cos(omega * ta) - bc.x_a * std::cos(omega * tb)) / s;
    }
    return Path(std::move(grid), std::move(x), std::move(v));
}

namespace detail {

// Derivative samples from values on a uniform grid: central interior,
// second-order one-sided ends. The BVP solver and the returned path share
// this convention so the converged Euler-Lagrange residual is the one
// euler_lagrange_residual reports.
inline void derivative_samples(const std::vector<double>& x, double h, std::vector<double>& v) {
    const std::size_t n = x.size();
    v.resize(n);
    v[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * h);
    for (std::size_t k = 1; k + 1 < n; ++k) v[k] = (x[k + 1] - x[k - 1]) / (2.0 * h);
    v[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * h);
}

} // namespace detail

/// Classical path of the given L0 by damped Newton iteration on the
/// finite-difference Euler-Lagrange system, initialized from the straight
/// line. Callers with a partitioned model should pass l0_part(model).
inline Path solve_bvp_classical(const LagrangianModel& model, const BoundaryData& bc,
                                std::size_t samples, int max_iterations = 50) {
    bc.validate();
    if (samples < 5) throw ConfigError("solve_bvp_classical: need >= 5 samples");
    const auto grid = uniform_grid(bc.t_a, bc.t_b, samples);
    const double h = grid[1] - grid[0];
    const std::size_t n = samples;
    const std::size_t ni = n - 2; // interior unknowns

    std::vector<double> x(n), v(n);
    {
        Path init = straight_line_path(bc, samples);
        x.assign(init.values().begin(), init.values().end());
        v.assign(init.derivative().begin(), init.derivative().end());
        if (!legendre_check(model, init).satisfied)
            throw NumericsError("solve_bvp_classical: Legendre condition fails on the initial guess");
    }

    auto residuals = [&](const std::vector<double>& xv, std::vector<double>& res) {
        detail::derivative_samples(xv, h, v);
        res.resize(ni);
        std::vector<double> p(n);
        for (std::size_t k = 0; k < n; ++k) p[k] = dL_dxdot(model, v[k], xv[k], grid[k]);
        for (std::size_t k = 1; k + 1 < n; ++k)
            res[k - 1] = -(p[k + 1] - p[k - 1]) / (2.0 * h) + dL_dx(model, v[k], xv[k], grid[k]);
    };

    auto max_norm = [](const std::vector<double>& r) {
        double m = 0.0;
        for (double val : r) m = std::max(m, std::abs(val));
        return m;
    };

    std::vector<double> res, res_trial;
    residuals(x, res);
    double fnorm = max_norm(res);
    const double tol = 1e-10 * std::max(1.0, fnorm);

    // d xdot_i / d x_j coefficients of the derivative stencils.
    auto dv_dx = [&](std::size_t i, std::size_t j) -> double {
        const double inv2h = 1.0 / (2.0 * h);
        if (i == 0) {
            if (j == 0) return -3.0 * inv2h;
            if (j == 1) return 4.0 * inv2h;
            if (j == 2) return -inv2h;
            return 0.0;
        }
        if (i == n - 1) {
            if (j == n - 1) return 3.0 * inv2h;
            if (j == n - 2) return -4.0 * inv2h;
            if (j == n - 3) return inv2h;
            return 0.0;
        }
        if (j == i + 1) return inv2h;
        if (j == i - 1) return -inv2h;
        return 0.0;
    };

    Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(ni), static_cast<Eigen::Index>(ni));
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;

    int iter = 0;
    while (fnorm > tol) {
        if (++iter > max_iterations)
            throw NumericsError("solve_bvp_classical: Newton iteration did not converge after " +
                                std::to_string(max_iterations) + " iterations");
        detail::derivative_samples(x, h, v);
        trips.clear();
        for (std::size_t k = 1; k + 1 < n; ++k) {
            // res_k = -(p_{k+1} - p_{k-1})/(2h) + dL_dx(x_k); p_i = g_i m xdot_i.
            for (std::size_t j = std::max<std::size_t>(1, k >= 3 ? k - 2 : 1);
                 j <= std::min(n - 2, k + 2); ++j) {
                double d = 0.0;
                const double gm_p = d2L_dxdot2(model, v[k + 1], x[k + 1], grid[k + 1]);
                const double gm_m = d2L_dxdot2(model, v[k - 1], x[k - 1], grid[k - 1]);
                d += -(gm_p * dv_dx(k + 1, j) - gm_m * dv_dx(k - 1, j)) / (2.0 * h);
                if (j == k) d += d2L_dx2(model, v[k], x[k], grid[k]);
                if (d != 0.0)
                    trips.emplace_back(static_cast<int>(k - 1), static_cast<int>(j - 1), d);
            }
        }
        J.setFromTriplets(trips.begin(), trips.end());
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw NumericsError("solve_bvp_classical: singular Euler-Lagrange Jacobian");
        residuals(x, res);
        Eigen::VectorXd F(static_cast<Eigen::Index>(ni));
        for (std::size_t k = 0; k < ni; ++k) F[static_cast<Eigen::Index>(k)] = res[k];
        Eigen::VectorXd step = lu.solve(-F);

        // Roundoff floor: the correction is negligible relative to the path.
        double xmax = 1.0, smax = 0.0;
        for (double xv : x) xmax = std::max(xmax, std::abs(xv));
        for (Eigen::Index k = 0; k < step.size(); ++k) smax = std::max(smax, std::abs(step[k]));
        if (smax <= 1e-13 * xmax) break;

        double alpha = 1.0;
        std::vector<double> x_trial(n);
        while (true) {
            x_trial = x;
            for (std::size_t k = 0; k < ni; ++k)
                x_trial[k + 1] += alpha * step[static_cast<Eigen::Index>(k)];
            residuals(x_trial, res_trial);
            const double fn = max_norm(res_trial);
            if (fn < fnorm || alpha < 1.0 / 256.0) {
                x = x_trial;
                fnorm = fn;
                break;
            }
            alpha *= 0.5; // damping on residual increase
        }
    }

    detail::derivative_samples(x, h, v);
    Path result(grid, x, v);
    if (!legendre_check(model, result).satisfied)
        throw NumericsError("solve_bvp_classical: Legendre condition fails on the candidate path");
    return result;
}

} // namespace pathprop
