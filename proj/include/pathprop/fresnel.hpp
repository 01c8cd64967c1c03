#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "pathprop/errors.hpp"
#include "pathprop/numerics.hpp"

namespace pathprop {

/// Oscillatory integrals of the form I = int_R exp(i*phi(x)) dx for phases
/// phi that are quadratic with a stationary point at the origin (the Fresnel
/// integrals fixing the short-time normalization). The integral is
/// regularized with a Gaussian damping factor exp(-delta*x^2), evaluated by
/// panel quadrature plus an integration-by-parts tail, and extrapolated
/// delta -> 0 over the configured delta ladder.
struct FresnelOptions {
    std::vector<double> deltas{1e-2, 1e-3, 1e-4};
    double phase_budget = 2500.0; // |a| * X^2 covered by explicit quadrature
    int points_per_panel = 10;    // Gauss-Legendre nodes per pi of phase
};

namespace detail {

// 10-point Gauss-Legendre on [-1, 1].
inline constexpr double kGL10Nodes[5] = {
    0.148874338981631210884826001130,
    0.433395394129247190799265943166,
    0.679409568299024406234327365115,
    0.865063366688984510732096688423,
    0.973906528517171720077964012084};
inline constexpr double kGL10Weights[5] = {
    0.295524224714752870173892994651,
    0.269266719309996355091226921569,
    0.219086362515982043995534934228,
    0.149451349150580593145776339657,
    0.066671344308688137593568809893};

template <typename F>
inline std::complex<double> gl10_panel(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::complex<double> acc{0.0, 0.0};
    for (int i = 0; i < 5; ++i) {
        acc += kGL10Weights[i] * (f(c - h * kGL10Nodes[i]) + f(c + h * kGL10Nodes[i]));
    }
    return acc * h;
}

// Asymptotic tail int_X^inf exp(nu*u^2 + gamma) du, Re(nu) < 0, via repeated
// integration by parts: -e^{nu X^2}/(2 nu X) * sum_k (2k-1)!!/(2 nu X^2)^k.
inline std::complex<double> gaussian_phase_tail(std::complex<double> nu,
                                                std::complex<double> gamma, double X) {
    const std::complex<double> lead = -std::exp(nu * X * X + gamma) / (2.0 * nu * X);
    const std::complex<double> r = 1.0 / (2.0 * nu * X * X);
    std::complex<double> sum{0.0, 0.0}, term{1.0, 0.0};
    double prev_mag = std::abs(term);
    for (int k = 0; k < 7; ++k) {
        sum += term;
        const std::complex<double> next = term * r * static_cast<double>(2 * k + 1);
        if (std::abs(next) >= prev_mag) break; // asymptotic series: stop at smallest term
        prev_mag = std::abs(next);
        term = next;
    }
    return lead * sum;
}

} // namespace detail

struct FresnelResult {
    std::complex<double> value;                 // delta -> 0 extrapolation
    std::vector<std::complex<double>> at_delta; // regulated values, one per delta
    double curvature = 0.0;                     // fitted phase curvature a
};

/// Integrates exp(i*phase(x)) over the real line. `phase` must be quadratic
/// in x with vanishing linear part (stationary point at x = 0); this is
/// checked against samples and violated fits are rejected.
inline FresnelResult fresnel_regularized_integral(const std::function<double(double)>& phase,
                                                  const FresnelOptions& opt = {}) {
    // Two-pass quadratic fit: a from a unit-scale stencil, then refit on the
    // natural scale 1/sqrt|a|.
    auto fit = [&phase](double s) {
        const double pp = phase(s), pm = phase(-s), p0 = phase(0.0);
        const double a = (pp - 2.0 * p0 + pm) / (2.0 * s * s);
        const double b = (pp - pm) / (2.0 * s);
        return std::array<double, 3>{a, b, p0};
    };
    auto f0 = fit(1.0);
    double a = f0[0];
    if (a == 0.0) throw NumericsError("fresnel integral: phase has no curvature");
    const double scale = 1.0 / std::sqrt(std::abs(a));
    auto f1 = fit(scale);
    a = f1[0];
    const double b = f1[1], c = f1[2];
    if (std::abs(b) > 1e-8 * std::abs(a) * scale)
        throw NumericsError("fresnel integral: stationary point is off the origin");
    // Reject non-quadratic phases: probe at an incommensurate point.
    const double probe = 0.77 * scale;
    const double fitval = a * probe * probe + b * probe + c;
    if (std::abs(phase(probe) - fitval) > 1e-8 * (1.0 + std::abs(fitval)))
        throw NumericsError("fresnel integral: phase is not quadratic");

    const double X = std::sqrt(opt.phase_budget / std::abs(a));
    const int panels = std::max(32, static_cast<int>(opt.phase_budget / 3.141592653589793) + 1);

    FresnelResult out;
    out.curvature = a;
    for (double delta : opt.deltas) {
        auto integrand = [&](double x) {
            return std::exp(std::complex<double>(-delta * x * x, phase(x)));
        };
        std::complex<double> acc{0.0, 0.0};
        // Panel edges with equal phase increments: x_k = X*sqrt(k/panels).
        double prev = 0.0;
        for (int k = 1; k <= panels; ++k) {
            const double edge = X * std::sqrt(static_cast<double>(k) / panels);
            acc += detail::gl10_panel(integrand, prev, edge);
            acc += detail::gl10_panel(integrand, -edge, -prev);
            prev = edge;
        }
        const std::complex<double> nu(-delta, a);
        acc += 2.0 * detail::gaussian_phase_tail(nu, std::complex<double>(0.0, c), X);
        out.at_delta.push_back(acc);
    }
    out.value = neville_at_zero<std::complex<double>>(
        std::span<const double>(opt.deltas.data(), opt.deltas.size()),
        std::span<const std::complex<double>>(out.at_delta.data(), out.at_delta.size()));
    return out;
}

} // namespace pathprop
