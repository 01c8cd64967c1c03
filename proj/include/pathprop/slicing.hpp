#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "pathprop/classical.hpp"
#include "pathprop/errors.hpp"
#include "pathprop/fresnel.hpp"
#include "pathprop/model.hpp"
#include "pathprop/path.hpp"
#include "pathprop/potential.hpp"

namespace pathprop {

/// Uniform time slicing of [t_a, t_b] into N steps.
struct TimeGrid {
    double t_a = 0.0;
    double t_b = 1.0;
    int steps = 1;

    void validate() const {
        if (steps < 1) throw ConfigError("TimeGrid: need at least one step");
        if (!(t_b > t_a)) throw ConfigError("TimeGrid: t_b must exceed t_a");
        const double eps = epsilon();
        if (std::abs(t_a + steps * eps - t_b) > 1e-14 * std::max(1.0, std::abs(t_b)))
            throw ConfigError("TimeGrid: node arithmetic does not reproduce t_b");
    }
    double epsilon() const { return (t_b - t_a) / static_cast<double>(steps); }
    double node(int n) const { return t_a + epsilon() * static_cast<double>(n); }
};

/// Per-step summaries of the potential over a slice.
enum class AveragedPotentialRule {
    midpoint,
    left_endpoint,
    trapezoid,
    integral_average,
    harmonic_integral_average
};

inline const char* to_string(AveragedPotentialRule r) {
    switch (r) {
        case AveragedPotentialRule::midpoint: return "midpoint";
        case AveragedPotentialRule::left_endpoint: return "left_endpoint";
        case AveragedPotentialRule::trapezoid: return "trapezoid";
        case AveragedPotentialRule::integral_average: return "integral_average";
        case AveragedPotentialRule::harmonic_integral_average: return "harmonic_integral_average";
    }
    return "?";
}

inline AveragedPotentialRule parse_rule(const std::string& name) {
    if (name == "midpoint") return AveragedPotentialRule::midpoint;
    if (name == "left_endpoint") return AveragedPotentialRule::left_endpoint;
    if (name == "trapezoid") return AveragedPotentialRule::trapezoid;
    if (name == "integral_average") return AveragedPotentialRule::integral_average;
    if (name == "harmonic_integral_average") return AveragedPotentialRule::harmonic_integral_average;
    throw ConfigError("unknown averaged-potential rule '" + name + "'");
}

/// Reference interpolant used between slice nodes.
struct Reference {
    enum class Kind { straight_line, harmonic };
    Kind kind = Kind::straight_line;
    double omega = 0.0;

    static Reference straight_line() { return {Kind::straight_line, 0.0}; }
    static Reference harmonic(double omega) { return {Kind::harmonic, omega}; }
    bool is_harmonic() const { return kind == Kind::harmonic; }
};

inline Reference parse_reference(const std::string& name, double omega) {
    if (name == "straight_line") return Reference::straight_line();
    if (name == "harmonic") return Reference::harmonic(omega);
    throw ConfigError("unknown slicing reference '" + name + "'");
}

/// Averaged potential over one slice. The harmonic rule integrates along the
/// sinusoidal arc via the substitution x = (R/sin we) sin(theta), which
/// removes the inverse-square-root endpoint singularity of the x-space form.
inline double averaged_potential(AveragedPotentialRule rule, const Potential& V,
                                 double x_l, double x_r, double epsilon, double omega = 0.0) {
    switch (rule) {
        case AveragedPotentialRule::midpoint:
            return V(0.5 * (x_l + x_r));
        case AveragedPotentialRule::left_endpoint:
            return V(x_l);
        case AveragedPotentialRule::trapezoid:
            return 0.5 * (V(x_l) + V(x_r));
        case AveragedPotentialRule::integral_average: {
            if (std::abs(x_r - x_l) <= 1e-14 * std::max(1.0, std::abs(x_l)))
                return V(x_l); // continuous limit of the 0/0 form
            return V.integral(x_l, x_r) / (x_r - x_l);
        }
        case AveragedPotentialRule::harmonic_integral_average: {
            if (!(omega > 0.0))
                throw ConfigError("harmonic_integral_average requires omega > 0");
            const double we = omega * epsilon;
            const double s = std::sin(we), c = std::cos(we);
            if (std::abs(s) < kResonanceTol)
                throw ResonanceError("harmonic_integral_average: sin(omega*epsilon) vanishes");
            const double R = std::sqrt(std::max(0.0, x_l * x_l + x_r * x_r - 2.0 * x_l * x_r * c));
            if (R == 0.0) return V(x_l); // both endpoints at the fixed point
            const double amp = R / s;
            const double theta_l = std::atan2(x_l * s / R, (x_r - x_l * c) / R);
            const double scale = 1.0 + std::abs(V(x_l)) + std::abs(V(x_r)) + std::abs(V(amp));
            const double integral = integrate_adaptive(
                [&](double th) { return V(amp * std::sin(th)); },
                theta_l, theta_l + we, 1e-12 * scale * std::abs(we));
            return integral / we;
        }
    }
    throw ConfigError("averaged_potential: unknown rule");
}

/// Per-step propagator data: reference, averaged-potential rule, step and
/// normalization.
struct ShortTimeKernel {
    LagrangianModel model;
    AveragedPotentialRule rule = AveragedPotentialRule::midpoint;
    double epsilon = 0.0;
    Reference reference = Reference::straight_line();

    static ShortTimeKernel create(LagrangianModel model, AveragedPotentialRule rule,
                                  double epsilon, Reference reference) {
        if (!(epsilon > 0.0)) throw ConfigError("ShortTimeKernel: epsilon must be > 0");
        if (model.time_dependent())
            throw ConfigError("ShortTimeKernel: time-dependent Lagrangians are not sliceable; "
                              "apply the xi = x e^{beta t} substitution first");
        if (reference.is_harmonic()) {
            if (!(reference.omega > 0.0))
                throw ConfigError("ShortTimeKernel: harmonic reference requires omega > 0");
            if (std::abs(std::sin(reference.omega * epsilon)) < kResonanceTol)
                throw ResonanceError("ShortTimeKernel: sin(omega*epsilon) vanishes");
        }
        return ShortTimeKernel{std::move(model), rule, epsilon, reference};
    }
};

/// Classical action of the reference L0 over one slice (no averaged
/// potential).
inline double reference_action(const ShortTimeKernel& k, double x_l, double x_r) {
    const double m = k.model.units.mass;
    if (!k.reference.is_harmonic()) {
        const double dx = x_r - x_l;
        return 0.5 * m * dx * dx / k.epsilon;
    }
    const double w = k.reference.omega;
    const double s = std::sin(w * k.epsilon), c = std::cos(w * k.epsilon);
    if (std::abs(s) < kResonanceTol)
        throw ResonanceError("reference_action: sin(omega*epsilon) vanishes");
    return 0.5 * m * w / s * ((x_l * x_l + x_r * x_r) * c - 2.0 * x_l * x_r);
}

/// Short-time action over one slice. With the straight-line reference the
/// averaged potential covers V0 + V1 (the Feynman-Hibbs partition); with the
/// harmonic reference the reference action absorbs V0 and the rule applies
/// to V1 only.
inline double short_time_action(const ShortTimeKernel& k, double x_l, double x_r) {
    const double omega = k.reference.is_harmonic() ? k.reference.omega : k.model.omega;
    double vbar;
    if (!k.reference.is_harmonic()) {
        const Potential& v0 = k.model.potential0;
        const Potential& v1 = k.model.potential1;
        const double a = v0.is_zero() ? 0.0
                                      : averaged_potential(k.rule, v0, x_l, x_r, k.epsilon, omega);
        const double b = v1.is_zero() ? 0.0
                                      : averaged_potential(k.rule, v1, x_l, x_r, k.epsilon, omega);
        vbar = a + b;
    } else {
        vbar = k.model.potential1.is_zero()
                   ? 0.0
                   : averaged_potential(k.rule, k.model.potential1, x_l, x_r, k.epsilon, omega);
    }
    return reference_action(k, x_l, x_r) - k.epsilon * vbar;
}

/// Normalization constant A fixed by the nascent-delta condition, on the
/// principal branch (sqrt(i) = e^{i pi/4}).
inline std::complex<double> normalization_constant(const ShortTimeKernel& k) {
    const double hbar = k.model.units.hbar, m = k.model.units.mass;
    if (!k.reference.is_harmonic())
        return std::sqrt(std::complex<double>(0.0, 2.0 * M_PI * hbar * k.epsilon / m));
    const double w = k.reference.omega;
    const double s = std::sin(w * k.epsilon);
    if (std::abs(s) < kResonanceTol)
        throw ResonanceError("normalization_constant: sin(omega*epsilon) vanishes");
    return std::sqrt(std::complex<double>(0.0, 2.0 * M_PI * hbar * s / (m * w)));
}

/// Numerical verification of the nascent-delta normalization:
/// int exp(i S0(x, 0)/hbar) dx by Fresnel-regularized quadrature.
inline FresnelResult normalization_fresnel_check(const ShortTimeKernel& k,
                                                 const FresnelOptions& opt = {}) {
    const double hbar = k.model.units.hbar;
    return fresnel_regularized_integral(
        [&k, hbar](double x) { return reference_action(k, x, 0.0) / hbar; }, opt);
}

/// (1/A) exp(i S / hbar).
inline std::complex<double> short_time_propagator(const ShortTimeKernel& k, double x_l, double x_r) {
    const std::complex<double> A = normalization_constant(k);
    const double S = short_time_action(k, x_l, x_r);
    return std::exp(std::complex<double>(0.0, S / k.model.units.hbar)) / A;
}

/// Piecewise reference-path interpolation through the slice node values.
/// samples_per_segment refines each slice; derivative samples belong to the
/// right-hand segment at interior nodes and to the last segment at t_b.
inline Path sliced_path(const std::vector<double>& points, const TimeGrid& grid,
                        const Reference& reference, int samples_per_segment = 1) {
    grid.validate();
    if (points.size() != static_cast<std::size_t>(grid.steps) + 1)
        throw ConfigError("sliced_path: need N+1 node values");
    if (samples_per_segment < 1) throw ConfigError("sliced_path: samples_per_segment >= 1");
    const double eps = grid.epsilon();
    double s = 0.0, c = 0.0, w = 0.0;
    if (reference.is_harmonic()) {
        w = reference.omega;
        s = std::sin(w * eps);
        c = std::cos(w * eps);
        (void)c;
        if (std::abs(s) < kResonanceTol)
            throw ResonanceError("sliced_path: sin(omega*epsilon) vanishes");
    }

    std::vector<double> t, x, v;
    const std::size_t total = static_cast<std::size_t>(grid.steps) *
                                  static_cast<std::size_t>(samples_per_segment) + 1;
    t.reserve(total); x.reserve(total); v.reserve(total);
    for (int n = 1; n <= grid.steps; ++n) {
        const double t0 = grid.node(n - 1), t1 = grid.node(n);
        const double xl = points[static_cast<std::size_t>(n - 1)];
        const double xr = points[static_cast<std::size_t>(n)];
        for (int j = 0; j < samples_per_segment; ++j) {
            const double tt = t0 + (t1 - t0) * static_cast<double>(j) / samples_per_segment;
            t.push_back(tt);
            if (!reference.is_harmonic()) {
                const double frac = static_cast<double>(j) / samples_per_segment;
                x.push_back(xl + (xr - xl) * frac);
                v.push_back((xr - xl) / eps);
            } else {
                const double ta = tt - t0, tb = t1 - tt;
                x.push_back((xr * std::sin(w * ta) + xl * std::sin(w * tb)) / s);
                v.push_back(w * (xr * std::cos(w * ta) - xl * std::cos(w * tb)) / s);
            }
        }
    }
    t.push_back(grid.t_b);
    x.push_back(points.back());
    if (!reference.is_harmonic()) {
        v.push_back((points.back() - points[points.size() - 2]) / eps);
    } else {
        const double xl = points[points.size() - 2], xr = points.back();
        v.push_back(w * (xr * std::cos(w * eps) - xl) / s);
    }
    return Path(std::move(t), std::move(x), std::move(v));
}

} // namespace pathprop
