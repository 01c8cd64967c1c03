#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pathprop/errors.hpp"
#include "pathprop/numerics.hpp"
#include "pathprop/path.hpp"
#include "pathprop/potential.hpp"
#include "pathprop/units.hpp"

namespace pathprop {

/// Which part of the potential lives in L0. `kinetic` is the Feynman-Hibbs
/// split L0 = T, L1 = -V; `harmonic_reference` moves the quadratic part into
/// L0 so a sinusoidal reference path can absorb it.
enum class Partition { kinetic, harmonic_reference };

/// L = g(t) * (m xdot^2/2 - V0(x) - V1(x)), partitioned as L0 = g*(T - V0),
/// L1 = -g*V1. The kinetic term is fixed to m xdot^2/2, which keeps the
/// velocity derivatives exact.
struct LagrangianModel {
    PhysicalUnits units{};
    Potential potential0 = Potential::zero(); // inside L0
    Potential potential1 = Potential::zero(); // L1 = -V1
    std::function<double(double)> time_prefactor; // empty = 1
    double omega = 0.0;
    double beta = 0.0;
    std::string kind = "custom";

    bool time_dependent() const { return static_cast<bool>(time_prefactor); }
    double prefactor(double t) const { return time_prefactor ? time_prefactor(t) : 1.0; }
    double potential_total(double x) const { return potential0(x) + potential1(x); }

    static LagrangianModel free(PhysicalUnits u = {}) {
        LagrangianModel m;
        m.units = u;
        m.kind = "free";
        return m;
    }

    static LagrangianModel harmonic(double omega, Partition part = Partition::kinetic,
                                    PhysicalUnits u = {}) {
        if (!(omega >= 0.0)) throw ConfigError("harmonic model: omega must be >= 0");
        LagrangianModel m;
        m.units = u;
        m.omega = omega;
        m.kind = "harmonic";
        Potential v = Potential::polynomial({0.0, 0.0, 0.5 * u.mass * omega * omega});
        if (part == Partition::harmonic_reference)
            m.potential0 = std::move(v);
        else
            m.potential1 = std::move(v);
        return m;
    }

    static LagrangianModel damped_harmonic(double omega, double beta, PhysicalUnits u = {}) {
        if (!(beta >= 0.0)) throw ConfigError("damped model: beta must be >= 0");
        LagrangianModel m = harmonic(omega, Partition::harmonic_reference, u);
        m.beta = beta;
        m.kind = "damped_harmonic";
        if (beta > 0.0)
            m.time_prefactor = [beta](double t) { return std::exp(2.0 * beta * t); };
        return m;
    }

    static LagrangianModel quartic(PhysicalUnits u = {}) {
        LagrangianModel m;
        m.units = u;
        m.kind = "quartic";
        m.potential1 = Potential::polynomial({0.0, 0.0, 0.0, 0.0, 0.25});
        return m;
    }

    static LagrangianModel custom_polynomial(std::vector<double> coeffs, PhysicalUnits u = {}) {
        LagrangianModel m;
        m.units = u;
        m.kind = "custom_polynomial";
        m.potential1 = Potential::polynomial(std::move(coeffs));
        return m;
    }
};

/// The L0 part of a partitioned model (drops L1 = -V1).
inline LagrangianModel l0_part(LagrangianModel m) {
    m.potential1 = Potential::zero();
    return m;
}

inline double eval_lagrangian(const LagrangianModel& model, double xdot, double x, double t) {
    const double val = model.prefactor(t) *
        (0.5 * model.units.mass * xdot * xdot - model.potential0(x) - model.potential1(x));
    if (!std::isfinite(val))
        throw NumericsError("eval_lagrangian: non-finite value at x = " + std::to_string(x) +
                            " (potential singularity)");
    return val;
}

// Partial derivatives of L. The kinetic term is structurally m xdot^2/2, so
// the velocity derivatives are exact; position derivatives go through the
// potentials (finite differences only for non-polynomial customs).
inline double dL_dxdot(const LagrangianModel& m, double xdot, double /*x*/, double t) {
    return m.prefactor(t) * m.units.mass * xdot;
}
inline double d2L_dxdot2(const LagrangianModel& m, double /*xdot*/, double /*x*/, double t) {
    return m.prefactor(t) * m.units.mass;
}
inline double dL_dx(const LagrangianModel& m, double /*xdot*/, double x, double t) {
    return -m.prefactor(t) * (m.potential0.derivative(x) + m.potential1.derivative(x));
}
inline double d2L_dx2(const LagrangianModel& m, double /*xdot*/, double x, double t) {
    return -m.prefactor(t) * (m.potential0.second_derivative(x) + m.potential1.second_derivative(x));
}

/// -d/dt(dL/dxdot) + dL/dx at the interior samples of a path. A classical
/// path yields residuals O(h^2) in the grid spacing.
inline std::vector<double> euler_lagrange_residual(const LagrangianModel& model, const Path& path) {
    const auto t = path.grid();
    const auto x = path.values();
    const auto v = path.derivative();
    if (t.size() < 5)
        throw NumericsError("euler_lagrange_residual: need >= 5 samples for central differences");
    std::vector<double> p(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) p[k] = dL_dxdot(model, v[k], x[k], t[k]);
    std::vector<double> res(t.size() - 2);
    for (std::size_t k = 1; k + 1 < t.size(); ++k) {
        const double dpdt = (p[k + 1] - p[k - 1]) / (t[k + 1] - t[k - 1]);
        res[k - 1] = -dpdt + dL_dx(model, v[k], x[k], t[k]);
    }
    return res;
}

struct LegendreReport {
    bool satisfied = false;
    double min_value = 0.0;
};

/// Legendre condition: d2L/dxdot2 >= 0 along the path.
inline LegendreReport legendre_check(const LagrangianModel& model, const Path& path) {
    const auto t = path.grid();
    const auto x = path.values();
    const auto v = path.derivative();
    double mn = d2L_dxdot2(model, v[0], x[0], t[0]);
    for (std::size_t k = 1; k < t.size(); ++k)
        mn = std::min(mn, d2L_dxdot2(model, v[k], x[k], t[k]));
    return {mn >= 0.0, mn};
}

/// A direction in the space of variations: eta vanishes at both endpoints.
struct VariationProbe {
    std::vector<double> direction;
    std::vector<double> direction_deriv;
    double scale = 1e-3; // base sigma step for the derivative stencil
    int order = 1;

    static VariationProbe from_callables(std::span<const double> grid,
                                         const std::function<double(double)>& eta,
                                         const std::function<double(double)>& eta_dot,
                                         int order, double scale = 1e-3) {
        VariationProbe p;
        p.order = order;
        p.scale = scale;
        p.direction.resize(grid.size());
        p.direction_deriv.resize(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            p.direction[k] = eta(grid[k]);
            p.direction_deriv[k] = eta_dot(grid[k]);
        }
        return p;
    }

    void validate(std::size_t grid_size) const {
        if (direction.size() != grid_size || direction_deriv.size() != grid_size)
            throw ConfigError("VariationProbe: direction not sampled on the base grid");
        if (order < 1 || order > 4)
            throw ConfigError("VariationProbe: order must be in {1,2,3,4}");
        double amp = 0.0;
        for (double d : direction) amp = std::max(amp, std::abs(d));
        const double tol = 1e-12 * std::max(1.0, amp);
        if (std::abs(direction.front()) > tol || std::abs(direction.back()) > tol)
            throw ConfigError("VariationProbe: direction must vanish at both endpoints");
    }
};

/// Trapezoid-rule action along a path.
inline double action_along(const LagrangianModel& model, const Path& path) {
    const auto t = path.grid();
    const auto x = path.values();
    const auto v = path.derivative();
    std::vector<double> f(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) f[k] = eval_lagrangian(model, v[k], x[k], t[k]);
    return trapezoid(t, f);
}

/// n-th Gateaux differential d^n/dsigma^n S[base + sigma*eta] at sigma = 0,
/// by a central stencil of width 2*order+1 on the numerically integrated
/// action.
inline double gateaux_variation(const LagrangianModel& model, const Path& base,
                                const VariationProbe& probe) {
    probe.validate(base.size());
    const auto t = base.grid();
    const auto x = base.values();
    const auto v = base.derivative();

    double path_norm = 0.0;
    for (double xv : x) path_norm = std::max(path_norm, std::abs(xv));
    const double h = probe.scale * std::max(1.0, path_norm);

    const int width = 2 * probe.order + 1;
    std::vector<double> nodes(static_cast<std::size_t>(width));
    for (int j = 0; j < width; ++j)
        nodes[static_cast<std::size_t>(j)] = h * static_cast<double>(j - probe.order);
    const auto weights = fornberg_weights(0.0, nodes, probe.order);

    std::vector<double> f(t.size());
    double acc = 0.0;
    for (int j = 0; j < width; ++j) {
        const double sigma = nodes[static_cast<std::size_t>(j)];
        for (std::size_t k = 0; k < t.size(); ++k)
            f[k] = eval_lagrangian(model, v[k] + sigma * probe.direction_deriv[k],
                                   x[k] + sigma * probe.direction[k], t[k]);
        acc += weights[static_cast<std::size_t>(j)] * trapezoid(t, f);
    }
    return acc;
}

struct DampedSubstitutionReport {
    double max_time_dependence = 0.0;   // sup_t spread of the transformed integrand at fixed (xidot, xi)
    double max_form_deviation = 0.0;    // sup |L_transformed - m(xidot^2 - 2 b xidot xi + (b^2-w^2) xi^2)/2|
    std::vector<double> transformed_values; // transformed Lagrangian along the path
};

/// Applies xi(t) = x(t) e^{beta t} and verifies the transformed Lagrangian
/// m(xidot^2 - 2 beta xidot xi + (beta^2 - omega^2) xi^2)/2 carries no
/// explicit time dependence.
inline DampedSubstitutionReport damped_substitution_check(const LagrangianModel& model,
                                                          const Path& path) {
    if (!(model.beta > 0.0)) throw ConfigError("damped_substitution_check: no damping (beta = 0)");
    const double b = model.beta, w = model.omega, mass = model.units.mass;
    const auto t = path.grid();
    const auto x = path.values();
    const auto v = path.derivative();
    const std::size_t n = t.size();

    // The original L expressed in the transformed variables.
    auto transformed = [&](double xidot, double xi, double tt) {
        const double e = std::exp(-b * tt);
        return eval_lagrangian(model, e * (xidot - b * xi), e * xi, tt);
    };

    DampedSubstitutionReport rep;
    std::vector<double> xi(n), xidot(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double e = std::exp(b * t[k]);
        xi[k] = x[k] * e;
        xidot[k] = (v[k] + b * x[k]) * e;
    }
    rep.transformed_values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double val = transformed(xidot[k], xi[k], t[k]);
        rep.transformed_values[k] = val;
        const double closed = 0.5 * mass *
            (xidot[k] * xidot[k] - 2.0 * b * xidot[k] * xi[k] + (b * b - w * w) * xi[k] * xi[k]);
        rep.max_form_deviation = std::max(rep.max_form_deviation, std::abs(val - closed));
    }
    // Fixed-(xidot, xi) probes swept across the whole grid.
    const std::size_t probes = std::min<std::size_t>(8, n);
    for (std::size_t i = 0; i < probes; ++i) {
        const std::size_t k = i * (n - 1) / std::max<std::size_t>(1, probes - 1);
        const double ref = transformed(xidot[k], xi[k], t[0]);
        for (std::size_t j = 0; j < n; ++j) {
            const double val = transformed(xidot[k], xi[k], t[j]);
            rep.max_time_dependence = std::max(rep.max_time_dependence, std::abs(val - ref));
        }
    }
    return rep;
}

} // namespace pathprop
