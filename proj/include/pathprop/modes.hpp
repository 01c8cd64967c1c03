#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pathprop/errors.hpp"
#include "pathprop/model.hpp"
#include "pathprop/numerics.hpp"
#include "pathprop/path.hpp"
#include "pathprop/slicing.hpp"
#include "pathprop/sturm_liouville.hpp"

namespace pathprop {

enum class ModeFamily { sine, free_periodic, numeric };

/// Eigenfunctions u_n of the second-variation Sturm-Liouville problem with
/// vanishing Dirichlet boundary values, orthogonal under the weight
/// w(t) = d2L0/dxdot2 along the classical path and normalized to
/// <u_n, u_n>_w = T/2 (the sine convention).
struct ModeBasis {
    ModeFamily family = ModeFamily::sine;
    double t_a = 0.0;
    double t_b = 1.0;
    std::vector<int> indices;   // original mode numbers, 1-based
    std::vector<double> lambdas;
    std::vector<double> grid;   // uniform sample grid over [t_a, t_b]
    Eigen::MatrixXd values;     // grid.size() x count samples (numeric family)
    Eigen::MatrixXd derivs;
    std::vector<double> weight; // w(t_k) on the grid
    double omega = 0.0;         // harmonic shift bookkeeping
    bool subsidiary_checked = false;

    int count() const { return static_cast<int>(indices.size()); }
    double duration() const { return t_b - t_a; }

    double wavenumber(int m) const {
        const double base = (family == ModeFamily::free_periodic) ? 2.0 * M_PI : M_PI;
        return base * static_cast<double>(indices[static_cast<std::size_t>(m)]) / duration();
    }

    double u(int m, double t) const {
        if (family != ModeFamily::numeric) return std::sin(wavenumber(m) * (t - t_a));
        return interp(values, m, t);
    }
    double du(int m, double t) const {
        if (family != ModeFamily::numeric) {
            const double k = wavenumber(m);
            return k * std::cos(k * (t - t_a));
        }
        return interp(derivs, m, t);
    }
    double weight_at(std::size_t k) const { return weight.empty() ? 1.0 : weight[k]; }

private:
    double interp(const Eigen::MatrixXd& table, int m, double t) const {
        const double h = grid[1] - grid[0];
        double s = (t - t_a) / h;
        std::size_t k = static_cast<std::size_t>(std::floor(s));
        if (k >= grid.size() - 1) k = grid.size() - 2;
        const double w1 = s - static_cast<double>(k);
        return (1.0 - w1) * table(static_cast<Eigen::Index>(k), m) +
               w1 * table(static_cast<Eigen::Index>(k + 1), m);
    }
};

struct ModeAmplitudes {
    std::vector<double> a;
};

/// Linear maps between interior slice values {y_n} and mode amplitudes
/// {a_n}. jacobian_det is the determinant of the y -> a map.
struct TransformPair {
    Eigen::MatrixXd slice_to_series; // y -> a
    Eigen::MatrixXd series_to_slice; // a -> y (mode values at the nodes)
    double jacobian_det = 0.0;
    double log_abs_jacobian_det = 0.0;
    int slice_count = 0;
};

namespace detail {

inline std::vector<double> sample_weight(const std::function<double(double)>& w,
                                         const std::vector<double>& grid) {
    std::vector<double> out(grid.size(), 1.0);
    if (w)
        for (std::size_t k = 0; k < grid.size(); ++k) out[k] = w(grid[k]);
    return out;
}

inline void fill_analytic_samples(ModeBasis& b) {
    const std::size_t g = b.grid.size();
    b.values.resize(static_cast<Eigen::Index>(g), b.count());
    b.derivs.resize(static_cast<Eigen::Index>(g), b.count());
    for (int m = 0; m < b.count(); ++m)
        for (std::size_t k = 0; k < g; ++k) {
            b.values(static_cast<Eigen::Index>(k), m) = b.u(m, b.grid[k]);
            b.derivs(static_cast<Eigen::Index>(k), m) = b.du(m, b.grid[k]);
        }
}

} // namespace detail

/// Feynman-Hibbs Fourier sine family: u_n = sin(n pi (t - t_a)/T),
/// lambda_n = (n pi / T)^2, unit weight.
inline ModeBasis fourier_sine_basis(double t_a, double t_b, int modes, std::size_t samples = 1001) {
    if (modes < 1) throw ConfigError("fourier_sine_basis: need modes >= 1");
    if (!(t_b > t_a)) throw ConfigError("fourier_sine_basis: t_b must exceed t_a");
    ModeBasis b;
    b.family = ModeFamily::sine;
    b.t_a = t_a;
    b.t_b = t_b;
    const double T = t_b - t_a;
    for (int n = 1; n <= modes; ++n) {
        b.indices.push_back(n);
        b.lambdas.push_back((n * M_PI / T) * (n * M_PI / T));
    }
    b.grid = uniform_grid(t_a, t_b, samples);
    b.weight.assign(samples, 1.0);
    detail::fill_analytic_samples(b);
    return b;
}

/// Full-period family u_n = sin(2 n pi (t - t_a)/T): the eigenfunctions that
/// satisfy the subsidiary condition for constant xdot_cl.
inline ModeBasis free_mode_basis(double t_a, double t_b, int modes, std::size_t samples = 1001) {
    ModeBasis b = fourier_sine_basis(t_a, t_b, modes, samples);
    b.family = ModeFamily::free_periodic;
    const double T = t_b - t_a;
    for (int n = 1; n <= modes; ++n)
        b.lambdas[static_cast<std::size_t>(n - 1)] = (2.0 * n * M_PI / T) * (2.0 * n * M_PI / T);
    detail::fill_analytic_samples(b);
    return b;
}

/// Numerical Sturm-Liouville basis: -(w u')' + q u = lambda w u on the
/// classical path's grid, with w = d2L0/dxdot2 and q assembled from the
/// Jacobi coefficient d2L0/dx2 - d/dt(d2L0/dxdot dx) along the path (the
/// cross term vanishes for the structured kinetic form). A user-supplied
/// q(t) can override the assembly for Lagrangians outside that structure
/// (experimental).
inline ModeBasis sturm_liouville_basis(const LagrangianModel& l0, const Path& x_cl, int modes,
                                       std::optional<std::function<double(double)>> experimental_q
                                       = std::nullopt) {
    const auto t = x_cl.grid();
    const auto xv = x_cl.values();
    const auto dv = x_cl.derivative();
    const std::size_t g = t.size();
    if (modes < 1) throw ConfigError("sturm_liouville_basis: need modes >= 1");
    if (static_cast<std::size_t>(modes) > (g - 1) / 4)
        throw ConfigError("sturm_liouville_basis: grid too coarse for " + std::to_string(modes) +
                          " modes (need > 4 samples per mode)");
    const double h = t[1] - t[0];

    std::vector<double> w(g), q(g);
    double wmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g; ++k) {
        w[k] = d2L_dxdot2(l0, dv[k], xv[k], t[k]);
        wmin = std::min(wmin, w[k]);
        q[k] = experimental_q ? (*experimental_q)(t[k]) : d2L_dx2(l0, dv[k], xv[k], t[k]);
    }
    if (!(wmin > 0.0))
        throw NumericsError("sturm_liouville_basis: Legendre weight is not strictly positive");

    // Interior symmetric reduction C = D^{-1/2} A D^{-1/2}, D = diag(w).
    const std::size_t ni = g - 2;
    std::vector<double> diag(ni), off(ni - 1);
    for (std::size_t k = 1; k + 1 < g; ++k) {
        const double wm = 0.5 * (w[k - 1] + w[k]);
        const double wp = 0.5 * (w[k] + w[k + 1]);
        diag[k - 1] = ((wm + wp) / (h * h) + q[k]) / w[k];
        if (k + 2 < g) off[k - 1] = -wp / (h * h * std::sqrt(w[k] * w[k + 1]));
    }

    ModeBasis b;
    b.family = ModeFamily::numeric;
    b.t_a = t.front();
    b.t_b = t.back();
    b.omega = l0.omega;
    b.grid.assign(t.begin(), t.end());
    b.weight = w;
    b.values.setZero(static_cast<Eigen::Index>(g), modes);
    b.derivs.setZero(static_cast<Eigen::Index>(g), modes);
    const double T = b.duration();
    for (int m = 0; m < modes; ++m) {
        const double lam = tridiag::eigenvalue_by_bisection(diag, off, m);
        Eigen::VectorXd v = tridiag::eigenvector(diag, off, lam);
        b.indices.push_back(m + 1);
        b.lambdas.push_back(lam);
        // u = D^{-1/2} v padded with the Dirichlet zeros.
        Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g));
        for (std::size_t k = 0; k < ni; ++k)
            u[static_cast<Eigen::Index>(k + 1)] = v[static_cast<Eigen::Index>(k)] / std::sqrt(w[k + 1]);
        // Normalize <u, u>_w = T/2 in the trapezoid inner product (the one
        // the discrete eigenproblem is orthogonal under; exact for the sine
        // family on a uniform grid).
        double nrm2 = 0.0;
        for (std::size_t k = 0; k < g; ++k) {
            const double c = (k == 0 || k + 1 == g) ? 0.5 : 1.0;
            nrm2 += c * h * w[k] * u[static_cast<Eigen::Index>(k)] * u[static_cast<Eigen::Index>(k)];
        }
        u *= std::sqrt(0.5 * T / nrm2);
        // Sign fix: first appreciable component positive.
        double amp = u.cwiseAbs().maxCoeff();
        for (Eigen::Index k = 0; k < u.size(); ++k) {
            if (std::abs(u[k]) > 1e-8 * amp) {
                if (u[k] < 0.0) u = -u;
                break;
            }
        }
        b.values.col(m) = u;
        // Derivative samples: central interior, one-sided second order ends.
        b.derivs(0, m) = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
        for (std::size_t k = 1; k + 1 < g; ++k)
            b.derivs(static_cast<Eigen::Index>(k), m) =
                (u[static_cast<Eigen::Index>(k + 1)] - u[static_cast<Eigen::Index>(k - 1)]) / (2.0 * h);
        b.derivs(static_cast<Eigen::Index>(g - 1), m) =
            (3.0 * u[static_cast<Eigen::Index>(g - 1)] - 4.0 * u[static_cast<Eigen::Index>(g - 2)] +
             u[static_cast<Eigen::Index>(g - 3)]) / (2.0 * h);
    }
    return b;
}

/// Largest relative off-diagonal weighted Gram entry; the orthogonality
/// diagnostic used by the projection routines. Uses the trapezoid inner
/// product, under which the discrete Sturm-Liouville eigenvectors are
/// orthogonal by construction.
inline double max_cross_term(const ModeBasis& b) {
    const std::size_t g = b.grid.size();
    const double h = b.grid[1] - b.grid[0];
    const int M = b.count();
    double worst = 0.0, norm_scale = 0.0;
    for (int m = 0; m < M; ++m) {
        for (int n = m; n < M; ++n) {
            double val = 0.0;
            for (std::size_t k = 0; k < g; ++k) {
                const double c = (k == 0 || k + 1 == g) ? 0.5 : 1.0;
                val += c * h * b.weight_at(k) * b.values(static_cast<Eigen::Index>(k), m) *
                       b.values(static_cast<Eigen::Index>(k), n);
            }
            if (m == n)
                norm_scale = std::max(norm_scale, std::abs(val));
            else
                worst = std::max(worst, std::abs(val));
        }
    }
    return worst / std::max(norm_scale, 1e-300);
}

struct SubsidiaryReport {
    std::vector<int> rejected;        // original mode numbers
    std::vector<double> integrals;    // one per input mode
    double scale = 0.0;
    std::string boundary_note;        // harmonic boundary-data relation
};

/// Keeps the modes with vanishing int (dL0/dxdot_cl) u_n dt. For a harmonic
/// x_cl the report records the paper's boundary relation: x_b = x_a keeps
/// odd n, x_b = -x_a keeps even n.
inline std::pair<ModeBasis, SubsidiaryReport> subsidiary_filter(const ModeBasis& basis,
                                                                const LagrangianModel& l0,
                                                                const Path& x_cl,
                                                                double tol = 1e-8) {
    const auto t = x_cl.grid();
    const auto xv = x_cl.values();
    const auto dv = x_cl.derivative();
    if (std::abs(t.front() - basis.t_a) > 1e-12 || std::abs(t.back() - basis.t_b) > 1e-12)
        throw ConfigError("subsidiary_filter: basis and path must share the interval");
    const std::size_t g = t.size();
    const double h = t[1] - t[0];

    std::vector<double> p(g);
    double pmax = 0.0;
    for (std::size_t k = 0; k < g; ++k) {
        p[k] = dL_dxdot(l0, dv[k], xv[k], t[k]);
        pmax = std::max(pmax, std::abs(p[k]));
    }
    SubsidiaryReport rep;
    rep.scale = std::max(pmax * (t.back() - t.front()), 1e-300);

    ModeBasis kept = basis;
    kept.indices.clear();
    kept.lambdas.clear();
    std::vector<Eigen::Index> keep_cols;
    std::vector<double> f(g);
    for (int m = 0; m < basis.count(); ++m) {
        for (std::size_t k = 0; k < g; ++k) f[k] = p[k] * basis.u(m, t[k]);
        const double integral = simpson_uniform(h, f);
        rep.integrals.push_back(integral);
        if (std::abs(integral) <= tol * rep.scale) {
            kept.indices.push_back(basis.indices[static_cast<std::size_t>(m)]);
            kept.lambdas.push_back(basis.lambdas[static_cast<std::size_t>(m)]);
            keep_cols.push_back(m);
        } else {
            rep.rejected.push_back(basis.indices[static_cast<std::size_t>(m)]);
        }
    }
    Eigen::MatrixXd vals(basis.values.rows(), static_cast<Eigen::Index>(keep_cols.size()));
    Eigen::MatrixXd ders(basis.derivs.rows(), static_cast<Eigen::Index>(keep_cols.size()));
    for (std::size_t c = 0; c < keep_cols.size(); ++c) {
        vals.col(static_cast<Eigen::Index>(c)) = basis.values.col(keep_cols[c]);
        ders.col(static_cast<Eigen::Index>(c)) = basis.derivs.col(keep_cols[c]);
    }
    kept.values = std::move(vals);
    kept.derivs = std::move(ders);
    kept.subsidiary_checked = true;
    if (l0.omega > 0.0)
        rep.boundary_note = "harmonic x_cl: the subsidiary condition requires x_b = x_a for odd n "
                            "and x_b = -x_a for even n";
    return {std::move(kept), std::move(rep)};
}

struct StabilityReport {
    bool stable = false;
    std::optional<int> first_nonpositive;  // original mode number
    std::optional<int> threshold_index;    // ceil(omega T / pi) for harmonic parameters
};

/// Stable iff every retained eigenvalue is strictly positive (lambda = 0 is
/// the boundary and counts as unstable).
inline StabilityReport stability_check(const ModeBasis& basis) {
    StabilityReport rep;
    rep.stable = true;
    for (int m = 0; m < basis.count(); ++m) {
        if (!(basis.lambdas[static_cast<std::size_t>(m)] > 0.0)) {
            rep.stable = false;
            rep.first_nonpositive = basis.indices[static_cast<std::size_t>(m)];
            break;
        }
    }
    if (basis.omega > 0.0)
        rep.threshold_index =
            static_cast<int>(std::ceil(basis.omega * basis.duration() / M_PI));
    return rep;
}

namespace detail {

// Exact integral of (y0 + slope * tau) * sin(k * (tau + d)) over tau in
// [0, dt]: the building block for projecting piecewise-linear paths onto
// trigonometric modes.
inline double linear_times_sine(double y0, double slope, double k, double d, double dt) {
    const double s0 = std::sin(k * d), c0 = std::cos(k * d);
    const double s1 = std::sin(k * (d + dt)), c1 = std::cos(k * (d + dt));
    const double term0 = y0 * (c0 - c1) / k;
    const double term1 = slope * (-dt * c1 / k + (s1 - s0) / (k * k));
    return term0 + term1;
}

} // namespace detail

/// Royer-style fit: mode amplitudes from the values of y at the interior
/// slice nodes, a = B^{-1} y with B[n][m] = u_m(t_n). Requires as many
/// retained modes as interior nodes.
inline TransformPair slice_to_series(const ModeBasis& basis, const TimeGrid& grid) {
    grid.validate();
    const int N = grid.steps;
    if (basis.family == ModeFamily::free_periodic && N % 2 == 0)
        throw EvenSliceCountError(N);
    if (basis.count() != N - 1)
        throw ConfigError("slice_to_series: retained mode count must equal N-1 interior nodes");
    Eigen::MatrixXd B(N - 1, N - 1);
    for (int n = 1; n < N; ++n)
        for (int m = 0; m < N - 1; ++m)
            B(n - 1, m) = basis.u(m, grid.node(n));

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double cond = smax / std::max(smin, 1e-300);
    if (!(smin > 1e-12 * smax))
        throw SingularTransformError(
            "slice_to_series: interpolation matrix is singular (condition number " +
                std::to_string(cond) + "); the projection method remains applicable",
            cond);

    TransformPair pair;
    pair.slice_count = N;
    pair.series_to_slice = B;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    pair.slice_to_series = lu.solve(Eigen::MatrixXd::Identity(N - 1, N - 1));
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < B.rows(); ++i)
        logdet += std::log(std::abs(lu.matrixLU()(i, i)));
    pair.log_abs_jacobian_det = -logdet; // det of y -> a = 1/det(B)
    pair.jacobian_det = std::exp(pair.log_abs_jacobian_det);
    return pair;
}

enum class ProjectionQuadrature {
    piecewise_linear_exact, // continuum projection of the interpolated path
    node_sum                // discrete orthogonality over the slice nodes
};

struct ProjectionResult {
    ModeAmplitudes amplitudes;
    TransformPair transform;
};

/// Orthogonality-based fit a_n = <w u_n, y>/<w u_n, u_n>. The default
/// quadrature treats y as the piecewise-linear sliced path and integrates
/// each segment exactly (trigonometric families), reproducing the hat-kernel
/// prefactors of the closed-form free-mode projection. The node_sum
/// quadrature evaluates the inner products as sums over the slice nodes,
/// which is exact for mode-limited node data.
inline ProjectionResult series_by_projection(const ModeBasis& basis, const Path& sliced_y,
                                             ProjectionQuadrature quad =
                                                 ProjectionQuadrature::piecewise_linear_exact) {
    const auto t = sliced_y.grid();
    const auto y = sliced_y.values();
    const std::size_t nodes = t.size();
    const int N = static_cast<int>(nodes) - 1; // segments
    double amp = 0.0;
    for (double v : y) amp = std::max(amp, std::abs(v));
    if (std::abs(y.front()) > 1e-12 * std::max(1.0, amp) ||
        std::abs(y.back()) > 1e-12 * std::max(1.0, amp))
        throw ConfigError("series_by_projection: sliced path must vanish at the endpoints");
    if (basis.family == ModeFamily::free_periodic && N % 2 == 0)
        throw EvenSliceCountError(N);
    if (basis.family == ModeFamily::numeric && max_cross_term(basis) > 1e-6)
        throw NumericsError("series_by_projection: basis is not orthogonal under its weight");

    const int M = basis.count();
    Eigen::MatrixXd P(M, N - 1);

    if (quad == ProjectionQuadrature::node_sum) {
        for (int m = 0; m < M; ++m) {
            double denom = 0.0;
            std::vector<double> row(static_cast<std::size_t>(N - 1));
            for (int j = 1; j < N; ++j) {
                const double wj = 1.0; // constant weights cancel in the ratio
                const double uj = basis.u(m, t[static_cast<std::size_t>(j)]);
                row[static_cast<std::size_t>(j - 1)] = wj * uj;
                denom += wj * uj * uj;
            }
            if (!(denom > 1e-12 * static_cast<double>(N)))
                throw NumericsError("series_by_projection: mode " +
                                    std::to_string(basis.indices[static_cast<std::size_t>(m)]) +
                                    " vanishes at every slice node");
            for (int j = 1; j < N; ++j) P(m, j - 1) = row[static_cast<std::size_t>(j - 1)] / denom;
        }
    } else {
        const double T = basis.duration();
        for (int m = 0; m < M; ++m) {
            double denom;
            if (basis.family != ModeFamily::numeric) {
                denom = 0.5 * T; // exact for full sine/free periods
            } else {
                const double h = basis.grid[1] - basis.grid[0];
                std::vector<double> f(basis.grid.size());
                for (std::size_t k = 0; k < basis.grid.size(); ++k)
                    f[k] = basis.weight_at(k) * basis.values(static_cast<Eigen::Index>(k), m) *
                           basis.values(static_cast<Eigen::Index>(k), m);
                denom = simpson_uniform(h, f);
            }
            for (int j = 1; j < N; ++j) {
                // Unit hat centered at node j spanning two segments.
                double num = 0.0;
                if (basis.family != ModeFamily::numeric) {
                    const double k = basis.wavenumber(m);
                    const double tl = t[static_cast<std::size_t>(j - 1)];
                    const double tj = t[static_cast<std::size_t>(j)];
                    const double tr = t[static_cast<std::size_t>(j + 1)];
                    num += detail::linear_times_sine(0.0, 1.0 / (tj - tl), k, tl - basis.t_a, tj - tl);
                    num += detail::linear_times_sine(1.0, -1.0 / (tr - tj), k, tj - basis.t_a, tr - tj);
                } else {
                    const double tl = t[static_cast<std::size_t>(j - 1)];
                    const double tj = t[static_cast<std::size_t>(j)];
                    const double tr = t[static_cast<std::size_t>(j + 1)];
                    auto hat = [&](double tt) {
                        if (tt <= tl || tt >= tr) return 0.0;
                        return tt <= tj ? (tt - tl) / (tj - tl) : (tr - tt) / (tr - tj);
                    };
                    num = integrate_adaptive(
                        [&](double tt) {
                            const double h = basis.grid[1] - basis.grid[0];
                            std::size_t kk = std::min(basis.grid.size() - 2,
                                static_cast<std::size_t>(std::max(0.0, (tt - basis.t_a) / h)));
                            const double wloc = 0.5 * (basis.weight_at(kk) + basis.weight_at(kk + 1));
                            return wloc * basis.u(m, tt) * hat(tt);
                        },
                        tl, tr, 1e-12);
                }
                P(m, j - 1) = num / denom;
            }
        }
    }

    ProjectionResult out;
    out.transform.slice_count = N;
    out.transform.slice_to_series = P;
    out.transform.series_to_slice.resize(N - 1, M);
    for (int j = 1; j < N; ++j)
        for (int m = 0; m < M; ++m)
            out.transform.series_to_slice(j - 1, m) = basis.u(m, t[static_cast<std::size_t>(j)]);

    out.amplitudes.a.resize(static_cast<std::size_t>(M));
    Eigen::VectorXd yv(N - 1);
    for (int j = 1; j < N; ++j) yv(j - 1) = y[static_cast<std::size_t>(j)];
    Eigen::VectorXd av = P * yv;
    for (int m = 0; m < M; ++m) out.amplitudes.a[static_cast<std::size_t>(m)] = av(m);

    if (M == N - 1) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(P);
        double logdet = 0.0;
        bool ok = true;
        for (Eigen::Index i = 0; i < P.rows(); ++i) {
            const double piv = std::abs(lu.matrixLU()(i, i));
            if (!(piv > 0.0)) { ok = false; break; }
            logdet += std::log(piv);
        }
        out.transform.log_abs_jacobian_det = ok ? logdet : -std::numeric_limits<double>::infinity();
        out.transform.jacobian_det = ok ? std::exp(logdet) : 0.0;
    } else {
        out.transform.jacobian_det = std::numeric_limits<double>::quiet_NaN();
        out.transform.log_abs_jacobian_det = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

/// Mode synthesis y(t) = sum_n a_n u_n(t).
inline double synthesize_value(const ModeBasis& basis, const ModeAmplitudes& amps, double t) {
    double acc = 0.0;
    for (int m = 0; m < basis.count(); ++m)
        acc += amps.a[static_cast<std::size_t>(m)] * basis.u(m, t);
    return acc;
}
inline double synthesize_derivative(const ModeBasis& basis, const ModeAmplitudes& amps, double t) {
    double acc = 0.0;
    for (int m = 0; m < basis.count(); ++m)
        acc += amps.a[static_cast<std::size_t>(m)] * basis.du(m, t);
    return acc;
}

enum class JacobianKind { sine, free_periodic };

/// log of the collected-terms limit of J_{N-1}:
/// sine -> (N-1)! (pi/sqrt2)^{N-1} (eps/T)^{N/2};
/// free -> (N-1)! (2 pi/sqrt2)^{N-1} (eps/T)^{N/2}.
inline double asymptotic_jacobian_log(JacobianKind kind, int N) {
    if (N < 2) throw ConfigError("asymptotic_jacobian: need N >= 2");
    const double base = (kind == JacobianKind::free_periodic ? 2.0 * M_PI : M_PI) / std::sqrt(2.0);
    return std::lgamma(static_cast<double>(N)) + (N - 1) * std::log(base) -
           0.5 * N * std::log(static_cast<double>(N));
}

/// Quadratic-Lagrangian fluctuation factor by mode-ratio regularization
/// against the free spectrum, with the analytic tail
/// prod_{n>M} (1 - (wT/n pi)^2) = sin(wT)/(wT) / prod_{n<=M}(...).
inline std::complex<double> fluctuation_factor(const LagrangianModel& l0, double t_a, double t_b,
                                               long modes) {
    if (!(t_b > t_a)) throw ConfigError("fluctuation_factor: t_b must exceed t_a");
    const double T = t_b - t_a;
    const double hbar = l0.units.hbar, m = l0.units.mass;
    const std::complex<double> free_factor =
        1.0 / std::sqrt(std::complex<double>(0.0, 2.0 * M_PI * hbar * T / m));
    const double w = l0.omega;
    if (w == 0.0) return free_factor;
    if (std::abs(std::sin(w * T)) < kResonanceTol)
        throw ResonanceError("fluctuation_factor: omega T is a multiple of pi");
    const double z = w * T / M_PI;
    double log_ratio = 0.0;    // sum over retained modes of log(lambda0/lambda)
    double log_partial = 0.0;  // sum over retained modes of log(1 - z^2/n^2)
    for (long n = 1; n <= modes; ++n) {
        const double lam0 = (n * M_PI / T) * (n * M_PI / T);
        const double lam = lam0 - w * w;
        if (!(lam > 0.0))
            throw InstabilityError("fluctuation_factor: lambda_" + std::to_string(n) +
                                   " <= 0 (omega T exceeds the stability bound n pi)");
        log_ratio += std::log(lam0 / lam);
        log_partial += std::log1p(-z * z / (static_cast<double>(n) * static_cast<double>(n)));
    }
    // Tail of the infinite ratio product from the sinc identity.
    const double log_tail = log_partial - std::log(std::sin(w * T) / (w * T));
    return free_factor * std::exp(0.5 * (log_ratio + log_tail));
}

/// fluctuation factor from explicitly computed eigenvalues (no analytic
/// tail); supplied for numeric Sturm-Liouville bases.
inline std::complex<double> fluctuation_factor(const ModeBasis& basis, const PhysicalUnits& units) {
    const double T = basis.duration();
    const std::complex<double> free_factor =
        1.0 / std::sqrt(std::complex<double>(0.0, 2.0 * M_PI * units.hbar * T / units.mass));
    double log_ratio = 0.0;
    for (int m = 0; m < basis.count(); ++m) {
        const double lam = basis.lambdas[static_cast<std::size_t>(m)];
        if (!(lam > 0.0))
            throw InstabilityError("fluctuation_factor: non-positive eigenvalue in basis");
        const int n = basis.indices[static_cast<std::size_t>(m)];
        const double lam0 = (n * M_PI / T) * (n * M_PI / T);
        log_ratio += std::log(lam0 / lam);
    }
    return free_factor * std::exp(0.5 * log_ratio);
}

struct ShiftedActionResult {
    double shifted = 0.0; // L0(xdot_cl + sum sqrt(lambda_n) a_n u_n, x_cl, t)
    double direct = 0.0;  // L0 along x_cl + sum a_n u_n by quadrature
    double difference = 0.0;
};

/// Evaluates S0[x_cl + y] both through the eigenvalue-shifted velocity form
/// and directly, returning both for validation.
inline ShiftedActionResult shifted_action_series(const LagrangianModel& l0, const Path& x_cl,
                                                 const ModeBasis& basis,
                                                 const ModeAmplitudes& amps) {
    if (!basis.subsidiary_checked)
        throw ConfigError("shifted_action_series: apply subsidiary_filter to the basis first");
    if (amps.a.size() != static_cast<std::size_t>(basis.count()))
        throw ConfigError("shifted_action_series: amplitude count does not match the basis");
    const auto t = x_cl.grid();
    const auto xv = x_cl.values();
    const auto dv = x_cl.derivative();
    const std::size_t g = t.size();
    const double h = t[1] - t[0];

    std::vector<double> f_shift(g), f_direct(g);
    for (std::size_t k = 0; k < g; ++k) {
        double y = 0.0, ydot = 0.0, ylam = 0.0;
        for (int m = 0; m < basis.count(); ++m) {
            const double a = amps.a[static_cast<std::size_t>(m)];
            y += a * basis.u(m, t[k]);
            ydot += a * basis.du(m, t[k]);
            ylam += a * std::sqrt(std::max(0.0, basis.lambdas[static_cast<std::size_t>(m)])) *
                    basis.u(m, t[k]);
        }
        f_shift[k] = eval_lagrangian(l0, dv[k] + ylam, xv[k], t[k]);
        f_direct[k] = eval_lagrangian(l0, dv[k] + ydot, xv[k] + y, t[k]);
    }
    ShiftedActionResult r;
    r.shifted = simpson_uniform(h, f_shift);
    r.direct = simpson_uniform(h, f_direct);
    r.difference = r.shifted - r.direct;
    return r;
}

} // namespace pathprop
