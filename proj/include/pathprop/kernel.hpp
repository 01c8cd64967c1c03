#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <vector>

#include "pathprop/errors.hpp"
#include "pathprop/slicing.hpp"

namespace pathprop {

/// Spatial discretization of the convolution integrals.
struct SpaceGrid {
    double x_min = -10.0;
    double x_max = 10.0;
    int points = 3;

    void validate() const {
        if (points < 3) throw ConfigError("SpaceGrid: need >= 3 points");
        if (!(x_max > x_min)) throw ConfigError("SpaceGrid: x_max must exceed x_min");
    }
    double spacing() const { return (x_max - x_min) / static_cast<double>(points - 1); }
    double node(int i) const { return x_min + spacing() * static_cast<double>(i); }
    /// Trapezoid quadrature weight of node j; the endpoint halving keeps the
    /// truncated convolution second-order accurate at the hard wall. The
    /// weights are folded into kernel matrices symmetrically (sqrt on each
    /// index), which preserves both the spectrum and matrix symmetry.
    double weight(int j) const {
        return (j == 0 || j == points - 1) ? 0.5 * spacing() : spacing();
    }
};

enum class TimeMode { real_time, imaginary_time };

/// Propagator discretized on a spatial grid; the grid spacing is folded into
/// the entries so composition is a plain matrix product. Outside the grid
/// the kernel is truncated to zero (hard wall).
struct KernelMatrix {
    SpaceGrid grid;
    TimeMode mode = TimeMode::imaginary_time;
    double step = 0.0;  // epsilon of one factor
    int steps = 1;      // how many short-time factors are composed
    Eigen::MatrixXcd entries;

    double total_time() const { return step * steps; }
};

namespace detail {

// Euclidean (Wick-rotated, epsilon -> -i epsilon) slice action: real and
// positive-definite for the bundled confining models.
inline double euclidean_action(const ShortTimeKernel& k, double x_l, double x_r) {
    const double m = k.model.units.mass;
    double s0;
    double vbar;
    if (!k.reference.is_harmonic()) {
        const double dx = x_r - x_l;
        s0 = 0.5 * m * dx * dx / k.epsilon;
        const double omega = k.model.omega;
        const Potential& v0 = k.model.potential0;
        const Potential& v1 = k.model.potential1;
        vbar = (v0.is_zero() ? 0.0 : averaged_potential(k.rule, v0, x_l, x_r, k.epsilon, omega)) +
               (v1.is_zero() ? 0.0 : averaged_potential(k.rule, v1, x_l, x_r, k.epsilon, omega));
    } else {
        const double w = k.reference.omega;
        const double sh = std::sinh(w * k.epsilon), ch = std::cosh(w * k.epsilon);
        s0 = 0.5 * m * w / sh * ((x_l * x_l + x_r * x_r) * ch - 2.0 * x_l * x_r);
        vbar = k.model.potential1.is_zero()
                   ? 0.0
                   : averaged_potential(k.rule, k.model.potential1, x_l, x_r, k.epsilon, w);
    }
    return s0 + k.epsilon * vbar;
}

inline double euclidean_normalization(const ShortTimeKernel& k) {
    const double hbar = k.model.units.hbar, m = k.model.units.mass;
    if (!k.reference.is_harmonic()) return std::sqrt(2.0 * M_PI * hbar * k.epsilon / m);
    const double w = k.reference.omega;
    return std::sqrt(2.0 * M_PI * hbar * std::sinh(w * k.epsilon) / (m * w));
}

// One-step Euclidean kernel as a real matrix (used directly for spectra).
inline Eigen::MatrixXd euclidean_step_matrix(const ShortTimeKernel& k, const SpaceGrid& grid) {
    grid.validate();
    const int P = grid.points;
    const double hbar = k.model.units.hbar;
    const double A = euclidean_normalization(k);
    Eigen::MatrixXd M(P, P);
    for (int i = 0; i < P; ++i) {
        const double xi = grid.node(i);
        const double wi = std::sqrt(grid.weight(i));
        for (int j = 0; j < P; ++j)
            M(i, j) = wi * std::sqrt(grid.weight(j)) / A *
                      std::exp(-euclidean_action(k, grid.node(j), xi) / hbar);
    }
    if (!M.allFinite()) throw NumericsError("euclidean kernel matrix has non-finite entries");
    return M;
}

} // namespace detail

/// Discretizes the short-time propagator on the grid:
/// entries = sqrt(w_i) (1/A) exp(i S[x_j -> x_i]/hbar) sqrt(w_j) with
/// trapezoid weights (w = dx except the halved wall nodes), so a matrix
/// product is the convolution quadrature, interior entries carry the plain
/// dx factor, and symmetric actions give symmetric matrices. Imaginary mode
/// replaces epsilon by -i epsilon throughout, giving the Euclidean kernel
/// (real, positive entries).
inline KernelMatrix build_kernel_matrix(const ShortTimeKernel& k, const SpaceGrid& grid,
                                        TimeMode mode) {
    grid.validate();
    KernelMatrix out;
    out.grid = grid;
    out.mode = mode;
    out.step = k.epsilon;
    out.steps = 1;
    const int P = grid.points;
    if (mode == TimeMode::imaginary_time) {
        out.entries = detail::euclidean_step_matrix(k, grid).cast<std::complex<double>>();
        return out;
    }
    const double hbar = k.model.units.hbar;
    const std::complex<double> invA = 1.0 / normalization_constant(k);
    out.entries.resize(P, P);
    for (int i = 0; i < P; ++i) {
        const double xi = grid.node(i);
        const double wi = std::sqrt(grid.weight(i));
        for (int j = 0; j < P; ++j) {
            const double S = short_time_action(k, grid.node(j), xi);
            out.entries(i, j) = wi * std::sqrt(grid.weight(j)) * invA *
                                std::exp(std::complex<double>(0.0, S / hbar));
        }
    }
    if (!out.entries.allFinite())
        throw NumericsError("kernel matrix has non-finite entries");
    return out;
}

/// Matrix power by repeated squaring: N more composition steps of the same
/// factor.
inline KernelMatrix compose(const KernelMatrix& kmat, int n) {
    if (n < 1) throw ConfigError("compose: need n >= 1");
    KernelMatrix out = kmat;
    out.steps = kmat.steps * n;
    const Eigen::Index P = kmat.entries.rows();
    Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(P, P);
    Eigen::MatrixXcd base = kmat.entries;
    int e = n;
    bool first = true;
    while (e > 0) {
        if (e & 1) {
            result = first ? base : Eigen::MatrixXcd(result * base);
            first = false;
            if (!result.allFinite())
                throw NumericsError("compose: overflow while composing; consider renormalizing "
                                    "the kernel per step");
        }
        e >>= 1;
        if (e > 0) {
            base = base * base;
            if (!base.allFinite())
                throw NumericsError("compose: overflow while composing; consider renormalizing "
                                    "the kernel per step");
        }
    }
    out.entries = std::move(result);
    return out;
}

/// Matrix-vector application of the discretized propagator.
inline Eigen::VectorXcd propagate_wavefunction(const KernelMatrix& kmat,
                                               const Eigen::VectorXcd& psi) {
    if (psi.size() != kmat.entries.cols())
        throw ConfigError("propagate_wavefunction: wavefunction length does not match the grid");
    return kmat.entries * psi;
}

/// Energy levels extracted from the propagator (1-D specialization of the
/// eigenfunction expansion).
struct Spectrum {
    std::vector<double> energies;        // ascending
    std::vector<double> estimated_error; // from a coarse-grid re-run
    int requested = 0;
    double total_time = 0.0;
    double epsilon = 0.0;
};

namespace detail {

inline std::vector<double> spectrum_levels(const ShortTimeKernel& k, const SpaceGrid& grid,
                                           int steps, double total_time, int levels) {
    // left_endpoint kernels are similar to the trapezoid ones via a diagonal
    // conjugation, so the trapezoid matrix carries the same eigenvalues and
    // keeps the solver symmetric.
    ShortTimeKernel keff = k;
    if (keff.rule == AveragedPotentialRule::left_endpoint)
        keff.rule = AveragedPotentialRule::trapezoid;
    // The step matrix is W^(1/2) G W^(1/2): symmetric, and similar to the
    // convolution-quadrature operator G W, so the spectra agree exactly.
    Eigen::MatrixXd M = euclidean_step_matrix(keff, grid);
    M = 0.5 * (M + M.transpose()).eval();
    // Compose by repeated squaring, renormalizing by the largest eigenvalue
    // estimate is unnecessary at these sizes; overflow is caught instead.
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(M.rows(), M.cols());
    int e = steps;
    Eigen::MatrixXd base = M;
    bool first = true;
    while (e > 0) {
        if (e & 1) { R = first ? base : Eigen::MatrixXd(R * base); first = false; }
        e >>= 1;
        if (e > 0) base = base * base;
    }
    if (!R.allFinite()) throw NumericsError("extract_spectrum: composed kernel overflowed");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericsError("extract_spectrum: eigensolver failed");
    const Eigen::VectorXd ev = es.eigenvalues(); // ascending
    std::vector<double> energies;
    for (int n = 0; n < levels; ++n) {
        const double mu = ev(ev.size() - 1 - n);
        if (!(mu > 1e-12))
            throw NumericsError("extract_spectrum: level " + std::to_string(n) +
                                " is below the resolvable eigenvalue floor");
        energies.push_back(-std::log(mu) / total_time);
    }
    return energies;
}

} // namespace detail

/// Diagonalizes the composed Euclidean kernel; E_n = -log(mu_n)/T. Imaginary
/// time is forced internally: real-time eigenphases alias modulo 2*pi.
inline Spectrum extract_spectrum(const ShortTimeKernel& k, const SpaceGrid& grid, double epsilon,
                                 double total_time, int levels) {
    if (levels < 1 || levels > 10)
        throw ConfigError("extract_spectrum: levels must be in [1, 10]");
    grid.validate();
    const int steps = static_cast<int>(std::lround(total_time / epsilon));
    if (steps < 1 || std::abs(steps * epsilon - total_time) > 1e-9 * std::max(1.0, total_time))
        throw ConfigError("extract_spectrum: total_time must be an integer multiple of epsilon");
    ShortTimeKernel kk = k;
    kk.epsilon = epsilon;

    Spectrum out;
    out.requested = levels;
    out.total_time = total_time;
    out.epsilon = epsilon;
    out.energies = detail::spectrum_levels(kk, grid, steps, total_time, levels);

    SpaceGrid coarse = grid;
    coarse.points = std::max(31, (grid.points + 1) / 2);
    const auto coarse_e = detail::spectrum_levels(kk, coarse, steps, total_time, levels);
    out.estimated_error.resize(static_cast<std::size_t>(levels));
    for (int n = 0; n < levels; ++n)
        out.estimated_error[static_cast<std::size_t>(n)] =
            std::abs(out.energies[static_cast<std::size_t>(n)] - coarse_e[static_cast<std::size_t>(n)]);
    return out;
}

} // namespace pathprop
