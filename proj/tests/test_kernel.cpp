#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "pathprop/kernel.hpp"

using namespace pathprop;
using Catch::Approx;

namespace {

ShortTimeKernel free_kernel(double eps) {
    return ShortTimeKernel::create(LagrangianModel::free(), AveragedPotentialRule::midpoint, eps,
                                   Reference::straight_line());
}

ShortTimeKernel harmonic_fh_kernel(double eps, double omega = 1.0,
                                   AveragedPotentialRule rule = AveragedPotentialRule::midpoint) {
    return ShortTimeKernel::create(LagrangianModel::harmonic(omega), rule, eps,
                                   Reference::straight_line());
}

} // namespace

TEST_CASE("build_kernel_matrix in imaginary time", "[kernel]") {
    SpaceGrid grid{-10.0, 10.0, 401};
    auto km = build_kernel_matrix(free_kernel(0.01), grid, TimeMode::imaginary_time);
    // Row sums approximate the unit integral of the Euclidean free kernel for
    // rows away from the truncation wall.
    for (int i = 0; i < grid.points; ++i) {
        if (std::abs(grid.node(i)) > 9.0) continue;
        const double sum = km.entries.row(i).sum().real();
        CHECK(sum == Approx(1.0).margin(2e-3));
    }
    CHECK(km.entries.imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK(km.entries.real().minCoeff() >= 0.0);
}

TEST_CASE("build_kernel_matrix in real time has unit-modulus phases", "[kernel]") {
    SpaceGrid grid{-2.0, 2.0, 81};
    auto km = build_kernel_matrix(free_kernel(0.01), grid, TimeMode::real_time);
    const double expected = grid.spacing() / std::sqrt(2.0 * M_PI * 0.01);
    for (int i = 1; i + 1 < grid.points; i += 7)
        for (int j = 1; j + 1 < grid.points; j += 7)
            CHECK(std::abs(km.entries(i, j)) == Approx(expected).epsilon(1e-12));
    // Wall nodes carry the square root of the halved trapezoid weight.
    CHECK(std::abs(km.entries(3, 0)) == Approx(std::sqrt(0.5) * expected).epsilon(1e-12));
    CHECK(std::abs(km.entries(0, grid.points - 1)) == Approx(0.5 * expected).epsilon(1e-12));
}

TEST_CASE("harmonic-reference Euclidean kernel diagonal", "[kernel]") {
    SpaceGrid grid{-8.0, 8.0, 321};
    auto k = ShortTimeKernel::create(LagrangianModel::harmonic(1.0, Partition::harmonic_reference),
                                     AveragedPotentialRule::harmonic_integral_average, 0.01,
                                     Reference::harmonic(1.0));
    auto km = build_kernel_matrix(k, grid, TimeMode::imaginary_time);
    const int mid = 160; // x = 0
    CHECK(km.entries(mid, mid).real() ==
          Approx(grid.spacing() / std::sqrt(2.0 * M_PI * std::sinh(0.01))).epsilon(1e-10));
}

TEST_CASE("compose", "[kernel]") {
    SpaceGrid grid{-10.0, 10.0, 401};
    auto km = build_kernel_matrix(free_kernel(0.01), grid, TimeMode::imaginary_time);

    auto once = compose(km, 1);
    CHECK((once.entries - km.entries).cwiseAbs().maxCoeff() == 0.0);

    auto total = compose(km, 100); // Euclidean free kernel at T = 1
    const int mid = 200;
    CHECK(total.entries(mid, mid).real() ==
          Approx(grid.spacing() / std::sqrt(2.0 * M_PI * 1.0)).epsilon(0.01));
    CHECK(total.total_time() == Approx(1.0));

    // Semigroup property.
    auto a = compose(km, 5);
    auto b = compose(km, 2);
    auto c = compose(km, 3);
    const double rel = (a.entries - b.entries * c.entries).norm() / a.entries.norm();
    CHECK(rel < 1e-10);
}

TEST_CASE("composed Trotter kernel approaches the Mehler diagonal", "[kernel]") {
    SpaceGrid grid{-8.0, 8.0, 321};
    auto km = build_kernel_matrix(harmonic_fh_kernel(0.005), grid, TimeMode::imaginary_time);
    auto total = compose(km, 200); // T = 1
    const int mid = 160;
    const double expected = std::sqrt(1.0 / (2.0 * M_PI * std::sinh(1.0)));
    CHECK(total.entries(mid, mid).real() / grid.spacing() == Approx(expected).epsilon(0.01));
}

TEST_CASE("imaginary-time kernels are symmetric with positive spectrum", "[kernel]") {
    SpaceGrid grid{-6.0, 6.0, 151};
    auto km = build_kernel_matrix(harmonic_fh_kernel(0.02, 1.0, AveragedPotentialRule::trapezoid),
                                  grid, TimeMode::imaginary_time);
    Eigen::MatrixXd M = km.entries.real();
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * M.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const auto ev = es.eigenvalues();
    for (int n = 0; n < 10; ++n) CHECK(ev(ev.size() - 1 - n) > 0.0);
}

TEST_CASE("propagate_wavefunction", "[kernel]") {
    // Nascent-delta surrogate: a very short Euclidean step reproduces psi.
    {
        SpaceGrid grid{-1.0, 1.0, 1001};
        auto km = build_kernel_matrix(free_kernel(1e-4), grid, TimeMode::imaginary_time);
        Eigen::VectorXcd psi(grid.points);
        for (int i = 0; i < grid.points; ++i) {
            const double x = grid.node(i);
            psi(i) = std::exp(-8.0 * x * x);
        }
        auto out = propagate_wavefunction(km, psi);
        double sup = 0.0;
        for (int i = 0; i < grid.points; ++i) sup = std::max(sup, std::abs(out(i) - psi(i)));
        CHECK(sup < 1e-2);

        Eigen::VectorXcd wrong(3);
        CHECK_THROWS_AS(propagate_wavefunction(km, wrong), ConfigError);
    }
    // Euclidean ground-state decay at E0 = 1/2.
    {
        SpaceGrid grid{-8.0, 8.0, 321};
        auto km = build_kernel_matrix(harmonic_fh_kernel(0.01), grid, TimeMode::imaginary_time);
        auto kt = compose(km, 100); // tau = 1
        Eigen::VectorXcd psi(grid.points);
        for (int i = 0; i < grid.points; ++i) {
            const double x = grid.node(i);
            psi(i) = std::exp(-0.5 * x * x);
        }
        auto out = propagate_wavefunction(kt, psi);
        for (int i = 0; i < grid.points; ++i) {
            const double x = grid.node(i);
            if (std::abs(x) > 3.0) continue;
            CHECK(std::abs(out(i)) / std::abs(psi(i)) == Approx(std::exp(-0.5)).epsilon(0.01));
        }
    }
}

TEST_CASE("real-time propagation matches the spreading Gaussian", "[kernel]") {
    // Resolution rule for real-time grids: dx <= pi*eps/(x_max - x_min), so
    // the one-step phase stays below Nyquist across the whole domain.
    SpaceGrid grid{-8.0, 8.0, 1025};
    auto km = build_kernel_matrix(free_kernel(0.1), grid, TimeMode::real_time);
    Eigen::VectorXcd psi(grid.points);
    for (int i = 0; i < grid.points; ++i) {
        const double x = grid.node(i);
        psi(i) = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
    }
    for (int s = 0; s < 10; ++s) psi = propagate_wavefunction(km, psi);
    // psi(x, 1) = pi^{-1/4} (1 + i)^{-1/2} exp(-x^2/(2 (1 + i))).
    double sup = 0.0;
    for (int i = 0; i < grid.points; ++i) {
        const double x = grid.node(i);
        if (std::abs(x) > 6.0) continue;
        const std::complex<double> denom(1.0, 1.0);
        const std::complex<double> exact = std::pow(M_PI, -0.25) / std::sqrt(denom) *
                                           std::exp(-x * x / (2.0 * denom));
        sup = std::max(sup, std::abs(psi(i) - exact));
    }
    CHECK(sup < 1e-2);
}

TEST_CASE("real composition error is set by the wall distance", "[kernel]") {
    // Entry-wise comparison of the composed real-time free kernel against
    // the closed form. The hard wall cuts the oscillatory integral tails,
    // which costs ~ sqrt(eps)/(2 sqrt(pi) d) per composition at wall
    // distance d, so doubling the window shrinks the sup error.
    auto measure = [](double L, int P) {
        SpaceGrid grid{-L, L, P};
        auto km = build_kernel_matrix(free_kernel(0.1), grid, TimeMode::real_time);
        auto kt = compose(km, 2);
        const double T = 0.2;
        double sup = 0.0;
        for (int i = 0; i < grid.points; ++i) {
            const double xi = grid.node(i);
            if (std::abs(xi) > 0.5) continue;
            for (int j = 0; j < grid.points; ++j) {
                const double xj = grid.node(j);
                if (std::abs(xj) > 0.5) continue;
                const std::complex<double> exact =
                    std::sqrt(1.0 / std::complex<double>(0.0, 2.0 * M_PI * T)) *
                    std::exp(std::complex<double>(0.0, (xi - xj) * (xi - xj) / (2.0 * T)));
                sup = std::max(sup, std::abs(kt.entries(i, j) / grid.spacing() - exact));
            }
        }
        return sup * std::sqrt(2.0 * M_PI * T);
    };
    const double near = measure(2.0, 161);
    const double far = measure(4.0, 321);
    const double veryfar = measure(8.0, 641);
    CHECK(far < near);
    CHECK(veryfar < far);
    CHECK(veryfar < 0.05);
}

TEST_CASE("extract_spectrum for the harmonic oscillator", "[kernel]") {
    SpaceGrid grid{-8.0, 8.0, 301};
    auto spec = extract_spectrum(harmonic_fh_kernel(0.01), grid, 0.01, 1.0, 3);
    REQUIRE(spec.energies.size() == 3);
    CHECK(spec.energies[0] == Approx(0.5).epsilon(0.01));
    CHECK(spec.energies[1] == Approx(1.5).epsilon(0.01));
    CHECK(spec.energies[2] == Approx(2.5).epsilon(0.01));
    CHECK(spec.estimated_error.size() == 3);

    auto spec2 = extract_spectrum(harmonic_fh_kernel(0.01, 2.0), grid, 0.01, 1.0, 2);
    CHECK(spec2.energies[0] == Approx(1.0).epsilon(0.01));
    CHECK(spec2.energies[1] == Approx(3.0).epsilon(0.01));

    CHECK_THROWS_AS(extract_spectrum(harmonic_fh_kernel(0.01), grid, 0.01, 1.0, 11), ConfigError);
    // Levels decayed below the eigenvalue floor are reported, not returned.
    CHECK_THROWS_AS(extract_spectrum(harmonic_fh_kernel(0.01), grid, 0.01, 10.0, 5),
                    NumericsError);
}

TEST_CASE("free lowest level tends to zero on a wide grid", "[kernel]") {
    SpaceGrid grid{-20.0, 20.0, 401};
    auto spec = extract_spectrum(free_kernel(0.01), grid, 0.01, 1.0, 1);
    CHECK(std::abs(spec.energies[0]) <= 0.01);
}

TEST_CASE("E0 error decreases monotonically as epsilon halves", "[kernel]") {
    SpaceGrid grid{-8.0, 8.0, 241};
    double prev = 1e9;
    for (double eps : {0.08, 0.04, 0.02, 0.01}) {
        auto spec = extract_spectrum(harmonic_fh_kernel(eps), grid, eps, 0.8, 1);
        const double err = std::abs(spec.energies[0] - 0.5);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("left_endpoint spectra match trapezoid by similarity", "[kernel]") {
    SpaceGrid grid{-8.0, 8.0, 241};
    auto a = extract_spectrum(harmonic_fh_kernel(0.02, 1.0, AveragedPotentialRule::left_endpoint),
                              grid, 0.02, 1.0, 2);
    auto b = extract_spectrum(harmonic_fh_kernel(0.02, 1.0, AveragedPotentialRule::trapezoid),
                              grid, 0.02, 1.0, 2);
    CHECK(a.energies[0] == Approx(b.energies[0]).epsilon(1e-12));
    CHECK(a.energies[1] == Approx(b.energies[1]).epsilon(1e-12));
}
