#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pathprop/classical.hpp"

using namespace pathprop;
using Catch::Approx;

namespace {

// Independent shooting-method oracle: integrate xddot = -V'(x)/m with RK4
// and bisect on the initial velocity to meet x(t_b) = x_b.
Path shooting_oracle(const LagrangianModel& model, const BoundaryData& bc, std::size_t samples) {
    const double m = model.units.mass;
    auto accel = [&](double x) {
        return -(model.potential0.derivative(x) + model.potential1.derivative(x)) / m;
    };
    auto integrate = [&](double v0, std::vector<double>* xs, std::vector<double>* vs) {
        const std::size_t steps = 20000;
        const double h = bc.duration() / steps;
        double x = bc.x_a, v = v0;
        const std::size_t stride = steps / (samples - 1);
        if (xs) { xs->push_back(x); vs->push_back(v); }
        for (std::size_t s = 1; s <= steps; ++s) {
            const double k1x = v, k1v = accel(x);
            const double k2x = v + 0.5 * h * k1v, k2v = accel(x + 0.5 * h * k1x);
            const double k3x = v + 0.5 * h * k2v, k3v = accel(x + 0.5 * h * k2x);
            const double k4x = v + h * k3v, k4v = accel(x + h * k3x);
            x += h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x);
            v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
            if (xs && s % stride == 0) { xs->push_back(x); vs->push_back(v); }
        }
        return x;
    };
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (integrate(mid, nullptr, nullptr) < bc.x_b) lo = mid; else hi = mid;
    }
    std::vector<double> xs, vs;
    integrate(0.5 * (lo + hi), &xs, &vs);
    xs.back() = bc.x_b;
    return Path(uniform_grid(bc.t_a, bc.t_b, samples), std::move(xs), std::move(vs));
}

} // namespace

TEST_CASE("straight_line_path", "[classical]") {
    auto p = straight_line_path({0.0, 1.0, 0.0, 1.0}, 5);
    CHECK(p.values()[1] == Approx(0.25));
    CHECK(p.derivative()[1] == Approx(1.0));

    auto c = straight_line_path({0.0, 2.0, 3.0, 3.0}, 7);
    for (double x : c.values()) CHECK(x == Approx(3.0));
    for (double v : c.derivative()) CHECK(v == 0.0);

    auto q = straight_line_path({1.0, 4.0, 2.0, 5.0}, 4);
    CHECK(q.value_at(2.0) == Approx(3.0));
    CHECK(q.derivative()[0] == Approx(1.0));

    CHECK(q.x_a() == 2.0);
    CHECK(q.x_b() == 5.0);
}

TEST_CASE("harmonic_reference_path", "[classical]") {
    auto p = harmonic_reference_path({0.0, M_PI / 2.0, 0.0, 1.0}, 1.0, 5);
    CHECK(p.values()[2] == Approx(std::sin(M_PI / 4.0)).epsilon(1e-12)); // t = pi/4

    // omega -> 0 reduces to the straight line.
    auto tiny = harmonic_reference_path({0.0, 1.0, 0.0, 1.0}, 1e-6, 3);
    CHECK(tiny.values()[1] == Approx(0.5).margin(1e-9));

    CHECK_THROWS_AS(harmonic_reference_path({0.0, M_PI, 0.0, 1.0}, 1.0, 5), ResonanceError);

    // Solves xddot = -w^2 x exactly: check the stored derivative too.
    auto h = harmonic_reference_path({0.0, 1.0, 0.2, 0.9}, 1.3, 401);
    auto model = LagrangianModel::harmonic(1.3);
    double worst = 0.0;
    for (double r : euler_lagrange_residual(model, h)) worst = std::max(worst, std::abs(r));
    CHECK(worst < 1e-3);
}

TEST_CASE("harmonic reference approaches the straight line pointwise", "[classical]") {
    auto a = harmonic_reference_path({0.0, 1.0, -0.3, 0.8}, 1e-6, 101);
    auto b = straight_line_path({0.0, 1.0, -0.3, 0.8}, 101);
    double sup = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        sup = std::max(sup, std::abs(a.values()[k] - b.values()[k]));
    CHECK(sup <= 1e-6);
    CHECK(std::abs(a.x_a() - (-0.3)) <= 1e-14);
    CHECK(std::abs(a.x_b() - 0.8) <= 1e-14);
}

TEST_CASE("solve_bvp_classical on free and harmonic models", "[classical]") {
    auto free = LagrangianModel::free();
    auto sol = solve_bvp_classical(free, {0.0, 1.0, 0.0, 1.0}, 101);
    auto line = straight_line_path({0.0, 1.0, 0.0, 1.0}, 101);
    for (std::size_t k = 0; k < sol.size(); ++k)
        CHECK(std::abs(sol.values()[k] - line.values()[k]) < 1e-10);

    auto harmonic = LagrangianModel::harmonic(1.0, Partition::harmonic_reference);
    auto hsol = solve_bvp_classical(harmonic, {0.0, 1.0, 0.0, 1.0}, 8001);
    auto href = harmonic_reference_path({0.0, 1.0, 0.0, 1.0}, 1.0, 8001);
    double sup = 0.0;
    for (std::size_t k = 0; k < hsol.size(); ++k)
        sup = std::max(sup, std::abs(hsol.values()[k] - href.values()[k]));
    CHECK(sup < 1e-8);
}

TEST_CASE("solve_bvp_classical on the quartic against a shooting oracle", "[classical]") {
    auto quartic = LagrangianModel::quartic();
    BoundaryData bc{0.0, 1.0, 0.0, 1.0};
    auto sol = solve_bvp_classical(quartic, bc, 2001);

    double worst = 0.0;
    for (double r : euler_lagrange_residual(quartic, sol)) worst = std::max(worst, std::abs(r));
    CHECK(worst <= 1e-8);

    for (std::size_t k = 1; k < sol.size(); ++k)
        CHECK(sol.values()[k] >= sol.values()[k - 1] - 1e-12);

    auto oracle = shooting_oracle(quartic, bc, 2001);
    double sup = 0.0;
    for (std::size_t k = 0; k < sol.size(); ++k)
        sup = std::max(sup, std::abs(sol.values()[k] - oracle.values()[k]));
    CHECK(sup < 1e-6);
}

TEST_CASE("action_along", "[classical]") {
    auto free = LagrangianModel::free();
    CHECK(action_along(free, straight_line_path({0.0, 1.0, 0.0, 1.0}, 51)) == Approx(0.5));
    CHECK(action_along(free, straight_line_path({0.0, 1.0, 2.0, 2.0}, 51)) == Approx(0.0).margin(1e-15));

    auto harmonic = LagrangianModel::harmonic(1.0);
    auto cls = harmonic_reference_path({0.0, 1.0, 0.0, 1.0}, 1.0, 2001);
    const double exact = 0.5 * std::cos(1.0) / std::sin(1.0);
    CHECK(action_along(harmonic, cls) == Approx(exact).margin(1e-5));
}

TEST_CASE("classical paths minimize the action below the focal time", "[classical]") {
    auto harmonic = LagrangianModel::harmonic(1.0);
    auto cls = harmonic_reference_path({0.0, 1.0, 0.0, 1.0}, 1.0, 801); // T < pi/omega
    const double s_cl = action_along(harmonic, cls);
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double sigma = 0.1 * U(rng);
        const double c1 = U(rng), c2 = U(rng);
        std::vector<double> xs(cls.size()), vs(cls.size());
        for (std::size_t k = 0; k < cls.size(); ++k) {
            const double t = cls.grid()[k];
            xs[k] = cls.values()[k] + sigma * (c1 * std::sin(M_PI * t) + c2 * std::sin(2 * M_PI * t));
            vs[k] = cls.derivative()[k] +
                    sigma * M_PI * (c1 * std::cos(M_PI * t) + 2 * c2 * std::cos(2 * M_PI * t));
        }
        CHECK(action_along(harmonic, cls.with_values(std::move(xs), std::move(vs))) >=
              s_cl - 1e-12);
    }
}
