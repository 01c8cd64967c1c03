#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <vector>

#include "pathprop/errors.hpp"

namespace pathprop {

/// Dirichlet boundary data for a classical path.
struct BoundaryData {
    double t_a = 0.0;
    double t_b = 1.0;
    double x_a = 0.0;
    double x_b = 0.0;

    void validate() const {
        if (!(t_b - t_a > 0.0)) throw ConfigError("BoundaryData: t_b must exceed t_a");
    }
    double duration() const { return t_b - t_a; }
};

/// A sampled trajectory x(t) with its derivative samples stored explicitly,
/// so piecewise paths (whose derivative is discontinuous at slice nodes) can
/// be represented without differentiation artifacts.
class Path {
public:
    Path(std::vector<double> grid, std::vector<double> values, std::vector<double> derivative)
        : grid_(std::move(grid)), values_(std::move(values)), derivative_(std::move(derivative)) {
        if (grid_.size() < 2 || values_.size() != grid_.size() || derivative_.size() != grid_.size())
            throw ConfigError("Path: grid/values/derivative must share a length >= 2");
        for (std::size_t k = 0; k + 1 < grid_.size(); ++k)
            if (!(grid_[k] < grid_[k + 1]))
                throw ConfigError("Path: grid must be strictly increasing");
    }

    std::span<const double> grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::span<const double> derivative() const { return derivative_; }
    std::size_t size() const { return grid_.size(); }

    double t_a() const { return grid_.front(); }
    double t_b() const { return grid_.back(); }
    double x_a() const { return values_.front(); }
    double x_b() const { return values_.back(); }

    /// Linear interpolation between samples (derivative piecewise constant
    /// from the left sample).
    double value_at(double t) const {
        const std::size_t k = segment_of(t);
        const double w = (t - grid_[k]) / (grid_[k + 1] - grid_[k]);
        return (1.0 - w) * values_[k] + w * values_[k + 1];
    }

    Path with_values(std::vector<double> values, std::vector<double> derivative) const {
        return Path(grid_, std::move(values), std::move(derivative));
    }

    /// Plain-text serialization: columns t, x and optionally xdot.
    void write(std::ostream& os, bool with_derivative = true) const {
        char buf[96];
        for (std::size_t k = 0; k < grid_.size(); ++k) {
            if (with_derivative)
                std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", grid_[k], values_[k], derivative_[k]);
            else
                std::snprintf(buf, sizeof buf, "%.17g %.17g\n", grid_[k], values_[k]);
            os << buf;
        }
    }

private:
    std::size_t segment_of(double t) const {
        if (t < grid_.front() || t > grid_.back())
            throw NumericsError("Path::value_at: t outside the grid");
        std::size_t lo = 0, hi = grid_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (grid_[mid] <= t ? lo : hi) = mid;
        }
        return lo;
    }

    std::vector<double> grid_;
    std::vector<double> values_;
    std::vector<double> derivative_;
};

/// Uniform grid helper.
inline std::vector<double> uniform_grid(double t_a, double t_b, std::size_t samples) {
    if (samples < 2) throw ConfigError("uniform_grid: need >= 2 samples");
    std::vector<double> g(samples);
    const double h = (t_b - t_a) / static_cast<double>(samples - 1);
    for (std::size_t k = 0; k < samples; ++k) g[k] = t_a + h * static_cast<double>(k);
    g.back() = t_b;
    return g;
}

} // namespace pathprop
