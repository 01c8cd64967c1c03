#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "pathprop/errors.hpp"

namespace pathprop {
namespace tridiag {

/// Number of eigenvalues of the symmetric tridiagonal matrix (diag, off)
/// strictly below lambda (Sturm sequence of LDL^T pivots).
inline int count_below(const std::vector<double>& diag, const std::vector<double>& off,
                       double lambda) {
    const std::size_t n = diag.size();
    int count = 0;
    double q = diag[0] - lambda;
    if (q < 0.0) ++count;
    for (std::size_t k = 1; k < n; ++k) {
        if (q == 0.0) q = 1e-300;
        q = diag[k] - lambda - off[k - 1] * off[k - 1] / q;
        if (q < 0.0) ++count;
    }
    return count;
}

/// k-th smallest eigenvalue (k 0-based) by bisection.
inline double eigenvalue_by_bisection(const std::vector<double>& diag,
                                      const std::vector<double>& off, int k) {
    double lo = diag[0], hi = diag[0];
    for (std::size_t i = 0; i < diag.size(); ++i) {
        const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) +
                         (i + 1 < diag.size() ? std::abs(off[i]) : 0.0);
        lo = std::min(lo, diag[i] - r);
        hi = std::max(hi, diag[i] + r);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(diag, off, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Eigenvector by inverse iteration with a slightly shifted Thomas solve.
inline Eigen::VectorXd eigenvector(const std::vector<double>& diag,
                                   const std::vector<double>& off, double lambda) {
    const std::size_t n = diag.size();
    const double scale = std::abs(lambda) + 1.0;
    const double shift = lambda + 1e-11 * scale;
    Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n),
                                                  1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> c(n), d(n);
    for (int iter = 0; iter < 4; ++iter) {
        // Thomas algorithm on (T - shift I) x = v.
        double piv = diag[0] - shift;
        if (std::abs(piv) < 1e-300) piv = 1e-300;
        c[0] = (n > 1 ? off[0] / piv : 0.0);
        d[0] = v[0] / piv;
        for (std::size_t k = 1; k < n; ++k) {
            piv = diag[k] - shift - off[k - 1] * c[k - 1];
            if (std::abs(piv) < 1e-300) piv = 1e-300;
            c[k] = (k + 1 < n ? off[k] / piv : 0.0);
            d[k] = (v[static_cast<Eigen::Index>(k)] - off[k - 1] * d[k - 1]) / piv;
        }
        v[static_cast<Eigen::Index>(n - 1)] = d[n - 1];
        for (std::size_t k = n - 1; k-- > 0;)
            v[static_cast<Eigen::Index>(k)] = d[k] - c[k] * v[static_cast<Eigen::Index>(k + 1)];
        const double nrm = v.norm();
        if (!(nrm > 0.0) || !v.allFinite())
            throw NumericsError("tridiagonal inverse iteration broke down");
        v /= nrm;
    }
    return v;
}

} // namespace tridiag
} // namespace pathprop
