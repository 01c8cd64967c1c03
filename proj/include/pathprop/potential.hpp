#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pathprop/errors.hpp"
#include "pathprop/numerics.hpp"

namespace pathprop {

/// A scalar potential V(x). Polynomials keep their coefficients so that
/// derivatives and antiderivatives stay exact; everything else goes through a
/// callable with finite-difference derivatives.
class Potential {
public:
    Potential() : poly_{true}, coeffs_{} {}

    static Potential zero() { return Potential(); }

    /// coeffs ascending: V(x) = c0 + c1 x + c2 x^2 + ...
    static Potential polynomial(std::vector<double> coeffs) {
        Potential v;
        v.poly_ = true;
        v.coeffs_ = std::move(coeffs);
        while (!v.coeffs_.empty() && v.coeffs_.back() == 0.0) v.coeffs_.pop_back();
        return v;
    }

    static Potential callable(std::function<double(double)> fn, std::string name = "custom") {
        Potential v;
        v.poly_ = false;
        v.fn_ = std::move(fn);
        v.name_ = std::move(name);
        return v;
    }

    bool is_polynomial() const { return poly_; }
    bool is_zero() const { return poly_ && coeffs_.empty(); }
    const std::vector<double>& coefficients() const { return coeffs_; }

    double operator()(double x) const {
        if (poly_) {
            double acc = 0.0;
            for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * x + coeffs_[k];
            return acc;
        }
        return fn_(x);
    }

    double derivative(double x) const {
        if (poly_) {
            double acc = 0.0;
            for (std::size_t k = coeffs_.size(); k-- > 1;)
                acc = acc * x + static_cast<double>(k) * coeffs_[k];
            return acc;
        }
        const double h = fd_step(x);
        return ((*this)(x + h) - (*this)(x - h)) / (2.0 * h);
    }

    double second_derivative(double x) const {
        if (poly_) {
            double acc = 0.0;
            for (std::size_t k = coeffs_.size(); k-- > 2;)
                acc = acc * x + static_cast<double>(k * (k - 1)) * coeffs_[k];
            return acc;
        }
        const double h = fd_step(x);
        return ((*this)(x + h) - 2.0 * (*this)(x) + (*this)(x - h)) / (h * h);
    }

    /// Definite integral; exact antiderivative for polynomials, adaptive
    /// quadrature (abs tol 1e-10) otherwise.
    double integral(double lo, double hi) const {
        if (poly_) {
            auto anti = [this](double x) {
                double acc = 0.0;
                for (std::size_t k = coeffs_.size(); k-- > 0;)
                    acc = acc * x + coeffs_[k] / static_cast<double>(k + 1);
                return acc * x;
            };
            return anti(hi) - anti(lo);
        }
        return integrate_adaptive([this](double x) { return (*this)(x); }, lo, hi);
    }

private:
    bool poly_;
    std::vector<double> coeffs_;
    std::function<double(double)> fn_;
    std::string name_;
};

} // namespace pathprop
