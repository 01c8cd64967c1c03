#pragma once

#include <stdexcept>
#include <string>

namespace pathprop {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad or inconsistent user configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Numerical failure: divergence, singular integrand, overflow (CLI exit code 3).
class NumericsError : public Error {
public:
    explicit NumericsError(const std::string& what) : Error(what) {}
};

/// The harmonic interpolant is undefined: |sin(omega * dt)| fell below tolerance.
class ResonanceError : public NumericsError {
public:
    explicit ResonanceError(const std::string& what) : NumericsError(what) {}
};

/// A second-variation eigenvalue is non-positive where positivity is required.
class InstabilityError : public NumericsError {
public:
    explicit InstabilityError(const std::string& what) : NumericsError(what) {}
};

/// A slice<->series transform matrix is numerically singular.
class SingularTransformError : public NumericsError {
public:
    SingularTransformError(const std::string& what, double cond)
        : NumericsError(what), condition_number(cond) {}
    double condition_number;
};

/// Even slice counts degenerate with the 2*n*pi mode family; the remedy is an
/// odd slice count.
class EvenSliceCountError : public NumericsError {
public:
    explicit EvenSliceCountError(int n)
        : NumericsError("slice count N = " + std::to_string(n) +
                        " is even: node patterns of the 2n*pi mode family alias "
                        "(y_{N/2} and a_{N/2} drop out); use an odd slice count"),
          slice_count(n) {}
    int slice_count;
};

} // namespace pathprop
