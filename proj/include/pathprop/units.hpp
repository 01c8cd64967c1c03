#pragma once

#include "pathprop/errors.hpp"

namespace pathprop {

/// Natural units by default: hbar = m = 1. Overridable per experiment.
struct PhysicalUnits {
    double hbar = 1.0;
    double mass = 1.0;

    void validate() const {
        if (!(hbar > 0.0)) throw ConfigError("PhysicalUnits: hbar must be > 0");
        if (!(mass > 0.0)) throw ConfigError("PhysicalUnits: mass must be > 0");
    }
};

} // namespace pathprop
