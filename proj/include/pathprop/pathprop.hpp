#pragma once

#include "pathprop/classical.hpp"
#include "pathprop/config.hpp"
#include "pathprop/errors.hpp"
#include "pathprop/experiment.hpp"
#include "pathprop/fresnel.hpp"
#include "pathprop/kernel.hpp"
#include "pathprop/model.hpp"
#include "pathprop/modes.hpp"
#include "pathprop/numerics.hpp"
#include "pathprop/path.hpp"
#include "pathprop/potential.hpp"
#include "pathprop/slicing.hpp"
#include "pathprop/units.hpp"
