#pragma once

// Umbrella header: the whole quasi-Feynman toolkit.

#include "error.hpp"
#include "grid.hpp"
#include "spectral.hpp"
#include "kernels.hpp"
#include "operators.hpp"
#include "fit.hpp"
#include "families.hpp"
#include "oracle.hpp"
#include "propagator.hpp"
#include "config.hpp"
#include "commands.hpp"
