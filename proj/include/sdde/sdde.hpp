#pragma once

// Simulation and kernel trend estimation for stochastic delay differential
// equations driven by fractional Brownian motion in the small-noise regime.

#include "sdde/delay.hpp"
#include "sdde/errors.hpp"
#include "sdde/estimator.hpp"
#include "sdde/fbm.hpp"
#include "sdde/grid.hpp"
#include "sdde/harness.hpp"
#include "sdde/io.hpp"
#include "sdde/kernels.hpp"
#include "sdde/rng.hpp"
#include "sdde/trend.hpp"
