#pragma once

// Reachability over-approximation and invariance certification for disturbed
// continuous-time systems via mixed-monotone decompositions.

#include "mmreach/config.hpp"
#include "mmreach/decomp.hpp"
#include "mmreach/embed.hpp"
#include "mmreach/errors.hpp"
#include "mmreach/fixtures.hpp"
#include "mmreach/geometry.hpp"
#include "mmreach/integrate.hpp"
#include "mmreach/interval.hpp"
#include "mmreach/invariance.hpp"
#include "mmreach/io.hpp"
#include "mmreach/poly.hpp"
#include "mmreach/reach.hpp"
#include "mmreach/runner.hpp"
#include "mmreach/system.hpp"
#include "mmreach/version.hpp"
