#pragma once

// Umbrella header: compressive-sensing recovery of sparse signals whose
// sparsity pattern evolves over time, plus the Monte Carlo benchmark harness.

#include "sparsetrack/bench.hpp"
#include "sparsetrack/common.hpp"
#include "sparsetrack/config.hpp"
#include "sparsetrack/model.hpp"
#include "sparsetrack/pursuit.hpp"
#include "sparsetrack/rng.hpp"
#include "sparsetrack/tracking.hpp"
