#pragma once

// Umbrella header for the FuBIF library: function-based isolation forests,
// FuBIFFI feature importance, evaluation metrics, datasets and model IO.

#include "fubif/data.hpp"
#include "fubif/errors.hpp"
#include "fubif/forest.hpp"
#include "fubif/importance.hpp"
#include "fubif/matrix.hpp"
#include "fubif/metrics.hpp"
#include "fubif/model_io.hpp"
#include "fubif/rng.hpp"
#include "fubif/run_config.hpp"
#include "fubif/splitting.hpp"
#include "fubif/threshold.hpp"
