#pragma once

// Umbrella header.

#include "octdisp/core/error.hpp"
#include "octdisp/core/fft.hpp"
#include "octdisp/core/interp.hpp"
#include "octdisp/core/matrix.hpp"
#include "octdisp/core/parallel.hpp"
#include "octdisp/core/reconstruct.hpp"
#include "octdisp/core/types.hpp"
#include "octdisp/io/json_io.hpp"
#include "octdisp/io/octbin.hpp"
#include "octdisp/metrics/analysis.hpp"
#include "octdisp/metrics/quality.hpp"
#include "octdisp/metrics/report.hpp"
#include "octdisp/opt/search.hpp"
#include "octdisp/opt/sharpness.hpp"
#include "octdisp/sim/simulator.hpp"
#include "octdisp/stitch/dataset.hpp"
#include "octdisp/stitch/stitch.hpp"
