#pragma once

// Umbrella header for the intona library: interval measurement for
// monophonic vocal performance from F0 traces and quartertone
// transcriptions.

#include "intona/alignment.hpp"
#include "intona/analysis.hpp"
#include "intona/cents.hpp"
#include "intona/config.hpp"
#include "intona/csv.hpp"
#include "intona/errors.hpp"
#include "intona/histogram.hpp"
#include "intona/io.hpp"
#include "intona/peakfit.hpp"
#include "intona/pipeline.hpp"
#include "intona/scales.hpp"
