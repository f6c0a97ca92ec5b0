#pragma once

// Umbrella header for the SSFAD spectral-spatial fusion anomaly detection
// library.

#include "ssfad/baselines.hpp"
#include "ssfad/detector.hpp"
#include "ssfad/eval.hpp"
#include "ssfad/fusion.hpp"
#include "ssfad/io.hpp"
#include "ssfad/parallel.hpp"
#include "ssfad/raster.hpp"
#include "ssfad/spatial.hpp"
#include "ssfad/spectral.hpp"
#include "ssfad/synth.hpp"
#include "ssfad/windowing.hpp"
