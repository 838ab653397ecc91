#pragma once

// Umbrella header: raster-to-LOD2 roof reconstruction from oblique imagery,
// with bit-exact inter-stage codecs, a synthetic oracle generator standing in
// for learned inference, and evaluation metrics.

#include "roofkit/baseline.hpp"
#include "roofkit/codec.hpp"
#include "roofkit/contour.hpp"
#include "roofkit/corners.hpp"
#include "roofkit/errors.hpp"
#include "roofkit/grid.hpp"
#include "roofkit/io_export.hpp"
#include "roofkit/merge.hpp"
#include "roofkit/metrics.hpp"
#include "roofkit/pipeline.hpp"
#include "roofkit/plane.hpp"
#include "roofkit/png_io.hpp"
#include "roofkit/raster.hpp"
#include "roofkit/sections.hpp"
#include "roofkit/synth.hpp"
#include "roofkit/types.hpp"
