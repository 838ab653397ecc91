#pragma once

#include <stdexcept>
#include <string>

namespace roofkit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raster / tiling
struct InvalidTiling : Error { using Error::Error; };
struct CoverageError : Error { using Error::Error; };

// Codecs
struct BoundsError : Error { using Error::Error; };
struct ClassRangeError : Error { using Error::Error; };
struct LabelError : Error { using Error::Error; };

// Geometry
struct OrderError : Error { using Error::Error; };
struct DegenerateError : Error { using Error::Error; };
struct AssignmentError : Error { using Error::Error; };

// Grids / evaluation
struct FootprintError : Error { using Error::Error; };
struct EmptyEvalError : Error { using Error::Error; };

// Synthesis / I/O
struct PlacementError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace roofkit
