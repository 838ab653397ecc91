#pragma once

#include <compare>
#include <cstdint>
#include <optional>

namespace roofkit {

/// Integer pixel position, row 0 at the top of the image.
struct PixelCoord {
  int row = 0;
  int col = 0;
  auto operator<=>(const PixelCoord&) const = default;
};

/// Maps pixels to world meters: x = origin_x + col*gsd, y = origin_y + row*gsd.
/// gsd is meters of ground per pixel (0.38 for the reference satellite data).
struct Georef {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double gsd = 1.0;
};

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;
};

inline WorldPoint world_from_pixel(const Georef& g, double row, double col) {
  return {g.origin_x + col * g.gsd, g.origin_y + row * g.gsd};
}

/// Fractional (row, col) for a world position.
struct PixelPoint {
  double row = 0.0;
  double col = 0.0;
};

inline PixelPoint pixel_from_world(const Georef& g, double x, double y) {
  return {(y - g.origin_y) / g.gsd, (x - g.origin_x) / g.gsd};
}

}  // namespace roofkit
