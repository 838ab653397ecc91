#pragma once

#include <span>
#include <unordered_set>
#include <vector>

#include "roofkit/types.hpp"

namespace roofkit {

/// A vertex on the pixel-corner lattice: corner (r, c) is the top-left corner
/// of pixel (r, c), so a w x h mask has corners in [0..h] x [0..w].
struct LatticePoint {
  int row = 0;
  int col = 0;
  bool operator==(const LatticePoint&) const = default;
};

/// Traces the outer boundary of a 4-connected pixel mask as a closed
/// counter-clockwise polygon on the corner lattice (holes are ignored).
/// Collinear lattice vertices are merged; with them merged the polygon is
/// still geometrically exact, so the enclosed area equals the pixel count for
/// hole-free masks.
inline std::vector<LatticePoint> trace_boundary(std::span<const PixelCoord> pixels) {
  if (pixels.empty()) return {};

  auto key = [](int r, int c) {
    return (static_cast<std::int64_t>(r) << 32) | static_cast<std::uint32_t>(c);
  };
  std::unordered_set<std::int64_t> inside;
  inside.reserve(pixels.size() * 2);
  PixelCoord start = pixels[0];
  for (PixelCoord p : pixels) {
    inside.insert(key(p.row, p.col));
    if (p < start) start = p;
  }
  auto filled = [&](int r, int c) { return inside.count(key(r, c)) != 0; };

  // Walk the crack between inside and outside pixels keeping the mask on the
  // right-hand side. Directions: 0 = east, 1 = south, 2 = west, 3 = north.
  const int drow[4] = {0, 1, 0, -1};
  const int dcol[4] = {1, 0, -1, 0};
  // Pixel just right of a crack edge leaving lattice point (r, c) in direction d.
  auto right_pixel = [&](LatticePoint p, int d) -> PixelCoord {
    switch (d) {
      case 0: return {p.row, p.col};          // heading east: pixel below
      case 1: return {p.row, p.col - 1};      // heading south: pixel left
      case 2: return {p.row - 1, p.col - 1};  // heading west: pixel above-left
      default: return {p.row - 1, p.col};     // heading north: pixel right
    }
  };
  auto left_pixel = [&](LatticePoint p, int d) -> PixelCoord {
    return right_pixel(p, (d + 3) & 3);
  };

  // The row-major first pixel's top-left corner starts an eastward crack:
  // above it is outside (or it would not be first), inside on the right.
  const LatticePoint origin{start.row, start.col};
  LatticePoint cur = origin;
  int dir = 0;
  std::vector<LatticePoint> verts;
  do {
    // Advance one lattice step, then turn per the two pixels ahead.
    cur = {cur.row + drow[dir], cur.col + dcol[dir]};
    const PixelCoord r = right_pixel(cur, dir);
    const PixelCoord l = left_pixel(cur, dir);
    int next_dir;
    if (filled(l.row, l.col) && filled(r.row, r.col)) {
      next_dir = (dir + 3) & 3;  // turn left
    } else if (filled(r.row, r.col)) {
      next_dir = dir;  // straight
    } else {
      next_dir = (dir + 1) & 3;  // turn right
    }
    if (next_dir != dir) verts.push_back(cur);
    dir = next_dir;
  } while (!(cur == origin && dir == 0));

  // Rotate so the polygon starts at its first recorded corner; the loop above
  // emits vertices only at turns, which already drops collinear points.
  return verts;
}

/// Shoelace area of a lattice polygon (positive for counter-clockwise).
inline double polygon_area(std::span<const LatticePoint> poly) {
  double acc = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    acc += static_cast<double>(p.col) * q.row - static_cast<double>(q.col) * p.row;
  }
  return acc / 2.0;
}

}  // namespace roofkit
