#pragma once

#include <vector>

#include "roofkit/codec.hpp"
#include "roofkit/grid.hpp"
#include "roofkit/raster.hpp"

namespace roofkit {

namespace detail {

// Fill-eligible: any blue in the tolerance window [200, 220] with red = green
// = 0, so seam sections carrying mixed split codes unify as one region.
inline bool flood_eligible(Rgb v) { return v.r == 0 && v.g == 0 && v.b >= 200 && v.b <= 220; }

}  // namespace detail

/// First-come-first-served split unification on the reassembled raster:
/// scanning row-major, each not-yet-visited segmentation pixel flood-fills its
/// 4-connected section with its own blue code. Idempotent; non-segmentation
/// pixels are never touched.
inline Raster unify_sections(const Raster& full) {
  Raster out = full;
  const int w = out.width();
  const int h = out.height();
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);
  std::vector<PixelCoord> stack;

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * w + c;
      if (visited[idx] || !detail::flood_eligible(out.at(r, c))) continue;
      const Rgb code{0, 0, out.at(r, c).b};
      visited[idx] = 1;
      stack.assign(1, {r, c});
      while (!stack.empty()) {
        const PixelCoord p = stack.back();
        stack.pop_back();
        out.set(p, code);
        const PixelCoord nbrs[4] = {{p.row - 1, p.col}, {p.row + 1, p.col},
                                    {p.row, p.col - 1}, {p.row, p.col + 1}};
        for (PixelCoord n : nbrs) {
          if (n.row < 0 || n.row >= h || n.col < 0 || n.col >= w) continue;
          const std::size_t ni = static_cast<std::size_t>(n.row) * w + n.col;
          if (visited[ni] || !detail::flood_eligible(out.at(n.row, n.col))) continue;
          visited[ni] = 1;
          stack.push_back(n);
        }
      }
    }
  }
  return out;
}

/// Altitude above mean sea level for a ground-height observation.
inline double apply_dtm(double x, double y, double z_ground, const DtmGrid& dtm) {
  return dtm.bilinear(x, y) + z_ground;
}

/// Inverse of apply_dtm, used when ingesting altitude-referenced truth.
inline double remove_dtm(double x, double y, double altitude, const DtmGrid& dtm) {
  return altitude - dtm.bilinear(x, y);
}

}  // namespace roofkit
