#pragma once

#include <cmath>
#include <span>

#include "roofkit/grid.hpp"
#include "roofkit/plane.hpp"
#include "roofkit/sections.hpp"
#include "roofkit/types.hpp"

namespace roofkit {

/// The comparison baseline: per-pixel height-to-ground sampled as DSM - DTM,
/// then one least-squares plane per section (normal equations about the
/// centroid for conditioning).
inline RoofPlane baseline_dsm_reconstruct(const RoofSection& sec, const DsmGrid& dsm,
                                          const DtmGrid& dtm, const Georef& georef) {
  if (sec.pixels.empty()) throw DegenerateError("empty section");

  double sx = 0, sy = 0, sh = 0;
  const double n = static_cast<double>(sec.pixels.size());
  std::vector<double> xs(sec.pixels.size()), ys(sec.pixels.size()), hs(sec.pixels.size());
  for (std::size_t i = 0; i < sec.pixels.size(); ++i) {
    const WorldPoint q = world_from_pixel(georef, sec.pixels[i].row, sec.pixels[i].col);
    xs[i] = q.x;
    ys[i] = q.y;
    hs[i] = dsm.bilinear(q.x, q.y) - dtm.bilinear(q.x, q.y);
    sx += xs[i];
    sy += ys[i];
    sh += hs[i];
  }
  const double mx = sx / n, my = sy / n, mh = sh / n;

  double sxx = 0, sxy = 0, syy = 0, sxh = 0, syh = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my, dh = hs[i] - mh;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
    sxh += dx * dh;
    syh += dy * dh;
  }
  const double det = sxx * syy - sxy * sxy;
  const double scale = std::max(sxx + syy, 1e-30);
  if (det <= 1e-12 * scale * scale)
    throw DegenerateError("singular normal system (section pixels collinear)");

  RoofPlane plane;
  plane.a = (sxh * syy - syh * sxy) / det;
  plane.b = (syh * sxx - sxh * sxy) / det;
  plane.c = mh - plane.a * mx - plane.b * my;
  plane.provenance = PlaneProvenance::Baseline;
  plane.corner_count = 0;
  return plane;
}

}  // namespace roofkit
