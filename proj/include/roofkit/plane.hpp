#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "roofkit/errors.hpp"
#include "roofkit/types.hpp"

namespace roofkit {

enum class PlaneProvenance { Triangle, TwoCorner, OneCorner, NoCorner, Degenerate, Baseline };

constexpr const char* provenance_name(PlaneProvenance p) {
  switch (p) {
    case PlaneProvenance::Triangle: return "triangle";
    case PlaneProvenance::TwoCorner: return "two_corner";
    case PlaneProvenance::OneCorner: return "one_corner";
    case PlaneProvenance::NoCorner: return "no_corner";
    case PlaneProvenance::Degenerate: return "degenerate";
    case PlaneProvenance::Baseline: return "baseline";
  }
  return "no_corner";
}

/// z = a*x + b*y + c, with x/y in world meters (or pixels without a georef)
/// and z in meters height-to-ground. Horizontal fallbacks have a = b = 0.
struct RoofPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  PlaneProvenance provenance = PlaneProvenance::NoCorner;
  int corner_count = 0;
};

inline double height_at(const RoofPlane& p, double x, double y) {
  return p.a * x + p.b * y + p.c;
}

/// Collapses three pairwise-distinct ascending corner heights to at most two
/// values: when the middle sits below the extremes' midpoint, the lower pair
/// is averaged, otherwise the upper pair. Already-repeating triples pass
/// through unchanged.
inline std::array<double, 3> file_heights(double z1, double z2, double z3) {
  if (!(z1 <= z2 && z2 <= z3)) throw OrderError("heights must be ascending");
  if (z1 == z2 || z2 == z3) return {z1, z2, z3};
  if (z2 < (z1 + z3) / 2.0) {
    const double m = (z1 + z2) / 2.0;
    return {m, m, z3};
  }
  const double m = (z2 + z3) / 2.0;
  return {z1, m, m};
}

namespace detail {

// Twice the signed triangle area; exact for pixel coordinates.
inline std::int64_t area2(PixelCoord p, PixelCoord q, PixelCoord r) {
  const std::int64_t qx = q.col - p.col, qy = q.row - p.row;
  const std::int64_t rx = r.col - p.col, ry = r.row - p.row;
  return qx * ry - qy * rx;
}

inline std::int64_t abs_area2(PixelCoord p, PixelCoord q, PixelCoord r) {
  return std::llabs(area2(p, q, r));
}

// Strictly convex hull (Andrew monotone chain) over point indices; collinear
// points on hull edges are dropped. Returns indices into pts.
inline std::vector<int> convex_hull_indices(std::span<const PixelCoord> pts) {
  std::vector<int> order(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (pts[a].col != pts[b].col) return pts[a].col < pts[b].col;
    return pts[a].row < pts[b].row;
  });
  order.erase(std::unique(order.begin(), order.end(),
                          [&](int a, int b) { return pts[a] == pts[b]; }),
              order.end());
  const int n = static_cast<int>(order.size());
  if (n < 3) return order;

  std::vector<int> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && area2(pts[hull[k - 2]], pts[hull[k - 1]], pts[order[i]]) <= 0) --k;
    hull[k++] = order[i];
  }
  for (int i = n - 2, t = k + 1; i >= 0; --i) {
    while (k >= t && area2(pts[hull[k - 2]], pts[hull[k - 1]], pts[order[i]]) <= 0) --k;
    hull[k++] = order[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace detail

/// Indices of the 3-subset maximizing triangle area, lexicographically
/// smallest triple on ties. Exhaustive up to 12 points; beyond that the
/// search is restricted to points sitting on strict convex-hull vertex
/// positions (where any max-area triangle's vertices must lie).
inline std::array<int, 3> largest_triangle_indices(std::span<const PixelCoord> pts) {
  const int n = static_cast<int>(pts.size());
  if (n < 3) throw DegenerateError("largest_triangle needs at least 3 points");

  std::vector<int> candidates;
  if (n <= 12) {
    candidates.resize(n);
    for (int i = 0; i < n; ++i) candidates[i] = i;
  } else {
    const auto hull = detail::convex_hull_indices(pts);
    std::vector<std::uint8_t> on_hull(n, 0);
    for (int hi : hull)
      for (int i = 0; i < n; ++i)
        if (pts[i] == pts[hi]) on_hull[i] = 1;
    for (int i = 0; i < n; ++i)
      if (on_hull[i]) candidates.push_back(i);
    if (candidates.size() < 3) throw DegenerateError("all points collinear");
  }

  std::array<int, 3> best{-1, -1, -1};
  std::int64_t best_area = 0;
  const int m = static_cast<int>(candidates.size());
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (int k = j + 1; k < m; ++k) {
        const std::int64_t a =
            detail::abs_area2(pts[candidates[i]], pts[candidates[j]], pts[candidates[k]]);
        if (a > best_area) {
          best_area = a;
          best = {candidates[i], candidates[j], candidates[k]};
        }
      }
  if (best_area == 0) throw DegenerateError("all points collinear");
  return best;
}

inline std::array<PixelCoord, 3> largest_triangle(std::span<const PixelCoord> pts) {
  const auto idx = largest_triangle_indices(pts);
  return {pts[idx[0]], pts[idx[1]], pts[idx[2]]};
}

struct Point3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

/// Unique plane through three points with non-collinear (x, y) projections.
/// Solved about the centroid; residuals stay below 1e-9 on meter-scale input.
inline RoofPlane plane_from_points(Point3 p1, Point3 p2, Point3 p3) {
  const double cx = (p1.x + p2.x + p3.x) / 3.0;
  const double cy = (p1.y + p2.y + p3.y) / 3.0;
  const double x1 = p1.x - cx, y1 = p1.y - cy;
  const double x2 = p2.x - cx, y2 = p2.y - cy;
  const double x3 = p3.x - cx, y3 = p3.y - cy;

  const double det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
  const double scale = std::max({std::abs(x2 - x1), std::abs(y3 - y1), std::abs(x3 - x1),
                                 std::abs(y2 - y1), 1e-30});
  if (std::abs(det) <= 1e-12 * scale * scale)
    throw DegenerateError("plane points are collinear in (x, y)");

  const double a = ((p2.z - p1.z) * (y3 - y1) - (p3.z - p1.z) * (y2 - y1)) / det;
  const double b = ((x2 - x1) * (p3.z - p1.z) - (x3 - x1) * (p2.z - p1.z)) / det;
  const double c0 = p1.z - a * x1 - b * y1;  // offset in centered coords
  RoofPlane plane;
  plane.a = a;
  plane.b = b;
  plane.c = c0 - a * cx - b * cy;
  plane.provenance = PlaneProvenance::Triangle;
  plane.corner_count = 3;
  return plane;
}

/// One corner observation feeding a section's plane: the representative rim
/// pixel of an assigned square plus that square's height class.
struct CornerObservation {
  PixelCoord pixel;
  double z = 0.0;
};

struct ReconstructOptions {
  double default_height = 6.11;    // horizontal fallback when no corner decodes
  std::optional<Georef> georef;    // scales pixels to meters when present
};

/// Full per-section fit result; `plane` is the contract, the rest is
/// diagnostics (filing deltas feed the pipeline report).
struct SectionFit {
  RoofPlane plane;
  bool filing_applied = false;
  std::array<PixelCoord, 3> triangle{};     // valid for Triangle provenance
  std::array<double, 3> original_z{};       // ascending, pre-filing
  std::array<double, 3> filed_z{};          // ascending, post-filing
};

/// N >= 3: largest triangle, heights filed, plane interpolated. N = 2 / 1:
/// horizontal at the mean / the single height. N = 0: horizontal at the
/// default. Degenerate point sets demote to a horizontal plane at the mean of
/// the extreme heights.
inline SectionFit reconstruct_section(std::span<const CornerObservation> corners,
                                      const ReconstructOptions& opt) {
  const int n = static_cast<int>(corners.size());
  SectionFit fit;
  fit.plane.corner_count = n;

  auto horizontal = [&](double z, PlaneProvenance prov) {
    fit.plane.a = 0.0;
    fit.plane.b = 0.0;
    fit.plane.c = z;
    fit.plane.provenance = prov;
    return fit;
  };

  if (n == 0) return horizontal(opt.default_height, PlaneProvenance::NoCorner);
  if (n == 1) return horizontal(corners[0].z, PlaneProvenance::OneCorner);
  if (n == 2)
    return horizontal((corners[0].z + corners[1].z) / 2.0, PlaneProvenance::TwoCorner);

  auto extremes_mean = [&] {
    double lo = corners[0].z, hi = corners[0].z;
    for (const auto& c : corners) {
      lo = std::min(lo, c.z);
      hi = std::max(hi, c.z);
    }
    return (lo + hi) / 2.0;
  };

  std::vector<PixelCoord> pts(corners.size());
  for (std::size_t i = 0; i < corners.size(); ++i) pts[i] = corners[i].pixel;

  std::array<int, 3> tri;
  try {
    tri = largest_triangle_indices(pts);
  } catch (const DegenerateError&) {
    horizontal(extremes_mean(), PlaneProvenance::Degenerate);
    return fit;
  }

  std::array<CornerObservation, 3> chosen = {corners[tri[0]], corners[tri[1]], corners[tri[2]]};
  std::sort(chosen.begin(), chosen.end(), [](const CornerObservation& a, const CornerObservation& b) {
    if (a.z != b.z) return a.z < b.z;
    return a.pixel < b.pixel;
  });
  fit.original_z = {chosen[0].z, chosen[1].z, chosen[2].z};
  fit.filed_z = file_heights(chosen[0].z, chosen[1].z, chosen[2].z);
  fit.filing_applied = fit.filed_z != fit.original_z;
  fit.triangle = {chosen[0].pixel, chosen[1].pixel, chosen[2].pixel};

  const Georef g = opt.georef.value_or(Georef{0.0, 0.0, 1.0});
  std::array<Point3, 3> p3;
  for (int i = 0; i < 3; ++i) {
    const WorldPoint w = world_from_pixel(g, chosen[i].pixel.row, chosen[i].pixel.col);
    p3[i] = {w.x, w.y, fit.filed_z[i]};
  }
  try {
    const int count = n;
    fit.plane = plane_from_points(p3[0], p3[1], p3[2]);
    fit.plane.corner_count = count;
  } catch (const DegenerateError&) {
    horizontal(extremes_mean(), PlaneProvenance::Degenerate);
  }
  return fit;
}

}  // namespace roofkit
