#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roofkit/codec.hpp"
#include "roofkit/errors.hpp"
#include "roofkit/grid.hpp"
#include "roofkit/plane.hpp"
#include "roofkit/raster.hpp"
#include "roofkit/rng.hpp"
#include "roofkit/types.hpp"

namespace roofkit {

// ---------------------------------------------------------------------------
// Scene model
// ---------------------------------------------------------------------------

enum class RoofKind { Flat, Shed, Gable, Hip };

constexpr const char* roof_kind_name(RoofKind k) {
  switch (k) {
    case RoofKind::Flat: return "flat";
    case RoofKind::Shed: return "shed";
    case RoofKind::Gable: return "gable";
    case RoofKind::Hip: return "hip";
  }
  return "flat";
}

inline RoofKind roof_kind_from_name(const std::string& name) {
  if (name == "flat") return RoofKind::Flat;
  if (name == "shed") return RoofKind::Shed;
  if (name == "gable") return RoofKind::Gable;
  if (name == "hip") return RoofKind::Hip;
  throw Error("unknown roof kind: " + name);
}

/// Oblique acquisition geometry. Azimuth is the compass direction toward the
/// sensor in world axes (x east, y north-as-row); elevation in (0, 90].
struct ViewParams {
  double azimuth_deg = 181.10;
  double elevation_deg = 59.30;
  double gsd = 0.38;  // meters per pixel
};

struct SunParams {
  double zenith_deg = 35.0;  // omega
  double azimuth_deg = 135.0;
};

struct Building {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // world meters, axis-aligned
  RoofKind kind = RoofKind::Flat;
  double eave_height = 3.0;
  double ridge_height = 3.0;
};

/// One planar roof facet: a plan-space polygon whose vertices carry
/// height-to-ground, plus the ground-height plane they span.
struct SectionTruth {
  std::vector<WorldPoint> polygon;
  std::vector<double> corner_heights;
  int building = -1;
  RoofPlane plane;  // z = a*x + b*y + c over plan coordinates

  double mean_height() const {
    double s = 0;
    for (double h : corner_heights) s += h;
    return corner_heights.empty() ? 0.0 : s / static_cast<double>(corner_heights.size());
  }
};

struct SceneTruth {
  int frame_width = 0;
  int frame_height = 0;
  Georef georef;  // origin (0, 0), gsd from the view
  ViewParams view;
  SunParams sun;
  std::vector<Building> buildings;
  std::vector<SectionTruth> sections;
  DtmGrid dtm;
};

struct SceneParams {
  int frame_width = 1200;
  int frame_height = 1200;
  ViewParams view;
  SunParams sun;
  std::vector<RoofKind> kinds = {RoofKind::Flat, RoofKind::Shed, RoofKind::Gable, RoofKind::Hip};

  double min_side_m = 8.0;
  double max_side_m = 16.0;
  double eave_min = 2.0;
  double eave_max = 9.0;
  double rise_min = 1.0;
  double rise_max = 6.0;
  double slope_max = 0.75;  // keeps oblique projection far from folding
  bool integer_heights = true;
  bool diagonal_sheds = false;  // sheds sloping on both axes (4 distinct heights)
  bool unit_pitch = false;      // gable/hip rise locked to half the width

  // World-space separation between facets of one roof (pixel-separated truth).
  double section_gap_m = 1.5;
  double gable_gap_m = -1.0;      // ridge inset; < 0 means section_gap_m
  double hip_gap_slant_x = -1.0;  // trapezoid slant inset along x
  double hip_gap_slant_y = -1.0;  // triangle slant inset along y
  double hip_gap_ridge = -1.0;    // trapezoid ridge inset

  int corner_size = 15;  // q, used for keep-out margins
  int class_count = kDefaultClassCount;

  double dtm_base = 100.0;
  double dtm_slope_x = 0.002;
  double dtm_slope_y = -0.001;
  double dtm_cell = 8.0;

  std::uint8_t background_gray = 120;
  bool render_shadows = false;
};

// ---------------------------------------------------------------------------
// Oblique projection
// ---------------------------------------------------------------------------

/// World displacement per meter of height: a point at height h images at its
/// ground position plus h * this vector (length 1/tan(elevation), pointing
/// away from the sensor azimuth).
inline WorldPoint oblique_shift_per_meter(const ViewParams& view) {
  const double az = view.azimuth_deg * std::numbers::pi / 180.0;
  const double el = view.elevation_deg * std::numbers::pi / 180.0;
  const double k = 1.0 / std::tan(el);
  return {-std::sin(az) * k, -std::cos(az) * k};
}

/// Fractional pixel position of a world point at height h.
inline PixelPoint project_oblique(double x, double y, double h, const ViewParams& view,
                                  const Georef& georef) {
  const WorldPoint w = oblique_shift_per_meter(view);
  return pixel_from_world(georef, x + h * w.x, y + h * w.y);
}

/// Ground-height plane re-expressed over image coordinates: the oblique map is
/// affine on a planar roof, so heights stay affine in image position.
inline RoofPlane image_plane(const RoofPlane& plan, const ViewParams& view) {
  const WorldPoint w = oblique_shift_per_meter(view);
  const double d = 1.0 + plan.a * w.x + plan.b * w.y;
  if (std::abs(d) < 1e-6) throw DegenerateError("roof plane folds under the oblique view");
  RoofPlane out = plan;
  out.a = plan.a / d;
  out.b = plan.b / d;
  out.c = plan.c / d;
  return out;
}

// ---------------------------------------------------------------------------
// Section derivation per roof kind
// ---------------------------------------------------------------------------

namespace detail {

inline RoofPlane plane_from_polygon(const std::vector<WorldPoint>& poly,
                                    const std::vector<double>& heights) {
  // First three corners are non-collinear for every construction below.
  return plane_from_points({poly[0].x, poly[0].y, heights[0]},
                           {poly[1].x, poly[1].y, heights[1]},
                           {poly[2].x, poly[2].y, heights[2]});
}

inline SectionTruth make_section(std::vector<WorldPoint> poly, std::vector<double> heights,
                                 int building) {
  SectionTruth sec;
  sec.plane = plane_from_polygon(poly, heights);
  sec.polygon = std::move(poly);
  sec.corner_heights = std::move(heights);
  sec.building = building;
  return sec;
}

}  // namespace detail

struct ShedSlope {
  // Corner height deltas across the footprint; axis sheds use one of the two.
  double dx = 0.0;
  double dy = 0.0;
};

/// Derives the planar facets of one building. Gaps inset facing edges so the
/// rendered facets stay pixel-separated; insets run along each facet's level
/// direction wherever one exists, so eave corners keep their height.
inline std::vector<SectionTruth> derive_sections(const Building& b, int index,
                                                 const SceneParams& p,
                                                 const ShedSlope& shed = {}) {
  const double e = b.eave_height;
  const double r = b.ridge_height;
  std::vector<SectionTruth> out;

  auto gap_or = [&](double v) { return v >= 0.0 ? v : p.section_gap_m; };

  switch (b.kind) {
    case RoofKind::Flat: {
      out.push_back(detail::make_section(
          {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}}, {e, e, e, e}, index));
      break;
    }
    case RoofKind::Shed: {
      const double ex = b.x1 - b.x0;
      const double ey = b.y1 - b.y0;
      const double h10 = e + shed.dx;
      const double h01 = e + shed.dy;
      const double h11 = e + shed.dx + shed.dy;
      (void)ex;
      (void)ey;
      out.push_back(detail::make_section(
          {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}}, {e, h10, h11, h01}, index));
      break;
    }
    case RoofKind::Gable: {
      const bool along_x = (b.x1 - b.x0) >= (b.y1 - b.y0);
      const double delta = gap_or(p.gable_gap_m);
      // Work in (u along ridge, v across), then map back.
      const double u0 = along_x ? b.x0 : b.y0, u1 = along_x ? b.x1 : b.y1;
      const double v0 = along_x ? b.y0 : b.x0, v1 = along_x ? b.y1 : b.x1;
      const double vm = (v0 + v1) / 2.0;
      const double half = (v1 - v0) / 2.0;
      if (delta >= half) throw PlacementError("gable gap exceeds half the footprint");
      const double s = (r - e) / half;
      const double hr = r - s * delta;
      auto pt = [&](double u, double v) -> WorldPoint {
        return along_x ? WorldPoint{u, v} : WorldPoint{v, u};
      };
      out.push_back(detail::make_section(
          {pt(u0, v0), pt(u1, v0), pt(u1, vm - delta), pt(u0, vm - delta)}, {e, e, hr, hr},
          index));
      out.push_back(detail::make_section(
          {pt(u0, v1), pt(u1, v1), pt(u1, vm + delta), pt(u0, vm + delta)}, {e, e, hr, hr},
          index));
      break;
    }
    case RoofKind::Hip: {
      const bool along_x = (b.x1 - b.x0) >= (b.y1 - b.y0);
      const double u0 = along_x ? b.x0 : b.y0, u1 = along_x ? b.x1 : b.y1;
      const double v0 = along_x ? b.y0 : b.x0, v1 = along_x ? b.y1 : b.x1;
      const double w = v1 - v0;
      const double vm = (v0 + v1) / 2.0;
      const double half = w / 2.0;
      const double a = gap_or(p.hip_gap_slant_x);
      const double bb = gap_or(p.hip_gap_slant_y);
      const double delta = gap_or(p.hip_gap_ridge);
      if (delta >= half || bb >= half)
        throw PlacementError("hip gaps exceed half the footprint");
      if ((u1 - u0) - w + 2 * delta - 2 * a < 0)
        throw PlacementError("hip footprint too short for its ridge");
      const double s = (r - e) / half;
      const double hr = r - s * delta;   // trapezoid ridge-side height
      const double ha = r - s * bb;      // triangle apex height
      auto pt = [&](double u, double v) -> WorldPoint {
        return along_x ? WorldPoint{u, v} : WorldPoint{v, u};
      };
      // Trapezoids slope across v only, so u-insets keep corner heights.
      out.push_back(detail::make_section({pt(u0 + a, v0), pt(u1 - a, v0),
                                          pt(u1 - half + delta - a, vm - delta),
                                          pt(u0 + half - delta + a, vm - delta)},
                                         {e, e, hr, hr}, index));
      out.push_back(detail::make_section({pt(u0 + a, v1), pt(u1 - a, v1),
                                          pt(u1 - half + delta - a, vm + delta),
                                          pt(u0 + half - delta + a, vm + delta)},
                                         {e, e, hr, hr}, index));
      // End triangles slope along u, so v-insets keep eave heights integral.
      out.push_back(detail::make_section(
          {pt(u0, v0 + bb), pt(u0, v1 - bb), pt(u0 + half - bb, vm)}, {e, e, ha}, index));
      out.push_back(detail::make_section(
          {pt(u1, v0 + bb), pt(u1, v1 - bb), pt(u1 - half + bb, vm)}, {e, e, ha}, index));
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scene generation
// ---------------------------------------------------------------------------

inline SceneTruth generate_scene(std::uint64_t seed, int n_buildings, const SceneParams& p) {
  if (p.view.elevation_deg <= 0.0 || p.view.elevation_deg > 90.0)
    throw PlacementError("elevation must lie in (0, 90]");
  SceneTruth scene;
  scene.frame_width = p.frame_width;
  scene.frame_height = p.frame_height;
  scene.georef = {0.0, 0.0, p.view.gsd};
  scene.view = p.view;
  scene.sun = p.sun;

  const double world_w = p.frame_width * p.view.gsd;
  const double world_h = p.frame_height * p.view.gsd;
  const WorldPoint shift = oblique_shift_per_meter(p.view);
  const double max_h = std::min<double>(p.class_count, p.eave_max + p.rise_max);
  const double max_disp = max_h * std::hypot(shift.x, shift.y);
  // Keep-out so masks, squares and projected tops never leave the frame or
  // touch a neighbour.
  const double spacing = max_disp + p.corner_size * p.view.gsd + 4.0;
  const double edge = spacing;

  Rng rng(seed);
  if (n_buildings > 0) {
    const int cells = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_buildings))));
    const double cell_w = (world_w - 2 * edge) / cells;
    const double cell_h = (world_h - 2 * edge) / cells;
    if (cell_w < p.min_side_m + spacing || cell_h < p.min_side_m + spacing)
      throw PlacementError("frame too small for the requested building density");

    for (int i = 0; i < n_buildings; ++i) {
      const int cr = i / cells;
      const int cc = i % cells;
      Building b;
      b.kind = p.kinds.empty()
                   ? RoofKind::Flat
                   : p.kinds[static_cast<std::size_t>(rng.uniform_int(
                         0, static_cast<std::int64_t>(p.kinds.size()) - 1))];

      const double max_w = std::min(p.max_side_m, std::min(cell_w, cell_h) - spacing);
      auto pick_len = [&](double lo, double hi) {
        if (p.integer_heights) return static_cast<double>(rng.uniform_int(
            static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
        return rng.uniform(lo, hi);
      };
      double side_w = pick_len(p.min_side_m, std::max(p.min_side_m, max_w));
      double side_l = pick_len(p.min_side_m, std::max(p.min_side_m, max_w));
      if ((b.kind == RoofKind::Gable || b.kind == RoofKind::Hip)) {
        // Even width so unit pitch stays integral; hips also need length.
        side_w = 2.0 * std::floor(side_w / 2.0);
        side_w = std::max(side_w, 2.0 * std::ceil(p.min_side_m / 2.0));
        if (b.kind == RoofKind::Hip) side_l = std::max(side_l, side_w);
        if (side_l < side_w) std::swap(side_l, side_w);
      }

      double eave = p.integer_heights
                        ? static_cast<double>(rng.uniform_int(
                              static_cast<std::int64_t>(p.eave_min),
                              static_cast<std::int64_t>(p.eave_max)))
                        : rng.uniform(p.eave_min, p.eave_max);
      eave = std::clamp(eave, 1.0, static_cast<double>(p.class_count));
      double rise = 0.0;
      if (b.kind != RoofKind::Flat) {
        const double run = (b.kind == RoofKind::Shed) ? side_w : side_w / 2.0;
        double rise_cap = std::min(p.rise_max, p.slope_max * run);
        if (p.unit_pitch && b.kind != RoofKind::Shed) {
          rise = side_w / 2.0;
        } else {
          rise_cap = std::max(rise_cap, p.rise_min);
          rise = p.integer_heights ? static_cast<double>(rng.uniform_int(
                                         static_cast<std::int64_t>(p.rise_min),
                                         static_cast<std::int64_t>(std::max(p.rise_min, rise_cap))))
                                   : rng.uniform(p.rise_min, rise_cap);
        }
      }
      if (eave + rise > p.class_count) eave = std::max(1.0, p.class_count - rise);
      b.eave_height = eave;
      b.ridge_height = eave + rise;

      const double jitter_x = cell_w - side_l - spacing;
      const double jitter_y = cell_h - side_w - spacing;
      auto jitter = [&](double range) {
        if (range <= 0) return 0.0;
        if (p.integer_heights)
          return static_cast<double>(rng.uniform_int(0, static_cast<std::int64_t>(range)));
        return rng.uniform(0.0, range);
      };
      b.x0 = std::floor(edge + cc * cell_w + spacing / 2.0) + jitter(jitter_x);
      b.y0 = std::floor(edge + cr * cell_h + spacing / 2.0) + jitter(jitter_y);
      b.x1 = b.x0 + side_l;
      b.y1 = b.y0 + side_w;

      ShedSlope slope;
      if (b.kind == RoofKind::Shed) {
        if (p.diagonal_sheds) {
          slope.dx = std::max(1.0, std::floor(rise / 2.0));
          slope.dy = rise;
          if (slope.dx == slope.dy) slope.dy += 1.0;  // distinct corner heights
          if (eave + slope.dx + slope.dy > p.class_count)
            slope.dy = std::max(1.0, p.class_count - eave - slope.dx);
          if (slope.dx == slope.dy) slope.dx = std::max(1.0, slope.dx - 1.0);
        } else if (rng.bernoulli(0.5)) {
          slope.dx = rise;
        } else {
          slope.dy = rise;
        }
        b.ridge_height = eave + std::max(slope.dx, slope.dy);
      }

      const int index = static_cast<int>(scene.buildings.size());
      auto secs = derive_sections(b, index, p, slope);
      for (auto& sec : secs) {
        for (double h : sec.corner_heights)
          if (h < 1.0 - 1e-9 || h > p.class_count + 1e-9)
            throw PlacementError("corner height escaped the class range");
        scene.sections.push_back(std::move(sec));
      }
      scene.buildings.push_back(b);
    }
  }

  // Gentle deterministic terrain under the whole frame.
  DtmGrid dtm;
  dtm.cell_size = p.dtm_cell;
  dtm.origin_x = 0.0;
  dtm.origin_y = 0.0;
  dtm.width = static_cast<int>(std::ceil(world_w / p.dtm_cell)) + 1;
  dtm.height = static_cast<int>(std::ceil(world_h / p.dtm_cell)) + 1;
  dtm.values.resize(static_cast<std::size_t>(dtm.width) * dtm.height);
  for (int rr = 0; rr < dtm.height; ++rr)
    for (int cc2 = 0; cc2 < dtm.width; ++cc2)
      dtm.at(rr, cc2) =
          p.dtm_base + p.dtm_slope_x * (cc2 * p.dtm_cell) + p.dtm_slope_y * (rr * p.dtm_cell);
  scene.dtm = std::move(dtm);
  return scene;
}

// ---------------------------------------------------------------------------
// Oracle rendering
// ---------------------------------------------------------------------------

struct RenderedOracle {
  int width = 0;
  int height = 0;
  Georef georef;
  int class_count = kDefaultClassCount;
  std::vector<std::int32_t> section_of;        // -1 = background, post separation
  std::vector<std::vector<PixelCoord>> masks;  // per scene section, row-major
  std::vector<CornerSquare> squares;
  std::vector<int> square_section;  // ground-truth owner of each square
  std::vector<double> truth_heights;  // image-space plane heights, NaN outside
  std::vector<int> empty_sections;    // fully occluded or out-of-frame facets
};

namespace detail {

inline bool point_in_polygon_inclusive(double x, double y, std::span<const PixelPoint> poly) {
  const double eps = 1e-7;
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = poly[i].col, yi = poly[i].row;
    const double xj = poly[j].col, yj = poly[j].row;
    // On-segment counts as inside (keeps integer-lattice corners in the mask).
    const double dx = xj - xi, dy = yj - yi;
    const double len2 = dx * dx + dy * dy;
    if (len2 > 0) {
      const double t = std::clamp(((x - xi) * dx + (y - yi) * dy) / len2, 0.0, 1.0);
      const double px = xi + t * dx - x, py = yi + t * dy - y;
      if (px * px + py * py <= eps * eps) return true;
    } else if (std::abs(x - xi) <= eps && std::abs(y - yi) <= eps) {
      return true;
    }
    if ((yi > y) != (yj > y)) {
      const double x_cross = xi + (y - yi) * (xj - xi) / (yj - yi);
      if (x_cross > x) inside = !inside;
    }
  }
  return inside;
}

}  // namespace detail

/// Projects every facet with per-vertex displacement, rasterizes in painter's
/// order (higher mean height wins contested pixels), enforces the
/// pixel-separated ground-truth contract by dropping contact pixels, and
/// emits corner squares plus the exact per-pixel height reference.
inline RenderedOracle render_oracle(const SceneTruth& scene, int corner_size = 15,
                                    int class_count = kDefaultClassCount) {
  RenderedOracle out;
  out.width = scene.frame_width;
  out.height = scene.frame_height;
  out.georef = scene.georef;
  out.class_count = class_count;
  const std::size_t npix = static_cast<std::size_t>(out.width) * out.height;
  out.section_of.assign(npix, -1);
  out.truth_heights.assign(npix, std::numeric_limits<double>::quiet_NaN());
  out.masks.resize(scene.sections.size());

  // Painter's order: ascending mean height, stable on ties.
  std::vector<int> order(scene.sections.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scene.sections[a].mean_height() < scene.sections[b].mean_height();
  });

  std::vector<RoofPlane> img_planes(scene.sections.size());
  for (int si : order) {
    const SectionTruth& sec = scene.sections[si];
    img_planes[si] = image_plane(sec.plane, scene.view);

    std::vector<PixelPoint> poly(sec.polygon.size());
    double rmin = 1e18, rmax = -1e18, cmin = 1e18, cmax = -1e18;
    for (std::size_t i = 0; i < sec.polygon.size(); ++i) {
      poly[i] = project_oblique(sec.polygon[i].x, sec.polygon[i].y, sec.corner_heights[i],
                                scene.view, scene.georef);
      rmin = std::min(rmin, poly[i].row);
      rmax = std::max(rmax, poly[i].row);
      cmin = std::min(cmin, poly[i].col);
      cmax = std::max(cmax, poly[i].col);
    }
    const int r0 = std::max(0, static_cast<int>(std::floor(rmin)));
    const int r1 = std::min(out.height - 1, static_cast<int>(std::ceil(rmax)));
    const int c0 = std::max(0, static_cast<int>(std::floor(cmin)));
    const int c1 = std::min(out.width - 1, static_cast<int>(std::ceil(cmax)));
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c)
        if (detail::point_in_polygon_inclusive(c, r, poly))
          out.section_of[static_cast<std::size_t>(r) * out.width + c] = si;
  }

  // Ground truth must be pixel-separated: drop pixels 4-adjacent to a
  // different section.
  std::vector<std::size_t> contact;
  for (int r = 0; r < out.height; ++r) {
    for (int c = 0; c < out.width; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * out.width + c;
      const std::int32_t id = out.section_of[idx];
      if (id < 0) continue;
      const PixelCoord nbrs[4] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
      for (PixelCoord n : nbrs) {
        if (n.row < 0 || n.row >= out.height || n.col < 0 || n.col >= out.width) continue;
        const std::int32_t nid = out.section_of[static_cast<std::size_t>(n.row) * out.width + n.col];
        if (nid >= 0 && nid != id) {
          contact.push_back(idx);
          break;
        }
      }
    }
  }
  for (std::size_t idx : contact) out.section_of[idx] = -1;

  // Masks and the per-pixel height reference from the image-space planes.
  for (int r = 0; r < out.height; ++r) {
    for (int c = 0; c < out.width; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * out.width + c;
      const std::int32_t id = out.section_of[idx];
      if (id < 0) continue;
      out.masks[id].push_back({r, c});
      const WorldPoint q = world_from_pixel(out.georef, r, c);
      out.truth_heights[idx] = height_at(img_planes[id], q.x, q.y);
    }
  }
  for (std::size_t i = 0; i < out.masks.size(); ++i)
    if (out.masks[i].empty()) out.empty_sections.push_back(static_cast<int>(i));

  // Corner squares at projected corner pixels, height class rounded and
  // clamped to the label range.
  for (std::size_t si = 0; si < scene.sections.size(); ++si) {
    const SectionTruth& sec = scene.sections[si];
    for (std::size_t i = 0; i < sec.polygon.size(); ++i) {
      const PixelPoint pp = project_oblique(sec.polygon[i].x, sec.polygon[i].y,
                                            sec.corner_heights[i], scene.view, scene.georef);
      CornerSquare sq;
      sq.center = {static_cast<int>(std::llround(pp.row)), static_cast<int>(std::llround(pp.col))};
      sq.side = corner_size;
      sq.z = static_cast<int>(std::llround(sec.corner_heights[i]));
      sq.z = std::clamp(sq.z, 1, class_count);
      const auto fp = square_footprint(sq, out.width, out.height);
      if (fp.empty()) continue;  // entirely outside the frame
      out.squares.push_back(sq);
      out.square_section.push_back(static_cast<int>(si));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Imagery background (the stand-in for the satellite raster).
// ---------------------------------------------------------------------------

inline Raster render_background(const SceneTruth& scene, const RenderedOracle& oracle,
                                const SceneParams& params) {
  Raster img(scene.frame_width, scene.frame_height,
             {params.background_gray, params.background_gray, params.background_gray});
  img.georef() = scene.georef;

  if (params.render_shadows) {
    // Flat darkening along the solar direction; visual texture only.
    const double az = scene.sun.azimuth_deg * std::numbers::pi / 180.0;
    const double len = std::tan(scene.sun.zenith_deg * std::numbers::pi / 180.0);
    const WorldPoint sdir{-std::sin(az) * len, -std::cos(az) * len};
    for (const auto& sec : scene.sections) {
      std::vector<PixelPoint> poly(sec.polygon.size());
      for (std::size_t i = 0; i < sec.polygon.size(); ++i) {
        const double h = sec.corner_heights[i];
        poly[i] = pixel_from_world(scene.georef, sec.polygon[i].x + h * sdir.x,
                                   sec.polygon[i].y + h * sdir.y);
      }
      double rmin = 1e18, rmax = -1e18, cmin = 1e18, cmax = -1e18;
      for (const auto& v : poly) {
        rmin = std::min(rmin, v.row);
        rmax = std::max(rmax, v.row);
        cmin = std::min(cmin, v.col);
        cmax = std::max(cmax, v.col);
      }
      for (int r = std::max(0, (int)std::floor(rmin));
           r <= std::min(scene.frame_height - 1, (int)std::ceil(rmax)); ++r)
        for (int c = std::max(0, (int)std::floor(cmin));
             c <= std::min(scene.frame_width - 1, (int)std::ceil(cmax)); ++c)
          if (detail::point_in_polygon_inclusive(c, r, poly)) {
            const Rgb v = img.at(r, c);
            img.set(r, c, {static_cast<std::uint8_t>(v.r * 3 / 5),
                           static_cast<std::uint8_t>(v.g * 3 / 5),
                           static_cast<std::uint8_t>(v.b * 3 / 5)});
          }
    }
  }

  // Roof fill so the imagery carries the sections visually.
  for (std::size_t si = 0; si < oracle.masks.size(); ++si) {
    const std::uint8_t shade = static_cast<std::uint8_t>(150 + (si * 17) % 60);
    for (PixelCoord p : oracle.masks[si]) img.set(p, {shade, shade, shade});
  }
  return img;
}

// ---------------------------------------------------------------------------
// Noise model emulating imperfect network inference.
// ---------------------------------------------------------------------------

struct NoiseParams {
  double p_drop = 0.0;        // per-square drop probability
  double jitter_sigma = 0.0;  // center jitter, pixels
  double p_class_err = 0.0;   // probability of a +-1 class shift
  double boundary_noise = 0.0;  // per-rim-pixel erode/dilate probability
};

inline bool is_zero(const NoiseParams& n) {
  return n.p_drop == 0.0 && n.jitter_sigma == 0.0 && n.p_class_err == 0.0 &&
         n.boundary_noise == 0.0;
}

/// Degrades oracle outputs deterministically in the seed. The truth-height
/// reference is left untouched; only the pipeline-facing masks and squares
/// change.
inline RenderedOracle inject_noise(const RenderedOracle& oracle, const NoiseParams& noise,
                                   std::uint64_t seed) {
  RenderedOracle out = oracle;
  if (is_zero(noise)) return out;
  Rng rng(seed);

  // Squares: drop, jitter, class error (reflected at the range ends).
  std::vector<CornerSquare> squares;
  std::vector<int> owners;
  for (std::size_t i = 0; i < out.squares.size(); ++i) {
    if (noise.p_drop > 0.0 && rng.bernoulli(noise.p_drop)) continue;
    CornerSquare sq = out.squares[i];
    if (noise.jitter_sigma > 0.0) {
      sq.center.row += static_cast<int>(std::llround(rng.normal(0.0, noise.jitter_sigma)));
      sq.center.col += static_cast<int>(std::llround(rng.normal(0.0, noise.jitter_sigma)));
    }
    if (noise.p_class_err > 0.0 && rng.bernoulli(noise.p_class_err)) {
      const int dz = rng.bernoulli(0.5) ? 1 : -1;
      int z = sq.z + dz;
      if (z < 1 || z > out.class_count) z = sq.z - dz;
      sq.z = std::clamp(z, 1, out.class_count);
    }
    if (square_footprint(sq, out.width, out.height).empty()) continue;
    squares.push_back(sq);
    owners.push_back(out.square_section[i]);
  }
  out.squares = std::move(squares);
  out.square_section = std::move(owners);

  if (noise.boundary_noise > 0.0) {
    const int w = out.width, h = out.height;
    auto id_at = [&](int r, int c) -> std::int32_t {
      if (r < 0 || r >= h || c < 0 || c >= w) return -1;
      return out.section_of[static_cast<std::size_t>(r) * w + c];
    };
    std::vector<std::pair<std::size_t, std::int32_t>> edits;
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::int32_t id = id_at(r, c);
        const std::int32_t n4[4] = {id_at(r - 1, c), id_at(r + 1, c), id_at(r, c - 1),
                                    id_at(r, c + 1)};
        if (id >= 0) {
          const bool rim = n4[0] != id || n4[1] != id || n4[2] != id || n4[3] != id;
          if (rim && rng.bernoulli(noise.boundary_noise))
            edits.push_back({static_cast<std::size_t>(r) * w + c, -1});
        } else {
          // Dilate only where a single section borders, keeping separation.
          std::int32_t nb = -1;
          bool mixed = false;
          for (std::int32_t v : n4) {
            if (v < 0) continue;
            if (nb < 0)
              nb = v;
            else if (nb != v)
              mixed = true;
          }
          if (nb >= 0 && !mixed && rng.bernoulli(noise.boundary_noise))
            edits.push_back({static_cast<std::size_t>(r) * w + c, nb});
        }
      }
    }
    for (auto [idx, v] : edits) out.section_of[idx] = v;
    for (auto& m : out.masks) m.clear();
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const std::int32_t id = out.section_of[static_cast<std::size_t>(r) * w + c];
        if (id >= 0) out.masks[id].push_back({r, c});
      }
  }
  return out;
}

// ---------------------------------------------------------------------------
// LOD1-style surface model: terrain plus each building flattened to its mean
// roof height (the coarse baseline source).
// ---------------------------------------------------------------------------

inline DsmGrid make_lod1_dsm(const SceneTruth& scene) {
  DsmGrid dsm = scene.dtm;
  std::vector<double> mean_height(scene.buildings.size(), 0.0);
  std::vector<int> counts(scene.buildings.size(), 0);
  for (const auto& sec : scene.sections) {
    if (sec.building < 0) continue;
    for (double hh : sec.corner_heights) {
      mean_height[sec.building] += hh;
      ++counts[sec.building];
    }
  }
  for (std::size_t i = 0; i < mean_height.size(); ++i)
    if (counts[i]) mean_height[i] /= counts[i];

  for (int r = 0; r < dsm.height; ++r) {
    for (int c = 0; c < dsm.width; ++c) {
      const double x = dsm.origin_x + c * dsm.cell_size;
      const double y = dsm.origin_y + r * dsm.cell_size;
      for (std::size_t bi = 0; bi < scene.buildings.size(); ++bi) {
        const Building& b = scene.buildings[bi];
        if (x >= b.x0 && x <= b.x1 && y >= b.y0 && y <= b.y1) {
          dsm.at(r, c) += mean_height[bi];
          break;
        }
      }
    }
  }
  return dsm;
}

// ---------------------------------------------------------------------------
// Scene serialization (test fixtures, CLI hand-off).
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const SceneTruth& scene) {
  nlohmann::json buildings = nlohmann::json::array();
  for (const auto& b : scene.buildings)
    buildings.push_back({{"x0", b.x0},
                         {"y0", b.y0},
                         {"x1", b.x1},
                         {"y1", b.y1},
                         {"kind", roof_kind_name(b.kind)},
                         {"eave_height", b.eave_height},
                         {"ridge_height", b.ridge_height}});
  nlohmann::json sections = nlohmann::json::array();
  for (const auto& s : scene.sections) {
    nlohmann::json poly = nlohmann::json::array();
    for (const auto& v : s.polygon) poly.push_back({v.x, v.y});
    sections.push_back({{"polygon", poly},
                        {"corner_heights", s.corner_heights},
                        {"building", s.building},
                        {"plane", {s.plane.a, s.plane.b, s.plane.c}}});
  }
  return {{"frame_width", scene.frame_width},
          {"frame_height", scene.frame_height},
          {"view",
           {{"azimuth_deg", scene.view.azimuth_deg},
            {"elevation_deg", scene.view.elevation_deg},
            {"gsd", scene.view.gsd}}},
          {"sun", {{"zenith_deg", scene.sun.zenith_deg}, {"azimuth_deg", scene.sun.azimuth_deg}}},
          {"buildings", buildings},
          {"sections", sections}};
}

inline SceneTruth scene_from_json(const nlohmann::json& j) {
  SceneTruth scene;
  scene.frame_width = j.at("frame_width").get<int>();
  scene.frame_height = j.at("frame_height").get<int>();
  scene.view = {j.at("view").at("azimuth_deg").get<double>(),
                j.at("view").at("elevation_deg").get<double>(),
                j.at("view").at("gsd").get<double>()};
  scene.sun = {j.at("sun").at("zenith_deg").get<double>(),
               j.at("sun").at("azimuth_deg").get<double>()};
  scene.georef = {0.0, 0.0, scene.view.gsd};
  for (const auto& jb : j.at("buildings")) {
    Building b;
    b.x0 = jb.at("x0").get<double>();
    b.y0 = jb.at("y0").get<double>();
    b.x1 = jb.at("x1").get<double>();
    b.y1 = jb.at("y1").get<double>();
    b.kind = roof_kind_from_name(jb.at("kind").get<std::string>());
    b.eave_height = jb.at("eave_height").get<double>();
    b.ridge_height = jb.at("ridge_height").get<double>();
    scene.buildings.push_back(b);
  }
  for (const auto& js : j.at("sections")) {
    SectionTruth s;
    for (const auto& jv : js.at("polygon")) s.polygon.push_back({jv[0], jv[1]});
    s.corner_heights = js.at("corner_heights").get<std::vector<double>>();
    s.building = js.at("building").get<int>();
    const auto& pl = js.at("plane");
    s.plane.a = pl[0];
    s.plane.b = pl[1];
    s.plane.c = pl[2];
    s.plane.provenance = PlaneProvenance::Triangle;
    scene.sections.push_back(std::move(s));
  }
  return scene;
}

}  // namespace roofkit
