#pragma once

#include <span>
#include <unordered_set>
#include <vector>

#include "roofkit/codec.hpp"
#include "roofkit/raster.hpp"

namespace roofkit {

/// One 4-connected set of segmentation pixels. Pixels and rim are kept in
/// row-major order. Distinct sections are pixel-disjoint by construction.
struct RoofSection {
  int id = 0;
  std::vector<PixelCoord> pixels;
  DatasetSplit split = DatasetSplit::Training;
  std::vector<PixelCoord> rim;  // pixels with a 4-neighbor outside the section
};

namespace detail {

/// Dense -1/-x label grid helper shared by extraction and corner assignment.
struct LabelGrid {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;  // -1 = background

  std::int32_t at(int row, int col) const {
    return labels[static_cast<std::size_t>(row) * width + col];
  }
  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height && col >= 0 && col < width;
  }
};

inline LabelGrid label_sections(std::span<const RoofSection> sections, int width, int height) {
  LabelGrid grid{width, height,
                 std::vector<std::int32_t>(static_cast<std::size_t>(width) * height, -1)};
  for (const auto& sec : sections)
    for (PixelCoord p : sec.pixels)
      grid.labels[static_cast<std::size_t>(p.row) * width + p.col] = sec.id;
  return grid;
}

}  // namespace detail

/// Rim of a pixel set: members with at least one 4-neighbor outside the set
/// (the image border counts as outside). Row-major order.
inline std::vector<PixelCoord> section_rim(std::span<const PixelCoord> pixels) {
  std::unordered_set<std::int64_t> inside;
  inside.reserve(pixels.size() * 2);
  auto key = [](PixelCoord p) {
    return (static_cast<std::int64_t>(p.row) << 32) | static_cast<std::uint32_t>(p.col);
  };
  for (PixelCoord p : pixels) inside.insert(key(p));

  std::vector<PixelCoord> rim;
  for (PixelCoord p : pixels) {
    const PixelCoord nbrs[4] = {{p.row - 1, p.col}, {p.row + 1, p.col},
                                {p.row, p.col - 1}, {p.row, p.col + 1}};
    for (PixelCoord n : nbrs) {
      if (!inside.count(key(n))) {
        rim.push_back(p);
        break;
      }
    }
  }
  return rim;
}

/// Labels the 4-connected components of segmentation pixels in a blended
/// raster. Section ids follow the row-major order of each component's first
/// pixel; the split comes from that first pixel's blue code. Connectivity
/// ignores which of the three codes a pixel carries, so seam-spanning
/// components with mixed codes stay one section.
inline std::vector<RoofSection> extract_sections(const Raster& blended) {
  const int w = blended.width();
  const int h = blended.height();
  std::vector<std::uint8_t> seg(static_cast<std::size_t>(w) * h, 0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (is_blend_pixel(blended.at(r, c))) seg[static_cast<std::size_t>(r) * w + c] = 1;

  std::vector<std::uint8_t> visited(seg.size(), 0);
  std::vector<RoofSection> sections;
  std::vector<PixelCoord> stack;

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * w + c;
      if (!seg[idx] || visited[idx]) continue;

      RoofSection sec;
      sec.id = static_cast<int>(sections.size());
      sec.split = *split_from_blend_code(blended.at(r, c).b);
      visited[idx] = 1;
      stack.assign(1, {r, c});
      while (!stack.empty()) {
        const PixelCoord p = stack.back();
        stack.pop_back();
        sec.pixels.push_back(p);
        const PixelCoord nbrs[4] = {{p.row - 1, p.col}, {p.row + 1, p.col},
                                    {p.row, p.col - 1}, {p.row, p.col + 1}};
        for (PixelCoord n : nbrs) {
          if (n.row < 0 || n.row >= h || n.col < 0 || n.col >= w) continue;
          const std::size_t ni = static_cast<std::size_t>(n.row) * w + n.col;
          if (!seg[ni] || visited[ni]) continue;
          visited[ni] = 1;
          stack.push_back(n);
        }
      }
      std::sort(sec.pixels.begin(), sec.pixels.end());
      sec.rim = section_rim(sec.pixels);
      sections.push_back(std::move(sec));
    }
  }
  return sections;
}

}  // namespace roofkit
