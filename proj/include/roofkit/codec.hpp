#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roofkit/errors.hpp"
#include "roofkit/raster.hpp"

namespace roofkit {

// ---------------------------------------------------------------------------
// Dataset splits and the blue-channel blend protocol.
//
// Segmentation pixels are written as {0, 0, code} with code 200 for training,
// 210 for validation and 220 for testing. The codes double as the wire
// contract between the 2D-segmentation stage and the corner-inference stage.
// ---------------------------------------------------------------------------

enum class DatasetSplit : std::uint8_t { Training = 0, Validation = 1, Testing = 2 };

constexpr std::array<DatasetSplit, 3> kAllSplits = {
    DatasetSplit::Training, DatasetSplit::Validation, DatasetSplit::Testing};

constexpr std::uint8_t blend_code(DatasetSplit s) {
  switch (s) {
    case DatasetSplit::Training: return 200;
    case DatasetSplit::Validation: return 210;
    case DatasetSplit::Testing: return 220;
  }
  return 200;
}

constexpr int split_id(DatasetSplit s) { return static_cast<int>(s); }

constexpr const char* split_name(DatasetSplit s) {
  switch (s) {
    case DatasetSplit::Training: return "training";
    case DatasetSplit::Validation: return "validation";
    case DatasetSplit::Testing: return "testing";
  }
  return "training";
}

inline std::optional<DatasetSplit> split_from_blend_code(std::uint8_t blue) {
  switch (blue) {
    case 200: return DatasetSplit::Training;
    case 210: return DatasetSplit::Validation;
    case 220: return DatasetSplit::Testing;
    default: return std::nullopt;
  }
}

inline bool is_blend_pixel(Rgb v) {
  return v.r == 0 && v.g == 0 && split_from_blend_code(v.b).has_value();
}

/// Rewrites every mask pixel to {0, 0, code(split)}; all others untouched.
inline Raster encode_split_blend(const Raster& tile, std::span<const PixelCoord> mask,
                                 DatasetSplit split) {
  Raster out = tile;
  const Rgb code{0, 0, blend_code(split)};
  for (PixelCoord p : mask) {
    if (!out.in_bounds(p)) throw BoundsError("mask pixel outside tile");
    out.set(p, code);
  }
  return out;
}

struct SplitPixel {
  PixelCoord pos;
  DatasetSplit split;
};

/// Returns exactly the pixels whose RGB matches one of the three blend codes,
/// in row-major order.
inline std::vector<SplitPixel> decode_split_blend(const Raster& tile) {
  std::vector<SplitPixel> out;
  for (int r = 0; r < tile.height(); ++r) {
    for (int c = 0; c < tile.width(); ++c) {
      const Rgb v = tile.at(r, c);
      if (v.r != 0 || v.g != 0) continue;
      if (auto s = split_from_blend_code(v.b)) out.push_back({{r, c}, *s});
    }
  }
  return out;
}

/// Natural pixels that would collide with a blend code ({0,0,200|210|220})
/// get their blue decremented by one before any blending happens.
inline Raster screen_blend_collisions(const Raster& tile) {
  Raster out = tile;
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) {
      Rgb v = out.at(r, c);
      if (is_blend_pixel(v)) {
        v.b -= 1;
        out.set(r, c, v);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corner squares: a q x q block whose red channel carries 200 + z, with
// z in [1, class_count] meters height-to-ground. Green and blue are left
// intact so squares stay decodable when drawn over blend pixels.
// ---------------------------------------------------------------------------

constexpr int kDefaultClassCount = 19;

struct CornerSquare {
  PixelCoord center;
  int side = 15;  // q, odd
  int z = 1;      // meters, 1..class_count
  bool operator==(const CornerSquare&) const = default;
};

struct SquareFootprint {
  int row0, row1, col0, col1;  // inclusive, clipped to the frame
  bool empty() const { return row1 < row0 || col1 < col0; }
};

inline SquareFootprint square_footprint(const CornerSquare& sq, int frame_width,
                                        int frame_height) {
  const int half = sq.side / 2;
  return {std::max(sq.center.row - half, 0), std::min(sq.center.row + half, frame_height - 1),
          std::max(sq.center.col - half, 0), std::min(sq.center.col + half, frame_width - 1)};
}

inline Raster encode_corner_square(const Raster& tile, const CornerSquare& sq,
                                   int class_count = kDefaultClassCount) {
  if (sq.z < 1 || sq.z > class_count)
    throw ClassRangeError("corner height class out of range: " + std::to_string(sq.z));
  Raster out = tile;
  const auto fp = square_footprint(sq, tile.width(), tile.height());
  for (int r = fp.row0; r <= fp.row1; ++r) {
    for (int c = fp.col0; c <= fp.col1; ++c) {
      Rgb v = out.at(r, c);
      v.r = static_cast<std::uint8_t>(200 + sq.z);
      out.set(r, c, v);
    }
  }
  return out;
}

struct DecodedSquare {
  CornerSquare square;
  bool malformed = false;  // block was not a (border-clipped) q x q square
};

namespace detail {

// Nominal center along one axis from a clipped block extent.
inline int clipped_center(int lo, int hi, int q, int dim_minus_1, bool* malformed) {
  const int extent = hi - lo + 1;
  const int half = q / 2;
  if (extent == q) return lo + half;
  if (extent > q) {
    *malformed = true;
    return (lo + hi) / 2;
  }
  const bool at_low = lo == 0;
  const bool at_high = hi == dim_minus_1;
  if (at_low && at_high) return (lo + hi) / 2;  // frame narrower than q
  if (at_low) return hi - half;
  if (at_high) return lo + half;
  *malformed = true;
  return (lo + hi) / 2;
}

}  // namespace detail

/// Detects maximal 4-connected blocks of constant red in [201, 200+class_count]
/// (other channels ignored) and recovers center and z = red - 200. Blocks that
/// are not a solid, possibly border-clipped q x q square come back flagged
/// with a best-fit center.
inline std::vector<DecodedSquare> decode_corner_squares(const Raster& tile, int q,
                                                        int class_count = kDefaultClassCount) {
  const int w = tile.width();
  const int h = tile.height();
  const int red_max = 200 + class_count;
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);
  std::vector<DecodedSquare> out;
  std::vector<PixelCoord> stack;

  auto red_of = [&](int r, int c) { return static_cast<int>(tile.at(r, c).r); };

  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * w + c;
      if (visited[idx]) continue;
      const int red = red_of(r, c);
      if (red < 201 || red > red_max) continue;

      int row0 = r, row1 = r, col0 = c, col1 = c;
      std::size_t count = 0;
      visited[idx] = 1;
      stack.assign(1, {r, c});
      while (!stack.empty()) {
        const PixelCoord p = stack.back();
        stack.pop_back();
        ++count;
        row0 = std::min(row0, p.row);
        row1 = std::max(row1, p.row);
        col0 = std::min(col0, p.col);
        col1 = std::max(col1, p.col);
        const PixelCoord nbrs[4] = {{p.row - 1, p.col}, {p.row + 1, p.col},
                                    {p.row, p.col - 1}, {p.row, p.col + 1}};
        for (PixelCoord n : nbrs) {
          if (n.row < 0 || n.row >= h || n.col < 0 || n.col >= w) continue;
          const std::size_t ni = static_cast<std::size_t>(n.row) * w + n.col;
          if (visited[ni] || red_of(n.row, n.col) != red) continue;
          visited[ni] = 1;
          stack.push_back(n);
        }
      }

      bool malformed = false;
      const std::size_t bbox_area =
          static_cast<std::size_t>(row1 - row0 + 1) * (col1 - col0 + 1);
      if (count != bbox_area) malformed = true;
      const int crow = detail::clipped_center(row0, row1, q, h - 1, &malformed);
      const int ccol = detail::clipped_center(col0, col1, q, w - 1, &malformed);
      out.push_back({CornerSquare{{crow, ccol}, q, red - 200}, malformed});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Height-class label alphabet: z = k maps to "h" + k-th letter + "h", so
// 1 -> "hah", 2 -> "hbh", ..., 19 -> "hsh".
// ---------------------------------------------------------------------------

inline std::string class_label_of_height(int z, int class_count = kDefaultClassCount) {
  if (z < 1 || z > class_count)
    throw ClassRangeError("height class out of range: " + std::to_string(z));
  return std::string{'h', static_cast<char>('a' + z - 1), 'h'};
}

inline int height_of_class_label(std::string_view label,
                                 int class_count = kDefaultClassCount) {
  if (label.size() != 3 || label[0] != 'h' || label[2] != 'h')
    throw LabelError("malformed height label: " + std::string(label));
  const int z = label[1] - 'a' + 1;
  if (z < 1 || z > class_count) throw LabelError("height label out of alphabet: " + std::string(label));
  return z;
}

}  // namespace roofkit
