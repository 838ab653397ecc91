#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "roofkit/errors.hpp"
#include "roofkit/types.hpp"

namespace roofkit {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

/// 8-bit RGB raster with an optional world georeference.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, Rgb fill = {0, 0, 0})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height * 3) {
    if (width <= 0 || height <= 0) throw Error("raster dimensions must be positive");
    for (std::size_t i = 0; i < data_.size(); i += 3) {
      data_[i] = fill.r;
      data_[i + 1] = fill.g;
      data_[i + 2] = fill.b;
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  bool in_bounds(PixelCoord p) const { return in_bounds(p.row, p.col); }

  Rgb at(int row, int col) const {
    const std::size_t i = index(row, col);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  Rgb at(PixelCoord p) const { return at(p.row, p.col); }

  void set(int row, int col, Rgb v) {
    const std::size_t i = index(row, col);
    data_[i] = v.r;
    data_[i + 1] = v.g;
    data_[i + 2] = v.b;
  }
  void set(PixelCoord p, Rgb v) { set(p.row, p.col, v); }

  const std::vector<std::uint8_t>& data() const { return data_; }
  std::vector<std::uint8_t>& data() { return data_; }

  std::optional<Georef>& georef() { return georef_; }
  const std::optional<Georef>& georef() const { return georef_; }

  bool operator==(const Raster& o) const {
    return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
  }

 private:
  std::size_t index(int row, int col) const {
    return (static_cast<std::size_t>(row) * width_ + col) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
  std::optional<Georef> georef_;
};

/// Regular tiling with margin overlap. Tile origins advance by stride = s - p;
/// a clamped origin (dim - s) is appended per axis when the last stride-aligned
/// tile stops short of the boundary, so every source pixel is covered.
struct TileGrid {
  struct Tile {
    int row0 = 0;
    int col0 = 0;
    Raster image;
  };

  int tile_size = 0;  // s
  int overlap = 0;    // p
  std::vector<Tile> tiles;
  std::optional<Georef> source_georef;
};

inline std::vector<int> tile_axis_origins(int dim, int s, int p) {
  const int stride = s - p;
  std::vector<int> origins;
  for (int o = 0; o + s <= dim; o += stride) origins.push_back(o);
  if (origins.empty() || origins.back() + s < dim) origins.push_back(dim - s);
  return origins;
}

inline TileGrid split_tiles(const Raster& src, int s, int p) {
  if (s <= 2 * p || p < 0)
    throw InvalidTiling("tile size must exceed twice the overlap");
  if (src.width() < s || src.height() < s)
    throw InvalidTiling("raster smaller than one tile");

  TileGrid grid;
  grid.tile_size = s;
  grid.overlap = p;
  grid.source_georef = src.georef();

  const auto rows = tile_axis_origins(src.height(), s, p);
  const auto cols = tile_axis_origins(src.width(), s, p);
  grid.tiles.reserve(rows.size() * cols.size());
  for (int r0 : rows) {
    for (int c0 : cols) {
      Raster tile(s, s);
      auto& dst = tile.data();
      const auto& sd = src.data();
      for (int r = 0; r < s; ++r) {
        const std::size_t src_off = (static_cast<std::size_t>(r0 + r) * src.width() + c0) * 3;
        std::memcpy(dst.data() + static_cast<std::size_t>(r) * s * 3, sd.data() + src_off,
                    static_cast<std::size_t>(s) * 3);
      }
      if (src.georef()) {
        const Georef& g = *src.georef();
        tile.georef() = Georef{g.origin_x + c0 * g.gsd, g.origin_y + r0 * g.gsd, g.gsd};
      }
      grid.tiles.push_back({r0, c0, std::move(tile)});
    }
  }
  return grid;
}

/// Overlap pixels take the value of the last covering tile in tile-list
/// (row-major) order.
inline Raster reassemble(const TileGrid& grid, int width, int height) {
  Raster out(width, height);
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(width) * height, 0);
  for (const auto& t : grid.tiles) {
    const Raster& img = t.image;
    if (t.row0 < 0 || t.col0 < 0 || t.row0 + img.height() > height || t.col0 + img.width() > width)
      throw CoverageError("tile exceeds target frame");
    auto& dst = out.data();
    const auto& sd = img.data();
    for (int r = 0; r < img.height(); ++r) {
      const std::size_t dst_off =
          (static_cast<std::size_t>(t.row0 + r) * width + t.col0) * 3;
      std::memcpy(dst.data() + dst_off, sd.data() + static_cast<std::size_t>(r) * img.width() * 3,
                  static_cast<std::size_t>(img.width()) * 3);
      std::memset(covered.data() + static_cast<std::size_t>(t.row0 + r) * width + t.col0, 1,
                  static_cast<std::size_t>(img.width()));
    }
  }
  for (std::size_t i = 0; i < covered.size(); ++i)
    if (!covered[i]) throw CoverageError("tile grid does not cover the frame");
  out.georef() = grid.source_georef;
  return out;
}

}  // namespace roofkit
