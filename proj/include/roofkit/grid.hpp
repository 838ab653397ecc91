#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "roofkit/errors.hpp"
#include "roofkit/types.hpp"

namespace roofkit {

/// Node-registered elevation grid: values[r*width + c] is the elevation at
/// world position (origin_x + c*cell_size, origin_y + r*cell_size).
struct ElevationGrid {
  int width = 0;
  int height = 0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double cell_size = 1.0;
  std::vector<double> values;

  double at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * width + col];
  }
  double& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }

  bool contains(double x, double y) const {
    const double gx = (x - origin_x) / cell_size;
    const double gy = (y - origin_y) / cell_size;
    const double eps = 1e-9;
    return gx >= -eps && gx <= width - 1 + eps && gy >= -eps && gy <= height - 1 + eps;
  }

  double bilinear(double x, double y) const {
    if (!contains(x, y)) throw FootprintError("sample outside grid footprint");
    double gx = (x - origin_x) / cell_size;
    double gy = (y - origin_y) / cell_size;
    gx = std::min(std::max(gx, 0.0), static_cast<double>(width - 1));
    gy = std::min(std::max(gy, 0.0), static_cast<double>(height - 1));
    const int c0 = std::min(static_cast<int>(gx), width - 2 >= 0 ? width - 2 : 0);
    const int r0 = std::min(static_cast<int>(gy), height - 2 >= 0 ? height - 2 : 0);
    const int c1 = std::min(c0 + 1, width - 1);
    const int r1 = std::min(r0 + 1, height - 1);
    const double fx = gx - c0;
    const double fy = gy - r0;
    const double top = at(r0, c0) * (1.0 - fx) + at(r0, c1) * fx;
    const double bot = at(r1, c0) * (1.0 - fx) + at(r1, c1) * fx;
    return top * (1.0 - fy) + bot * fy;
  }
};

using DtmGrid = ElevationGrid;
using DsmGrid = ElevationGrid;

namespace detail {

inline std::string shortest_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// ASCII grid format: one header line "width height origin_x origin_y
/// cell_size", then row-major values (shortest round-trip decimal; "nan"
/// allowed). One row of nodes per line.
inline void write_grid(const ElevationGrid& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << grid.width << " " << grid.height << " " << detail::shortest_double(grid.origin_x)
      << " " << detail::shortest_double(grid.origin_y) << " "
      << detail::shortest_double(grid.cell_size) << "\n";
  for (int r = 0; r < grid.height; ++r) {
    for (int c = 0; c < grid.width; ++c) {
      if (c) out << ' ';
      out << detail::shortest_double(grid.at(r, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

inline ElevationGrid read_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  ElevationGrid grid;
  if (!(in >> grid.width >> grid.height >> grid.origin_x >> grid.origin_y >> grid.cell_size))
    throw IoError("malformed grid header: " + path);
  if (grid.width <= 0 || grid.height <= 0 || grid.cell_size <= 0)
    throw IoError("invalid grid dimensions: " + path);
  grid.values.resize(static_cast<std::size_t>(grid.width) * grid.height);
  for (auto& v : grid.values) {
    std::string tok;
    if (!(in >> tok)) throw IoError("grid values truncated: " + path);
    if (tok == "nan" || tok == "-nan") {
      v = std::numeric_limits<double>::quiet_NaN();
    } else {
      try {
        v = std::stod(tok);
      } catch (...) {
        throw IoError("bad grid value '" + tok + "' in " + path);
      }
    }
  }
  return grid;
}

}  // namespace roofkit
