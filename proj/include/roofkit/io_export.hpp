#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roofkit/codec.hpp"
#include "roofkit/contour.hpp"
#include "roofkit/errors.hpp"
#include "roofkit/grid.hpp"
#include "roofkit/plane.hpp"
#include "roofkit/rng.hpp"
#include "roofkit/sections.hpp"

namespace roofkit {

// ---------------------------------------------------------------------------
// xyz + ID text hand-off: one "x y z id" line per point, fixed 6 decimals.
// ---------------------------------------------------------------------------

struct PointRecord {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  int id = 0;  // split id: 0 training, 1 validation, 2 testing
};

inline void write_xyz(std::span<const PointRecord> records, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw IoError("cannot open for writing: " + path);
  for (const auto& rec : records) {
    if (!std::isfinite(rec.x) || !std::isfinite(rec.y) || !std::isfinite(rec.z)) {
      std::fclose(fp);
      throw IoError("non-finite point record");
    }
    std::fprintf(fp, "%.6f %.6f %.6f %d\n", rec.x, rec.y, rec.z, rec.id);
  }
  if (std::fclose(fp) != 0) throw IoError("write failed: " + path);
}

inline std::vector<PointRecord> read_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::vector<PointRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    PointRecord rec;
    std::istringstream ss(line);
    if (!(ss >> rec.x >> rec.y >> rec.z >> rec.id))
      throw IoError("malformed xyz line: " + line);
    records.push_back(rec);
  }
  return records;
}

// ---------------------------------------------------------------------------
// Wavefront OBJ export of reconstructed sections.
// ---------------------------------------------------------------------------

struct ObjOptions {
  bool extrude_to_ground = false;  // add vertical walls down to z = 0
  std::optional<Georef> georef;    // lattice -> world scaling; identity if absent
};

/// Writes one lifted boundary polygon per section (roof face), optionally
/// extruded to the ground as an LOD2-style prism. Sections whose boundary
/// degenerates below 3 vertices are skipped; returns the number written.
inline int write_obj(std::span<const RoofSection> sections, std::span<const RoofPlane> planes,
                     const std::string& path, const ObjOptions& opt = {}) {
  if (sections.size() != planes.size()) throw Error("sections/planes size mismatch");
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw IoError("cannot open for writing: " + path);

  const Georef g = opt.georef.value_or(Georef{0.0, 0.0, 1.0});
  int written = 0;
  int vertex_base = 1;  // OBJ indices are 1-based
  for (std::size_t i = 0; i < sections.size(); ++i) {
    const auto poly = trace_boundary(sections[i].pixels);
    if (poly.size() < 3) continue;
    const int n = static_cast<int>(poly.size());
    std::fprintf(fp, "o section_%d\n", sections[i].id);
    for (const auto& v : poly) {
      const WorldPoint w = world_from_pixel(g, v.row, v.col);
      const double z = height_at(planes[i], w.x, w.y);
      std::fprintf(fp, "v %.6f %.6f %.6f\n", w.x, w.y, z);
    }
    if (opt.extrude_to_ground) {
      for (const auto& v : poly) {
        const WorldPoint w = world_from_pixel(g, v.row, v.col);
        std::fprintf(fp, "v %.6f %.6f 0.000000\n", w.x, w.y);
      }
    }
    std::fprintf(fp, "f");
    for (int k = 0; k < n; ++k) std::fprintf(fp, " %d", vertex_base + k);
    std::fprintf(fp, "\n");
    if (opt.extrude_to_ground) {
      for (int k = 0; k < n; ++k) {
        const int k1 = (k + 1) % n;
        std::fprintf(fp, "f %d %d %d %d\n", vertex_base + k, vertex_base + k1,
                     vertex_base + n + k1, vertex_base + n + k);
      }
      vertex_base += 2 * n;
    } else {
      vertex_base += n;
    }
    ++written;
  }
  if (std::fclose(fp) != 0) throw IoError("write failed: " + path);
  return written;
}

/// Minimal OBJ reader used to validate exports: vertices and faces only.
struct ObjMesh {
  std::vector<Point3> vertices;
  std::vector<std::vector<int>> faces;  // 0-based indices
};

inline ObjMesh read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  ObjMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Point3 p;
      if (!(ss >> p.x >> p.y >> p.z)) throw IoError("malformed vertex: " + line);
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<int> face;
      std::string tok;
      while (ss >> tok) {
        const int idx = std::stoi(tok.substr(0, tok.find('/')));
        if (idx < 1 || idx > static_cast<int>(mesh.vertices.size()))
          throw IoError("face index out of range: " + line);
        face.push_back(idx - 1);
      }
      if (face.size() < 3) throw IoError("face with fewer than 3 vertices: " + line);
      mesh.faces.push_back(std::move(face));
    }
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// COCO-format annotation writer.
// ---------------------------------------------------------------------------

struct CocoTile {
  std::string image_name;
  int width = 0;
  int height = 0;
  std::vector<std::vector<PixelCoord>> masks;  // sections mode
  std::vector<CornerSquare> squares;           // corners mode
};

enum class CocoMode { Sections, Corners };

/// Sections mode: every mask is an annotation under one dummy category.
/// Corners mode: every square is an annotation under its height label
/// (hah..hsh). Annotation ids are dense, starting at 1.
inline nlohmann::json make_coco(std::span<const CocoTile> tiles, CocoMode mode,
                                int class_count = kDefaultClassCount) {
  nlohmann::json images = nlohmann::json::array();
  nlohmann::json annotations = nlohmann::json::array();
  nlohmann::json categories = nlohmann::json::array();

  if (mode == CocoMode::Sections) {
    categories.push_back({{"id", 1}, {"name", "roof_section"}, {"supercategory", "roof"}});
  } else {
    for (int z = 1; z <= class_count; ++z)
      categories.push_back(
          {{"id", z}, {"name", class_label_of_height(z, class_count)}, {"supercategory", "corner"}});
  }

  int next_ann = 1;
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    const auto& tile = tiles[t];
    const int image_id = static_cast<int>(t) + 1;
    images.push_back({{"id", image_id},
                      {"file_name", tile.image_name},
                      {"width", tile.width},
                      {"height", tile.height}});

    auto add_annotation = [&](const std::vector<PixelCoord>& mask, int category) {
      if (mask.empty()) return;
      const auto poly = trace_boundary(mask);
      nlohmann::json ring = nlohmann::json::array();
      for (const auto& v : poly) {
        ring.push_back(v.col);
        ring.push_back(v.row);
      }
      int rmin = mask[0].row, rmax = mask[0].row, cmin = mask[0].col, cmax = mask[0].col;
      for (const auto& p : mask) {
        rmin = std::min(rmin, p.row);
        rmax = std::max(rmax, p.row);
        cmin = std::min(cmin, p.col);
        cmax = std::max(cmax, p.col);
      }
      annotations.push_back({{"id", next_ann++},
                             {"image_id", image_id},
                             {"category_id", category},
                             {"segmentation", nlohmann::json::array({ring})},
                             {"bbox", {cmin, rmin, cmax - cmin + 1, rmax - rmin + 1}},
                             {"area", mask.size()},
                             {"iscrowd", 0}});
    };

    if (mode == CocoMode::Sections) {
      for (const auto& mask : tile.masks) add_annotation(mask, 1);
    } else {
      for (const auto& sq : tile.squares) {
        const auto fp = square_footprint(sq, tile.width, tile.height);
        if (fp.empty()) continue;
        std::vector<PixelCoord> mask;
        mask.reserve(static_cast<std::size_t>(fp.row1 - fp.row0 + 1) * (fp.col1 - fp.col0 + 1));
        for (int r = fp.row0; r <= fp.row1; ++r)
          for (int c = fp.col0; c <= fp.col1; ++c) mask.push_back({r, c});
        add_annotation(mask, sq.z);
      }
    }
  }

  return {{"images", images}, {"annotations", annotations}, {"categories", categories}};
}

inline void write_coco(std::span<const CocoTile> tiles, CocoMode mode, const std::string& path,
                       int class_count = kDefaultClassCount) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << make_coco(tiles, mode, class_count).dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// 60/20/20 dataset split.
// ---------------------------------------------------------------------------

struct DatasetPartition {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

/// Uniform shuffle deterministic in the seed; sizes floor(0.6 n), floor(0.2 n)
/// and the remainder.
inline DatasetPartition split_dataset(std::span<const int> ids, std::uint64_t seed) {
  if (ids.empty()) throw Error("split_dataset needs a nonempty id list");
  std::vector<int> shuffled(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(shuffled);
  const std::size_t n = shuffled.size();
  const std::size_t n_train = n * 6 / 10;  // exact floor(0.6 n)
  const std::size_t n_val = n * 2 / 10;
  DatasetPartition part;
  part.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  part.val.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_val);
  part.test.assign(shuffled.begin() + n_train + n_val, shuffled.end());
  return part;
}

}  // namespace roofkit
