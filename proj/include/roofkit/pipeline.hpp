#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "roofkit/baseline.hpp"
#include "roofkit/codec.hpp"
#include "roofkit/corners.hpp"
#include "roofkit/grid.hpp"
#include "roofkit/io_export.hpp"
#include "roofkit/merge.hpp"
#include "roofkit/metrics.hpp"
#include "roofkit/plane.hpp"
#include "roofkit/png_io.hpp"
#include "roofkit/raster.hpp"
#include "roofkit/sections.hpp"
#include "roofkit/synth.hpp"

namespace roofkit {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct PipelineConfig {
  int tile_size = 230;  // s
  int overlap = 10;     // p
  int corner_size = 15; // q, odd
  double default_height = 6.11;
  bool default_height_from_training = false;
  int class_count = kDefaultClassCount;
  std::uint64_t seed = 7;
  int workers = 1;
  int n_buildings = 25;
  NoiseParams noise;
  SceneParams scene;

  void validate() const {
    if (tile_size <= 2 * overlap) throw InvalidTiling("tile size must exceed twice the overlap");
    if (corner_size % 2 == 0) throw Error("corner size must be odd");
    if (class_count < 1) throw Error("class count must be positive");
  }
};

inline nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json kinds = nlohmann::json::array();
  for (RoofKind k : c.scene.kinds) kinds.push_back(roof_kind_name(k));
  return {{"tile_size", c.tile_size},
          {"overlap", c.overlap},
          {"corner_size", c.corner_size},
          {"default_height", c.default_height},
          {"default_height_from_training", c.default_height_from_training},
          {"class_count", c.class_count},
          {"seed", c.seed},
          {"workers", c.workers},
          {"n_buildings", c.n_buildings},
          {"noise",
           {{"p_drop", c.noise.p_drop},
            {"jitter_sigma", c.noise.jitter_sigma},
            {"p_class_err", c.noise.p_class_err},
            {"boundary_noise", c.noise.boundary_noise}}},
          {"scene",
           {{"frame_width", c.scene.frame_width},
            {"frame_height", c.scene.frame_height},
            {"azimuth_deg", c.scene.view.azimuth_deg},
            {"elevation_deg", c.scene.view.elevation_deg},
            {"gsd", c.scene.view.gsd},
            {"sun_zenith_deg", c.scene.sun.zenith_deg},
            {"sun_azimuth_deg", c.scene.sun.azimuth_deg},
            {"kinds", kinds},
            {"min_side_m", c.scene.min_side_m},
            {"max_side_m", c.scene.max_side_m},
            {"eave_min", c.scene.eave_min},
            {"eave_max", c.scene.eave_max},
            {"rise_min", c.scene.rise_min},
            {"rise_max", c.scene.rise_max},
            {"slope_max", c.scene.slope_max},
            {"integer_heights", c.scene.integer_heights},
            {"diagonal_sheds", c.scene.diagonal_sheds},
            {"unit_pitch", c.scene.unit_pitch},
            {"section_gap_m", c.scene.section_gap_m},
            {"gable_gap_m", c.scene.gable_gap_m},
            {"hip_gap_slant_x", c.scene.hip_gap_slant_x},
            {"hip_gap_slant_y", c.scene.hip_gap_slant_y},
            {"hip_gap_ridge", c.scene.hip_gap_ridge},
            {"dtm_base", c.scene.dtm_base},
            {"dtm_cell", c.scene.dtm_cell},
            {"background_gray", c.scene.background_gray},
            {"render_shadows", c.scene.render_shadows}}}};
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).template get<std::decay_t<decltype(field)>>();
  };
  get("tile_size", c.tile_size);
  get("overlap", c.overlap);
  get("corner_size", c.corner_size);
  get("default_height", c.default_height);
  get("default_height_from_training", c.default_height_from_training);
  get("class_count", c.class_count);
  get("seed", c.seed);
  get("workers", c.workers);
  get("n_buildings", c.n_buildings);
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    auto getn = [&](const char* key, double& field) {
      if (n.contains(key)) field = n.at(key).get<double>();
    };
    getn("p_drop", c.noise.p_drop);
    getn("jitter_sigma", c.noise.jitter_sigma);
    getn("p_class_err", c.noise.p_class_err);
    getn("boundary_noise", c.noise.boundary_noise);
  }
  if (j.contains("scene")) {
    const auto& s = j.at("scene");
    auto gets = [&](const char* key, auto& field) {
      if (s.contains(key)) field = s.at(key).template get<std::decay_t<decltype(field)>>();
    };
    gets("frame_width", c.scene.frame_width);
    gets("frame_height", c.scene.frame_height);
    gets("azimuth_deg", c.scene.view.azimuth_deg);
    gets("elevation_deg", c.scene.view.elevation_deg);
    gets("gsd", c.scene.view.gsd);
    gets("sun_zenith_deg", c.scene.sun.zenith_deg);
    gets("sun_azimuth_deg", c.scene.sun.azimuth_deg);
    if (s.contains("kinds")) {
      c.scene.kinds.clear();
      for (const auto& k : s.at("kinds"))
        c.scene.kinds.push_back(roof_kind_from_name(k.get<std::string>()));
    }
    gets("min_side_m", c.scene.min_side_m);
    gets("max_side_m", c.scene.max_side_m);
    gets("eave_min", c.scene.eave_min);
    gets("eave_max", c.scene.eave_max);
    gets("rise_min", c.scene.rise_min);
    gets("rise_max", c.scene.rise_max);
    gets("slope_max", c.scene.slope_max);
    gets("integer_heights", c.scene.integer_heights);
    gets("diagonal_sheds", c.scene.diagonal_sheds);
    gets("unit_pitch", c.scene.unit_pitch);
    gets("section_gap_m", c.scene.section_gap_m);
    gets("gable_gap_m", c.scene.gable_gap_m);
    gets("hip_gap_slant_x", c.scene.hip_gap_slant_x);
    gets("hip_gap_slant_y", c.scene.hip_gap_slant_y);
    gets("hip_gap_ridge", c.scene.hip_gap_ridge);
    gets("dtm_base", c.scene.dtm_base);
    gets("dtm_cell", c.scene.dtm_cell);
    gets("background_gray", c.scene.background_gray);
    gets("render_shadows", c.scene.render_shadows);
  }
  c.scene.corner_size = c.corner_size;
  c.scene.class_count = c.class_count;
  return c;
}

namespace detail {

template <typename F>
void parallel_for(int n, int workers, F&& body) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const int count = std::min(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(count);
  for (int t = 0; t < count; ++t) {
    pool.emplace_back([&] {
      int i;
      while ((i = next.fetch_add(1)) < n) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Oracle -> pipeline input encoding (the stage the networks would feed)
// ---------------------------------------------------------------------------

struct EncodedInputs {
  TileGrid blend;   // imagery tiles with blue-coded segmentation
  TileGrid corner;  // red corner-square tiles
  std::vector<DatasetSplit> tile_splits;  // parallel to blend.tiles
};

/// Splits the imagery into tiles, deals tiles into the 60/20/20 sets, blends
/// the oracle masks per tile with the tile's split code, and rasterizes the
/// corner squares. Overlap pixels are encoded by every covering tile, so
/// seam sections pick up mixed codes exactly as the real pipeline does.
inline EncodedInputs encode_oracle(const RenderedOracle& oracle, const Raster& imagery,
                                   const PipelineConfig& cfg) {
  const Raster screened = screen_blend_collisions(imagery);
  EncodedInputs enc;
  enc.blend = split_tiles(screened, cfg.tile_size, cfg.overlap);

  std::vector<int> ids(enc.blend.tiles.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  const DatasetPartition part = split_dataset(ids, cfg.seed);
  enc.tile_splits.assign(ids.size(), DatasetSplit::Training);
  for (int i : part.val) enc.tile_splits[i] = DatasetSplit::Validation;
  for (int i : part.test) enc.tile_splits[i] = DatasetSplit::Testing;

  detail::parallel_for(
      static_cast<int>(enc.blend.tiles.size()), cfg.workers, [&](int ti) {
        auto& tile = enc.blend.tiles[ti];
        std::vector<PixelCoord> local;
        for (int r = 0; r < cfg.tile_size; ++r) {
          for (int c = 0; c < cfg.tile_size; ++c) {
            const int fr = tile.row0 + r;
            const int fc = tile.col0 + c;
            if (oracle.section_of[static_cast<std::size_t>(fr) * oracle.width + fc] >= 0)
              local.push_back({r, c});
          }
        }
        tile.image = encode_split_blend(tile.image, local, enc.tile_splits[ti]);
      });

  Raster corner_full(oracle.width, oracle.height, {0, 0, 0});
  corner_full.georef() = oracle.georef;
  for (const auto& sq : oracle.squares)
    corner_full = encode_corner_square(corner_full, sq, cfg.class_count);
  enc.corner = split_tiles(corner_full, cfg.tile_size, cfg.overlap);
  return enc;
}

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

struct Reconstruction {
  Raster unified;
  std::vector<RoofSection> sections;
  std::vector<SectionFit> fits;      // parallel to sections
  std::vector<double> height_map;    // NaN outside sections
  std::vector<CornerSquare> unmatched;
  std::size_t squares_decoded = 0;
  std::size_t squares_malformed = 0;
  double default_height_used = 0.0;
};

/// The five-step inference tail: unify split codes city-wide, extract
/// pixel-separated sections, decode corner squares, file them to sections,
/// and fit one plane per section with the N = 0/1/2 fallbacks.
inline Reconstruction reconstruct_frame(const Raster& blend_full, const Raster& corner_full,
                                        const PipelineConfig& cfg) {
  cfg.validate();
  if (blend_full.width() != corner_full.width() || blend_full.height() != corner_full.height())
    throw Error("blend and corner frames disagree in size");

  Reconstruction rec;
  rec.unified = unify_sections(blend_full);
  rec.sections = extract_sections(rec.unified);

  const auto decoded = decode_corner_squares(corner_full, cfg.corner_size, cfg.class_count);
  rec.squares_decoded = decoded.size();
  std::vector<CornerSquare> squares;
  squares.reserve(decoded.size());
  for (const auto& d : decoded) {
    if (d.malformed) ++rec.squares_malformed;
    squares.push_back(d.square);
  }

  const int w = blend_full.width();
  const int h = blend_full.height();
  auto assignment = assign_squares(squares, rec.sections, w, h);
  rec.unmatched = std::move(assignment.unmatched);

  std::vector<std::vector<CornerObservation>> per_section(rec.sections.size());
  for (const auto& a : assignment.assigned)
    per_section[a.section_id].push_back({a.rep_pixel, static_cast<double>(a.square.z)});

  rec.default_height_used = cfg.default_height;
  if (cfg.default_height_from_training) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& a : assignment.assigned) {
      if (rec.sections[a.section_id].split == DatasetSplit::Training) {
        sum += a.square.z;
        ++count;
      }
    }
    if (count) rec.default_height_used = sum / static_cast<double>(count);
  }

  ReconstructOptions opt;
  opt.default_height = rec.default_height_used;
  opt.georef = blend_full.georef();
  rec.fits.resize(rec.sections.size());
  detail::parallel_for(static_cast<int>(rec.sections.size()), cfg.workers,
                       [&](int i) { rec.fits[i] = reconstruct_section(per_section[i], opt); });

  const Georef g = blend_full.georef().value_or(Georef{0.0, 0.0, 1.0});
  rec.height_map.assign(static_cast<std::size_t>(w) * h,
                        std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < rec.sections.size(); ++i) {
    for (PixelCoord p : rec.sections[i].pixels) {
      const WorldPoint q = world_from_pixel(g, p.row, p.col);
      rec.height_map[static_cast<std::size_t>(p.row) * w + p.col] =
          height_at(rec.fits[i].plane, q.x, q.y);
    }
  }
  return rec;
}

inline Reconstruction reconstruct_tiles(const TileGrid& blend, const TileGrid& corner_tiles,
                                        int frame_width, int frame_height,
                                        const PipelineConfig& cfg) {
  return reconstruct_frame(reassemble(blend, frame_width, frame_height),
                           reassemble(corner_tiles, frame_width, frame_height), cfg);
}

inline nlohmann::json reconstruction_report(const Reconstruction& rec,
                                            const PipelineConfig& cfg) {
  std::map<std::string, int> provenance;
  int filed = 0;
  double max_delta = 0.0;
  for (const auto& fit : rec.fits) {
    provenance[provenance_name(fit.plane.provenance)] += 1;
    if (fit.filing_applied) {
      ++filed;
      for (int i = 0; i < 3; ++i)
        max_delta = std::max(max_delta, std::abs(fit.filed_z[i] - fit.original_z[i]));
    }
  }
  return {{"sections", rec.sections.size()},
          {"squares_decoded", rec.squares_decoded},
          {"squares_malformed", rec.squares_malformed},
          {"squares_unmatched", rec.unmatched.size()},
          {"provenance_counts", provenance},
          {"filing", {{"sections_altered", filed}, {"max_height_delta", max_delta}}},
          {"default_height_used", rec.default_height_used},
          {"config",
           {{"tile_size", cfg.tile_size},
            {"overlap", cfg.overlap},
            {"corner_size", cfg.corner_size},
            {"class_count", cfg.class_count}}}};
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Compares a reconstruction against the truth frame: IoU over segmentation
/// pixels and height statistics over the correctly segmented ones, overall
/// and per split (split keyed by the truth pixel's code).
inline EvalReport evaluate_frames(const Raster& pred_blend, std::span<const double> pred_heights,
                                  const Raster& truth_blend,
                                  std::span<const double> truth_heights) {
  if (pred_blend.width() != truth_blend.width() || pred_blend.height() != truth_blend.height())
    throw Error("prediction and truth frames disagree in size");
  const int w = pred_blend.width();

  const auto pred_pixels = decode_split_blend(pred_blend);
  const auto truth_pixels = decode_split_blend(truth_blend);

  std::vector<PixelCoord> pred_set(pred_pixels.size());
  for (std::size_t i = 0; i < pred_pixels.size(); ++i) pred_set[i] = pred_pixels[i].pos;
  std::vector<PixelCoord> truth_set(truth_pixels.size());
  for (std::size_t i = 0; i < truth_pixels.size(); ++i) truth_set[i] = truth_pixels[i].pos;

  EvalReport report;
  report.iou = iou(pred_set, truth_set);

  std::vector<std::pair<double, double>> pairs;
  std::array<std::vector<std::pair<double, double>>, 3> split_pairs;
  std::array<std::vector<PixelCoord>, 3> pred_by_split, truth_by_split;
  for (const auto& sp : pred_pixels) pred_by_split[split_id(sp.split)].push_back(sp.pos);

  std::size_t i = 0, j = 0;
  while (i < pred_pixels.size() && j < truth_pixels.size()) {
    if (pred_pixels[i].pos == truth_pixels[j].pos) {
      const std::size_t idx =
          static_cast<std::size_t>(pred_pixels[i].pos.row) * w + pred_pixels[i].pos.col;
      const double zhat = pred_heights[idx];
      const double z = truth_heights[idx];
      if (std::isfinite(zhat) && std::isfinite(z)) {
        pairs.push_back({zhat, z});
        split_pairs[split_id(truth_pixels[j].split)].push_back({zhat, z});
      }
      ++i;
      ++j;
    } else if (pred_pixels[i].pos < truth_pixels[j].pos) {
      ++i;
    } else {
      ++j;
    }
  }
  for (const auto& sp : truth_pixels) truth_by_split[split_id(sp.split)].push_back(sp.pos);

  report.m = pairs.size();
  if (!pairs.empty()) report.overall = height_error_stats(pairs);

  for (DatasetSplit split : kAllSplits) {
    const int k = split_id(split);
    if (truth_by_split[k].empty() && pred_by_split[k].empty()) continue;
    SplitEval se;
    se.iou = iou(pred_by_split[k], truth_by_split[k]);
    se.m = split_pairs[k].size();
    if (!split_pairs[k].empty()) se.heights = height_error_stats(split_pairs[k]);
    report.per_split[k] = se;
  }
  return report;
}

/// Predicted-vs-truth report for the DSM baseline over the same sections.
inline EvalReport evaluate_baseline(const Reconstruction& rec, const DsmGrid& dsm,
                                    const DtmGrid& dtm, const Raster& truth_blend,
                                    std::span<const double> truth_heights) {
  const Georef g = rec.unified.georef().value_or(Georef{0.0, 0.0, 1.0});
  const int w = rec.unified.width();
  std::vector<double> heights(static_cast<std::size_t>(w) * rec.unified.height(),
                              std::numeric_limits<double>::quiet_NaN());
  for (const auto& sec : rec.sections) {
    RoofPlane plane;
    try {
      plane = baseline_dsm_reconstruct(sec, dsm, dtm, g);
    } catch (const DegenerateError&) {
      continue;  // skipped sections simply keep NaN heights
    }
    for (PixelCoord p : sec.pixels) {
      const WorldPoint q = world_from_pixel(g, p.row, p.col);
      heights[static_cast<std::size_t>(p.row) * w + p.col] = height_at(plane, q.x, q.y);
    }
  }
  return evaluate_frames(rec.unified, heights, truth_blend, truth_heights);
}

// ---------------------------------------------------------------------------
// Export helpers shared by CLI and tests
// ---------------------------------------------------------------------------

/// One record per boundary vertex (default) or per section pixel (dense).
/// With a DTM, z is altitude above sea level; otherwise height-to-ground.
inline std::vector<PointRecord> collect_point_records(const Reconstruction& rec,
                                                      const std::optional<DtmGrid>& dtm,
                                                      bool dense) {
  const Georef g = rec.unified.georef().value_or(Georef{0.0, 0.0, 1.0});
  std::vector<PointRecord> records;
  for (std::size_t i = 0; i < rec.sections.size(); ++i) {
    const auto& sec = rec.sections[i];
    const auto& plane = rec.fits[i].plane;
    const int id = split_id(sec.split);
    auto emit = [&](double x, double y) {
      double z = height_at(plane, x, y);
      if (dtm) z = apply_dtm(x, y, z, *dtm);
      records.push_back({x, y, z, id});
    };
    if (dense) {
      for (PixelCoord p : sec.pixels) {
        const WorldPoint q = world_from_pixel(g, p.row, p.col);
        emit(q.x, q.y);
      }
    } else {
      for (const auto& v : trace_boundary(sec.pixels)) {
        const WorldPoint q = world_from_pixel(g, v.row, v.col);
        emit(q.x, q.y);
      }
    }
  }
  return records;
}

inline ElevationGrid heights_as_grid(std::span<const double> heights, int width, int height,
                                     const Georef& g) {
  ElevationGrid grid;
  grid.width = width;
  grid.height = height;
  grid.origin_x = g.origin_x;
  grid.origin_y = g.origin_y;
  grid.cell_size = g.gsd;
  grid.values.assign(heights.begin(), heights.end());
  return grid;
}

// ---------------------------------------------------------------------------
// File-level stage runners (what the CLI subcommands call)
// ---------------------------------------------------------------------------

namespace fs_detail {

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory: " + dir);
}

inline std::string tile_name(int row0, int col0) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "r%05d_c%05d.png", row0, col0);
  return buf;
}

}  // namespace fs_detail

struct SynthArtifacts {
  SceneTruth scene;
  RenderedOracle oracle;    // pristine reference
  RenderedOracle degraded;  // pipeline-facing (equal when noise is zero)
  EncodedInputs inputs;
  Raster imagery;
  Raster truth_blend;  // unified noiseless blend, the evaluation reference
  DsmGrid dsm;
};

/// End-to-end synthetic data product in memory; the file writer below puts it
/// on disk in the documented layout.
inline SynthArtifacts synthesize(const PipelineConfig& cfg) {
  cfg.validate();
  SynthArtifacts art;
  art.scene = generate_scene(cfg.seed, cfg.n_buildings, cfg.scene);
  art.oracle = render_oracle(art.scene, cfg.corner_size, cfg.class_count);
  art.degraded = inject_noise(art.oracle, cfg.noise, cfg.seed + 1);
  art.imagery = render_background(art.scene, art.oracle, cfg.scene);
  art.inputs = encode_oracle(art.degraded, art.imagery, cfg);

  EncodedInputs clean = is_zero(cfg.noise) ? art.inputs : encode_oracle(art.oracle, art.imagery, cfg);
  art.truth_blend = unify_sections(
      reassemble(clean.blend, art.scene.frame_width, art.scene.frame_height));
  art.dsm = make_lod1_dsm(art.scene);
  return art;
}

inline void run_synth(const PipelineConfig& cfg, const std::string& out_dir) {
  const SynthArtifacts art = synthesize(cfg);
  fs_detail::ensure_dir(out_dir);
  fs_detail::ensure_dir(out_dir + "/truth");
  fs_detail::ensure_dir(out_dir + "/tiles/blend");
  fs_detail::ensure_dir(out_dir + "/tiles/corner");

  {
    nlohmann::json j{{"config", to_json(cfg)}, {"scene", to_json(art.scene)}};
    std::ofstream out(out_dir + "/scene.json");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("cannot write scene.json");
  }
  write_grid(art.scene.dtm, out_dir + "/dtm.grid");
  write_grid(art.dsm, out_dir + "/dsm.grid");
  save_png(art.imagery, out_dir + "/imagery.png");
  save_png(art.truth_blend, out_dir + "/truth/blend.png");
  write_grid(heights_as_grid(art.oracle.truth_heights, art.scene.frame_width,
                             art.scene.frame_height, art.scene.georef),
             out_dir + "/truth/heights.grid");

  nlohmann::json tiles = nlohmann::json::array();
  for (std::size_t i = 0; i < art.inputs.blend.tiles.size(); ++i) {
    const auto& t = art.inputs.blend.tiles[i];
    const std::string name = fs_detail::tile_name(t.row0, t.col0);
    save_png(t.image, out_dir + "/tiles/blend/" + name);
    save_png(art.inputs.corner.tiles[i].image, out_dir + "/tiles/corner/" + name);
    tiles.push_back({{"row0", t.row0},
                     {"col0", t.col0},
                     {"file", name},
                     {"split", split_id(art.inputs.tile_splits[i])}});
  }
  nlohmann::json manifest{{"tile_size", cfg.tile_size},
                          {"overlap", cfg.overlap},
                          {"corner_size", cfg.corner_size},
                          {"class_count", cfg.class_count},
                          {"frame_width", art.scene.frame_width},
                          {"frame_height", art.scene.frame_height},
                          {"georef",
                           {{"origin_x", art.scene.georef.origin_x},
                            {"origin_y", art.scene.georef.origin_y},
                            {"gsd", art.scene.georef.gsd}}},
                          {"tiles", tiles}};
  std::ofstream mout(out_dir + "/tiles/manifest.json");
  mout << manifest.dump(2) << "\n";
  if (!mout) throw IoError("cannot write manifest.json");
}

struct LoadedTiles {
  TileGrid blend;
  TileGrid corner;
  int frame_width = 0;
  int frame_height = 0;
  PipelineConfig manifest_config;  // s/p/q/class_count from the manifest
};

inline LoadedTiles load_tiles(const std::string& tiles_dir) {
  std::ifstream in(tiles_dir + "/manifest.json");
  if (!in) throw IoError("cannot open manifest: " + tiles_dir + "/manifest.json");
  nlohmann::json manifest;
  in >> manifest;

  LoadedTiles loaded;
  loaded.manifest_config.tile_size = manifest.at("tile_size").get<int>();
  loaded.manifest_config.overlap = manifest.at("overlap").get<int>();
  loaded.manifest_config.corner_size = manifest.at("corner_size").get<int>();
  loaded.manifest_config.class_count = manifest.at("class_count").get<int>();
  loaded.frame_width = manifest.at("frame_width").get<int>();
  loaded.frame_height = manifest.at("frame_height").get<int>();
  Georef g{manifest.at("georef").at("origin_x").get<double>(),
           manifest.at("georef").at("origin_y").get<double>(),
           manifest.at("georef").at("gsd").get<double>()};
  loaded.blend.tile_size = loaded.corner.tile_size = loaded.manifest_config.tile_size;
  loaded.blend.overlap = loaded.corner.overlap = loaded.manifest_config.overlap;
  loaded.blend.source_georef = loaded.corner.source_georef = g;
  for (const auto& jt : manifest.at("tiles")) {
    const int row0 = jt.at("row0").get<int>();
    const int col0 = jt.at("col0").get<int>();
    const std::string file = jt.at("file").get<std::string>();
    loaded.blend.tiles.push_back({row0, col0, load_png(tiles_dir + "/blend/" + file)});
    loaded.corner.tiles.push_back({row0, col0, load_png(tiles_dir + "/corner/" + file)});
  }
  return loaded;
}

inline Reconstruction run_reconstruct(PipelineConfig cfg, const std::string& tiles_dir,
                                      const std::optional<std::string>& dtm_path,
                                      const std::string& out_dir, bool dense_xyz = false,
                                      bool extrude_obj = true) {
  const LoadedTiles loaded = load_tiles(tiles_dir);
  cfg.tile_size = loaded.manifest_config.tile_size;
  cfg.overlap = loaded.manifest_config.overlap;
  cfg.corner_size = loaded.manifest_config.corner_size;
  cfg.class_count = loaded.manifest_config.class_count;

  Reconstruction rec =
      reconstruct_tiles(loaded.blend, loaded.corner, loaded.frame_width, loaded.frame_height, cfg);
  fs_detail::ensure_dir(out_dir);

  save_png(rec.unified, out_dir + "/unified.png");
  const Georef g = rec.unified.georef().value_or(Georef{0.0, 0.0, 1.0});
  write_grid(heights_as_grid(rec.height_map, rec.unified.width(), rec.unified.height(), g),
             out_dir + "/pred_heights.grid");

  std::optional<DtmGrid> dtm;
  if (dtm_path) dtm = read_grid(*dtm_path);
  write_xyz(collect_point_records(rec, dtm, dense_xyz), out_dir + "/points.xyz");

  std::vector<RoofPlane> planes(rec.fits.size());
  for (std::size_t i = 0; i < rec.fits.size(); ++i) planes[i] = rec.fits[i].plane;
  ObjOptions obj_opt;
  obj_opt.extrude_to_ground = extrude_obj;
  obj_opt.georef = rec.unified.georef();
  write_obj(rec.sections, planes, out_dir + "/model.obj", obj_opt);

  nlohmann::json sections = nlohmann::json::array();
  for (std::size_t i = 0; i < rec.sections.size(); ++i) {
    const auto& sec = rec.sections[i];
    const auto& fit = rec.fits[i];
    sections.push_back({{"id", sec.id},
                        {"split", split_id(sec.split)},
                        {"pixels", sec.pixels.size()},
                        {"plane", {fit.plane.a, fit.plane.b, fit.plane.c}},
                        {"provenance", provenance_name(fit.plane.provenance)},
                        {"corners_used", fit.plane.corner_count},
                        {"filing_applied", fit.filing_applied}});
  }
  std::ofstream sout(out_dir + "/sections.json");
  sout << sections.dump(2) << "\n";

  std::ofstream rout(out_dir + "/report.json");
  rout << reconstruction_report(rec, cfg).dump(2) << "\n";
  if (!rout) throw IoError("cannot write report.json");
  return rec;
}

inline EvalReport run_evaluate(const std::string& recon_dir, const std::string& truth_dir,
                               const std::string& out_dir) {
  const Raster pred = load_png(recon_dir + "/unified.png");
  const ElevationGrid pred_h = read_grid(recon_dir + "/pred_heights.grid");
  const Raster truth = load_png(truth_dir + "/blend.png");
  const ElevationGrid truth_h = read_grid(truth_dir + "/heights.grid");
  const EvalReport report = evaluate_frames(pred, pred_h.values, truth, truth_h.values);

  fs_detail::ensure_dir(out_dir);
  std::ofstream jout(out_dir + "/eval.json");
  jout << to_json(report).dump(2) << "\n";
  std::ofstream tout(out_dir + "/eval.txt");
  tout << render_eval_table(report);
  if (!tout) throw IoError("cannot write eval outputs");
  return report;
}

inline void run_coco_export(const std::string& tiles_dir, CocoMode mode,
                            const std::string& out_path) {
  const LoadedTiles loaded = load_tiles(tiles_dir);
  std::vector<CocoTile> tiles;
  for (std::size_t i = 0; i < loaded.blend.tiles.size(); ++i) {
    const auto& bt = loaded.blend.tiles[i];
    CocoTile tile;
    tile.image_name = fs_detail::tile_name(bt.row0, bt.col0);
    tile.width = bt.image.width();
    tile.height = bt.image.height();
    if (mode == CocoMode::Sections) {
      for (const auto& sec : extract_sections(bt.image)) tile.masks.push_back(sec.pixels);
    } else {
      for (const auto& d :
           decode_corner_squares(loaded.corner.tiles[i].image, loaded.manifest_config.corner_size,
                                 loaded.manifest_config.class_count))
        tile.squares.push_back(d.square);
    }
    tiles.push_back(std::move(tile));
  }
  write_coco(tiles, mode, out_path, loaded.manifest_config.class_count);
}

struct BaselineOutcome {
  EvalReport baseline;
  EvalReport pipeline;
};

inline BaselineOutcome run_baseline(PipelineConfig cfg, const std::string& tiles_dir,
                                    const std::string& dsm_path, const std::string& dtm_path,
                                    const std::string& truth_dir, const std::string& out_dir) {
  const LoadedTiles loaded = load_tiles(tiles_dir);
  cfg.tile_size = loaded.manifest_config.tile_size;
  cfg.overlap = loaded.manifest_config.overlap;
  cfg.corner_size = loaded.manifest_config.corner_size;
  cfg.class_count = loaded.manifest_config.class_count;
  Reconstruction rec =
      reconstruct_tiles(loaded.blend, loaded.corner, loaded.frame_width, loaded.frame_height, cfg);

  const DsmGrid dsm = read_grid(dsm_path);
  const DtmGrid dtm = read_grid(dtm_path);
  const Raster truth = load_png(truth_dir + "/blend.png");
  const ElevationGrid truth_h = read_grid(truth_dir + "/heights.grid");

  BaselineOutcome outcome;
  outcome.baseline = evaluate_baseline(rec, dsm, dtm, truth, truth_h.values);
  outcome.pipeline = evaluate_frames(rec.unified, rec.height_map, truth, truth_h.values);

  fs_detail::ensure_dir(out_dir);
  nlohmann::json j{{"baseline", to_json(outcome.baseline)},
                   {"pipeline", to_json(outcome.pipeline)}};
  std::ofstream out(out_dir + "/baseline.json");
  out << j.dump(2) << "\n";
  std::ofstream tout(out_dir + "/baseline.txt");
  tout << "DSM baseline\n"
       << render_eval_table(outcome.baseline) << "\nKeypoint pipeline\n"
       << render_eval_table(outcome.pipeline);
  if (!tout) throw IoError("cannot write baseline outputs");
  return outcome;
}

}  // namespace roofkit
