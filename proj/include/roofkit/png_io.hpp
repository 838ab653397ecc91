#pragma once

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roofkit/errors.hpp"
#include "roofkit/raster.hpp"

namespace roofkit {

inline std::string georef_sidecar_path(const std::string& png_path) {
  return png_path + ".georef.json";
}

/// Writes an 8-bit RGB PNG. A georeference, when present, goes to a
/// "<path>.georef.json" sidecar: {origin_x, origin_y, gsd}.
inline void save_png(const Raster& raster, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng write failed: " + path);
  }

  png_init_io(png, fp);
  png_set_IHDR(png, info, raster.width(), raster.height(), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(raster.height());
  auto* base = const_cast<std::uint8_t*>(raster.data().data());
  for (int r = 0; r < raster.height(); ++r)
    rows[r] = base + static_cast<std::size_t>(r) * raster.width() * 3;
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);

  if (raster.georef()) {
    nlohmann::json j{{"origin_x", raster.georef()->origin_x},
                     {"origin_y", raster.georef()->origin_y},
                     {"gsd", raster.georef()->gsd}};
    std::ofstream out(georef_sidecar_path(path));
    if (!out) throw IoError("cannot write georef sidecar for " + path);
    out << j.dump(2) << "\n";
  }
}

inline Raster load_png(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw IoError("cannot open: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    throw IoError("libpng read failed: " + path);
  }

  png_init_io(png, fp);
  png_read_info(png, info);
  // Normalize anything we might be handed to 8-bit RGB.
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  Raster raster(width, height);
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r)
    rows[r] = raster.data().data() + static_cast<std::size_t>(r) * width * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);

  const auto sidecar = georef_sidecar_path(path);
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    nlohmann::json j;
    in >> j;
    raster.georef() = Georef{j.at("origin_x").get<double>(), j.at("origin_y").get<double>(),
                             j.at("gsd").get<double>()};
  }
  return raster;
}

}  // namespace roofkit
