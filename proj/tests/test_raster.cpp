#include <catch2/catch_amalgamated.hpp>

#include "roofkit/raster.hpp"
#include "roofkit/rng.hpp"

using namespace roofkit;

namespace {

Raster random_raster(Rng& rng, int w, int h) {
  Raster r(w, h);
  for (auto& byte : r.data()) byte = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return r;
}

}  // namespace

TEST_CASE("tile origins follow stride s - p with a clamped tail") {
  CHECK(tile_axis_origins(450, 230, 10) == std::vector<int>{0, 220});
  CHECK(tile_axis_origins(230, 230, 10) == std::vector<int>{0});
  // 220 + 230 = 450 < 460 forces the clamped origin 230.
  CHECK(tile_axis_origins(460, 230, 10) == std::vector<int>{0, 220, 230});
}

TEST_CASE("split_tiles examples") {
  Rng rng(1);
  SECTION("450x450, s=230, p=10 gives 4 tiles") {
    const auto grid = split_tiles(random_raster(rng, 450, 450), 230, 10);
    REQUIRE(grid.tiles.size() == 4);
    CHECK(grid.tiles[0].row0 == 0);
    CHECK(grid.tiles[0].col0 == 0);
    CHECK(grid.tiles[3].row0 == 220);
    CHECK(grid.tiles[3].col0 == 220);
  }
  SECTION("exactly one tile when the source equals the tile size") {
    const auto grid = split_tiles(random_raster(rng, 230, 230), 230, 10);
    REQUIRE(grid.tiles.size() == 1);
    CHECK(grid.tiles[0].row0 == 0);
    CHECK(grid.tiles[0].col0 == 0);
  }
  SECTION("460x450 gives 6 tiles") {
    const auto grid = split_tiles(random_raster(rng, 460, 450), 230, 10);
    CHECK(grid.tiles.size() == 6);
  }
}

TEST_CASE("split_tiles rejects bad parameters") {
  Rng rng(2);
  const Raster small = random_raster(rng, 100, 300);
  CHECK_THROWS_AS(split_tiles(small, 230, 10), InvalidTiling);
  const Raster ok = random_raster(rng, 300, 300);
  CHECK_THROWS_AS(split_tiles(ok, 20, 10), InvalidTiling);
  CHECK_THROWS_AS(split_tiles(ok, 20, 15), InvalidTiling);
}

TEST_CASE("reassemble is the exact inverse of split_tiles") {
  Rng rng(3);
  for (int round = 0; round < 50; ++round) {
    const int s = static_cast<int>(rng.uniform_int(8, 64));
    const int p = static_cast<int>(rng.uniform_int(0, (s - 1) / 2));
    const int w = static_cast<int>(rng.uniform_int(s, 3 * s));
    const int h = static_cast<int>(rng.uniform_int(s, 3 * s));
    const Raster src = random_raster(rng, w, h);
    const auto grid = split_tiles(src, s, p);
    const Raster back = reassemble(grid, w, h);
    REQUIRE(back == src);
  }
}

TEST_CASE("every pixel is covered by at least one tile") {
  Rng rng(4);
  for (int round = 0; round < 30; ++round) {
    const int s = static_cast<int>(rng.uniform_int(8, 40));
    const int p = static_cast<int>(rng.uniform_int(0, (s - 1) / 2));
    const int w = static_cast<int>(rng.uniform_int(s, 4 * s));
    const int h = static_cast<int>(rng.uniform_int(s, 4 * s));
    const auto grid = split_tiles(random_raster(rng, w, h), s, p);
    std::vector<int> cover(static_cast<std::size_t>(w) * h, 0);
    for (const auto& t : grid.tiles)
      for (int r = 0; r < s; ++r)
        for (int c = 0; c < s; ++c) ++cover[static_cast<std::size_t>(t.row0 + r) * w + t.col0 + c];
    for (int v : cover) REQUIRE(v >= 1);
  }
}

TEST_CASE("tile origin lists are deterministic") {
  Rng rng(5);
  const Raster src = random_raster(rng, 500, 470);
  const auto a = split_tiles(src, 64, 7);
  const auto b = split_tiles(src, 64, 7);
  REQUIRE(a.tiles.size() == b.tiles.size());
  for (std::size_t i = 0; i < a.tiles.size(); ++i) {
    CHECK(a.tiles[i].row0 == b.tiles[i].row0);
    CHECK(a.tiles[i].col0 == b.tiles[i].col0);
  }
}

TEST_CASE("overlap conflicts resolve to the later tile in row-major order") {
  TileGrid grid;
  grid.tile_size = 4;
  grid.overlap = 2;
  Raster first(4, 4, {10, 10, 10});
  Raster second(4, 4, {200, 0, 50});
  grid.tiles.push_back({0, 0, first});
  grid.tiles.push_back({0, 2, second});
  const Raster out = reassemble(grid, 6, 4);
  // Column 2..3 are covered by both tiles; the later one wins.
  CHECK(out.at(1, 2) == Rgb{200, 0, 50});
  CHECK(out.at(1, 1) == Rgb{10, 10, 10});
  CHECK(out.at(1, 5) == Rgb{200, 0, 50});
}

TEST_CASE("single-tile grid reassembles to that tile") {
  Rng rng(6);
  const Raster tile = random_raster(rng, 16, 16);
  TileGrid grid;
  grid.tile_size = 16;
  grid.overlap = 0;
  grid.tiles.push_back({0, 0, tile});
  CHECK(reassemble(grid, 16, 16) == tile);
}

TEST_CASE("coverage gaps are an error") {
  TileGrid grid;
  grid.tile_size = 4;
  grid.overlap = 0;
  grid.tiles.push_back({0, 0, Raster(4, 4)});
  CHECK_THROWS_AS(reassemble(grid, 8, 4), CoverageError);
}

TEST_CASE("tiles inherit a shifted georeference") {
  Raster src(300, 240);
  src.georef() = Georef{100.0, 50.0, 0.5};
  const auto grid = split_tiles(src, 230, 10);
  REQUIRE(grid.tiles.size() == 4);
  const auto& t = grid.tiles[3];
  REQUIRE(t.image.georef().has_value());
  CHECK(t.image.georef()->origin_x == Catch::Approx(100.0 + t.col0 * 0.5));
  CHECK(t.image.georef()->origin_y == Catch::Approx(50.0 + t.row0 * 0.5));
  const Raster back = reassemble(grid, 300, 240);
  REQUIRE(back.georef().has_value());
  CHECK(back.georef()->origin_x == 100.0);
}
