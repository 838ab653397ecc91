#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "roofkit/codec.hpp"
#include "roofkit/rng.hpp"

using namespace roofkit;

namespace {

Raster noise_raster(Rng& rng, int w, int h) {
  Raster r(w, h);
  for (auto& byte : r.data()) byte = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return r;
}

std::vector<PixelCoord> random_mask(Rng& rng, int w, int h, int count) {
  std::set<PixelCoord> mask;
  for (int i = 0; i < count; ++i)
    mask.insert({static_cast<int>(rng.uniform_int(0, h - 1)),
                 static_cast<int>(rng.uniform_int(0, w - 1))});
  return {mask.begin(), mask.end()};
}

}  // namespace

TEST_CASE("blend codes match the wire contract") {
  CHECK(blend_code(DatasetSplit::Training) == 200);
  CHECK(blend_code(DatasetSplit::Validation) == 210);
  CHECK(blend_code(DatasetSplit::Testing) == 220);
  CHECK(split_id(DatasetSplit::Training) == 0);
  CHECK(split_id(DatasetSplit::Validation) == 1);
  CHECK(split_id(DatasetSplit::Testing) == 2);
}

TEST_CASE("encode_split_blend writes {0,0,code} and only on the mask") {
  Raster tile(20, 20, {90, 80, 70});
  const std::vector<PixelCoord> mask = {{2, 3}, {2, 4}, {10, 10}};

  const Raster training = encode_split_blend(tile, mask, DatasetSplit::Training);
  CHECK(training.at(2, 3) == Rgb{0, 0, 200});
  CHECK(training.at(10, 10) == Rgb{0, 0, 200});
  CHECK(training.at(0, 0) == Rgb{90, 80, 70});

  const Raster testing = encode_split_blend(tile, mask, DatasetSplit::Testing);
  CHECK(testing.at(2, 4) == Rgb{0, 0, 220});

  CHECK(encode_split_blend(tile, {}, DatasetSplit::Validation) == tile);

  const std::vector<PixelCoord> oob = {{20, 3}};
  CHECK_THROWS_AS(encode_split_blend(tile, oob, DatasetSplit::Training), BoundsError);
}

TEST_CASE("decode_split_blend sees only the three exact codes") {
  Raster tile(8, 8, {0, 0, 0});
  tile.set(1, 1, {0, 0, 205});  // not a code
  tile.set(2, 2, {0, 0, 200});
  tile.set(3, 3, {0, 0, 220});
  tile.set(4, 4, {1, 0, 210});  // red spoils it
  const auto decoded = decode_split_blend(tile);
  REQUIRE(decoded.size() == 2);
  CHECK(decoded[0].pos == PixelCoord{2, 2});
  CHECK(decoded[0].split == DatasetSplit::Training);
  CHECK(decoded[1].pos == PixelCoord{3, 3});
  CHECK(decoded[1].split == DatasetSplit::Testing);
}

TEST_CASE("split blend codec round-trips on screened tiles") {
  Rng rng(11);
  for (int round = 0; round < 200; ++round) {
    const int w = static_cast<int>(rng.uniform_int(4, 40));
    const int h = static_cast<int>(rng.uniform_int(4, 40));
    const Raster tile = screen_blend_collisions(noise_raster(rng, w, h));
    const auto mask = random_mask(rng, w, h, static_cast<int>(rng.uniform_int(0, 30)));
    const auto split = kAllSplits[rng.uniform_int(0, 2)];
    const auto decoded = decode_split_blend(encode_split_blend(tile, mask, split));
    REQUIRE(decoded.size() == mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) {
      CHECK(decoded[i].pos == mask[i]);
      CHECK(decoded[i].split == split);
    }
  }
}

TEST_CASE("screening strips natural blend-code collisions") {
  Raster tile(4, 4, {0, 0, 0});
  tile.set(0, 0, {0, 0, 210});
  tile.set(1, 1, {0, 0, 220});
  tile.set(2, 2, {0, 1, 200});  // green != 0: not a collision
  const Raster screened = screen_blend_collisions(tile);
  CHECK(screened.at(0, 0) == Rgb{0, 0, 209});
  CHECK(screened.at(1, 1) == Rgb{0, 0, 219});
  CHECK(screened.at(2, 2) == Rgb{0, 1, 200});
  CHECK(decode_split_blend(screened).empty());
}

TEST_CASE("corner squares write red = 200 + z and preserve green/blue") {
  Raster tile(40, 40, {30, 40, 50});
  const Raster out = encode_corner_square(tile, {{20, 20}, 15, 5});
  for (int r = 13; r <= 27; ++r)
    for (int c = 13; c <= 27; ++c) CHECK(out.at(r, c) == Rgb{205, 40, 50});
  CHECK(out.at(12, 20) == Rgb{30, 40, 50});
  CHECK(out.at(20, 28) == Rgb{30, 40, 50});

  const Raster z19 = encode_corner_square(tile, {{20, 20}, 15, 19});
  CHECK(z19.at(20, 20).r == 219);

  CHECK_THROWS_AS(encode_corner_square(tile, {{20, 20}, 15, 0}), ClassRangeError);
  CHECK_THROWS_AS(encode_corner_square(tile, {{20, 20}, 15, 20}), ClassRangeError);
}

TEST_CASE("corner squares clip at the border, center stays nominal") {
  Raster tile(40, 40, {0, 0, 0});
  const Raster out = encode_corner_square(tile, {{2, 2}, 15, 7});
  CHECK(out.at(0, 0).r == 207);
  CHECK(out.at(9, 9).r == 207);
  CHECK(out.at(10, 10).r == 0);

  const auto decoded = decode_corner_squares(out, 15);
  REQUIRE(decoded.size() == 1);
  CHECK_FALSE(decoded[0].malformed);
  CHECK(decoded[0].square.center == PixelCoord{2, 2});
  CHECK(decoded[0].square.z == 7);
}

TEST_CASE("decode_corner_squares recovers disjoint squares exactly") {
  Raster tile(64, 64, {0, 0, 0});
  Raster out = encode_corner_square(tile, {{50, 50}, 15, 7});
  out = encode_corner_square(out, {{10, 12}, 15, 3});
  out = encode_corner_square(out, {{40, 12}, 15, 9});
  auto decoded = decode_corner_squares(out, 15);
  REQUIRE(decoded.size() == 3);
  std::sort(decoded.begin(), decoded.end(), [](const DecodedSquare& a, const DecodedSquare& b) {
    return a.square.z < b.square.z;
  });
  CHECK(decoded[0].square == CornerSquare{{10, 12}, 15, 3});
  CHECK(decoded[1].square == CornerSquare{{50, 50}, 15, 7});
  CHECK(decoded[2].square == CornerSquare{{40, 12}, 15, 9});
  for (const auto& d : decoded) CHECK_FALSE(d.malformed);
}

TEST_CASE("red values outside [201, 219] are not squares") {
  Raster tile(32, 32, {0, 0, 0});
  for (int r = 4; r <= 8; ++r)
    for (int c = 4; c <= 8; ++c) tile.set(r, c, {200, 0, 0});
  for (int r = 20; r <= 24; ++r)
    for (int c = 20; c <= 24; ++c) tile.set(r, c, {220, 0, 0});
  CHECK(decode_corner_squares(tile, 15).empty());
}

TEST_CASE("squares over blend pixels decode on both channels") {
  Raster tile(40, 40, {0, 0, 0});
  std::vector<PixelCoord> mask;
  for (int r = 15; r <= 30; ++r)
    for (int c = 15; c <= 30; ++c) mask.push_back({r, c});
  Raster blended = encode_split_blend(tile, mask, DatasetSplit::Validation);
  blended = encode_corner_square(blended, {{15, 15}, 15, 4});

  const auto squares = decode_corner_squares(blended, 15);
  REQUIRE(squares.size() == 1);
  CHECK(squares[0].square.center == PixelCoord{15, 15});
  CHECK(squares[0].square.z == 4);
  // Blue survives under the square (nothing is lost), and mask pixels
  // outside the square footprint still decode.
  CHECK(blended.at(16, 16) == Rgb{204, 0, 210});
  CHECK(decode_split_blend(blended).size() == mask.size() - 8 * 8);
}

TEST_CASE("malformed red blobs come back flagged with a best-fit center") {
  Raster tile(48, 48, {0, 0, 0});
  // Two overlapping same-z squares merge into one non-square blob.
  Raster out = encode_corner_square(tile, {{20, 20}, 15, 6});
  out = encode_corner_square(out, {{20, 28}, 15, 6});
  const auto decoded = decode_corner_squares(out, 15);
  REQUIRE(decoded.size() == 1);
  CHECK(decoded[0].malformed);
  CHECK(decoded[0].square.z == 6);
  CHECK(decoded[0].square.center == PixelCoord{20, 24});
}

TEST_CASE("corner codec round-trips on non-touching random squares") {
  Rng rng(13);
  const int q = 15;
  for (int round = 0; round < 200; ++round) {
    const int w = static_cast<int>(rng.uniform_int(48, 96));
    const int h = static_cast<int>(rng.uniform_int(48, 96));
    Raster tile(w, h, {0, 0, 0});

    // Place squares on a coarse lattice so footprints never touch.
    std::vector<CornerSquare> squares;
    const int pitch = q + 2;
    for (int gr = q / 2; gr + q / 2 < h; gr += pitch) {
      for (int gc = q / 2; gc + q / 2 < w; gc += pitch) {
        if (!rng.bernoulli(0.4)) continue;
        squares.push_back({{gr, gc}, q, static_cast<int>(rng.uniform_int(1, 19))});
      }
    }
    for (const auto& sq : squares) tile = encode_corner_square(tile, sq);

    auto decoded = decode_corner_squares(tile, q);
    REQUIRE(decoded.size() == squares.size());
    std::sort(decoded.begin(), decoded.end(), [](const DecodedSquare& a, const DecodedSquare& b) {
      return a.square.center < b.square.center;
    });
    std::sort(squares.begin(), squares.end(),
              [](const CornerSquare& a, const CornerSquare& b) { return a.center < b.center; });
    for (std::size_t i = 0; i < squares.size(); ++i) {
      CHECK_FALSE(decoded[i].malformed);
      CHECK(decoded[i].square == squares[i]);
    }
  }
}

TEST_CASE("height labels run hah..hsh and invert exactly") {
  CHECK(class_label_of_height(1) == "hah");
  CHECK(class_label_of_height(2) == "hbh");
  CHECK(class_label_of_height(3) == "hch");
  CHECK(class_label_of_height(19) == "hsh");
  CHECK(height_of_class_label("hah") == 1);
  CHECK(height_of_class_label("hbh") == 2);
  CHECK(height_of_class_label("hsh") == 19);
  for (int z = 1; z <= 19; ++z) CHECK(height_of_class_label(class_label_of_height(z)) == z);
  CHECK_THROWS_AS(class_label_of_height(0), ClassRangeError);
  CHECK_THROWS_AS(class_label_of_height(20), ClassRangeError);
  CHECK_THROWS_AS(height_of_class_label("hth"), LabelError);  // 20, out of alphabet
  CHECK_THROWS_AS(height_of_class_label("xah"), LabelError);
  CHECK_THROWS_AS(height_of_class_label("ha"), LabelError);
}
