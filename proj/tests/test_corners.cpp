#include <catch2/catch_amalgamated.hpp>

#include "roofkit/corners.hpp"
#include "roofkit/rng.hpp"

using namespace roofkit;

namespace {

RoofSection make_section(int id, int r0, int c0, int r1, int c1,
                         DatasetSplit split = DatasetSplit::Training) {
  RoofSection sec;
  sec.id = id;
  sec.split = split;
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) sec.pixels.push_back({r, c});
  sec.rim = section_rim(sec.pixels);
  return sec;
}

// Straightforward overlap count used as the assignment oracle.
std::int64_t overlap_count(const CornerSquare& sq, const RoofSection& sec, int w, int h) {
  const auto fp = square_footprint(sq, w, h);
  std::int64_t n = 0;
  for (PixelCoord p : sec.pixels)
    if (p.row >= fp.row0 && p.row <= fp.row1 && p.col >= fp.col0 && p.col <= fp.col1) ++n;
  return n;
}

}  // namespace

TEST_CASE("squares file to the section with maximal overlap") {
  // Section A gets 30 footprint pixels, B only 5.
  const std::vector<RoofSection> sections = {make_section(0, 17, 21, 40, 60),
                                             make_section(1, 0, 0, 12, 13)};
  const CornerSquare sq{{19, 16}, 15, 4};  // footprint rows 12..26, cols 9..23
  CHECK(overlap_count(sq, sections[0], 64, 64) == 30);
  CHECK(overlap_count(sq, sections[1], 64, 64) == 5);

  const auto result = assign_squares(std::vector<CornerSquare>{sq}, sections, 64, 64);
  REQUIRE(result.assigned.size() == 1);
  CHECK(result.unmatched.empty());
  CHECK(result.assigned[0].section_id == 0);
}

TEST_CASE("far squares stay unmatched, they are data not errors") {
  const std::vector<RoofSection> sections = {make_section(0, 2, 2, 6, 6)};
  const auto result =
      assign_squares(std::vector<CornerSquare>{{{50, 50}, 15, 9}}, sections, 64, 64);
  CHECK(result.assigned.empty());
  REQUIRE(result.unmatched.size() == 1);
  CHECK(result.unmatched[0].z == 9);
}

TEST_CASE("overlap ties break toward the smaller section id") {
  // Two sections overlapping the footprint by exactly 60 pixels each.
  const std::vector<RoofSection> sections = {make_section(2, 10, 4, 19, 9),
                                             make_section(7, 10, 12, 19, 19)};
  const CornerSquare sq{{14, 10}, 15, 3};  // footprint rows 7..21, cols 3..17
  const auto a = overlap_count(sq, sections[0], 64, 64);
  const auto b = overlap_count(sq, sections[1], 64, 64);
  REQUIRE(a == b);
  const auto result = assign_squares(std::vector<CornerSquare>{sq}, sections, 64, 64);
  REQUIRE(result.assigned.size() == 1);
  CHECK(result.assigned[0].section_id == 2);
}

TEST_CASE("select_rim_pixel prefers the rim pixel nearest the center") {
  const RoofSection sec = make_section(0, 10, 10, 30, 30);
  SECTION("center exactly on a rim pixel") {
    CHECK(select_rim_pixel({{10, 20}, 15, 1}, sec, 64, 64) == PixelCoord{10, 20});
  }
  SECTION("square straddling a straight edge, deterministic tie") {
    // Center two pixels outside the left edge: nearest rim pixel is (18, 10).
    CHECK(select_rim_pixel({{18, 8}, 15, 1}, sec, 64, 64) == PixelCoord{18, 10});
    // Center outside the corner diagonally: the corner pixel wins.
    CHECK(select_rim_pixel({{8, 8}, 15, 1}, sec, 64, 64) == PixelCoord{10, 10});
  }
  SECTION("interior square falls back to the nearest section pixel") {
    CHECK(select_rim_pixel({{20, 20}, 15, 1}, sec, 64, 64) == PixelCoord{20, 20});
  }
  SECTION("no intersection is an error") {
    CHECK_THROWS_AS(select_rim_pixel({{50, 50}, 15, 1}, sec, 64, 64), AssignmentError);
  }
}

TEST_CASE("rep pixel lies in both the footprint and the rim") {
  Rng rng(31);
  for (int round = 0; round < 100; ++round) {
    const int r0 = static_cast<int>(rng.uniform_int(0, 30));
    const int c0 = static_cast<int>(rng.uniform_int(0, 30));
    const RoofSection sec = make_section(0, r0, c0, r0 + static_cast<int>(rng.uniform_int(0, 20)),
                                         c0 + static_cast<int>(rng.uniform_int(0, 20)));
    const CornerSquare sq{{static_cast<int>(rng.uniform_int(r0 - 5, r0 + 25)),
                           static_cast<int>(rng.uniform_int(c0 - 5, c0 + 25))},
                          15,
                          1};
    const auto result = assign_squares(std::vector<CornerSquare>{sq},
                                       std::vector<RoofSection>{sec}, 128, 128);
    if (result.assigned.empty()) continue;
    const PixelCoord rep = result.assigned[0].rep_pixel;
    const auto fp = square_footprint(sq, 128, 128);
    CHECK(rep.row >= fp.row0);
    CHECK(rep.row <= fp.row1);
    CHECK(rep.col >= fp.col0);
    CHECK(rep.col <= fp.col1);
    const bool on_rim = std::find(sec.rim.begin(), sec.rim.end(), rep) != sec.rim.end();
    const bool in_pixels = std::binary_search(sec.pixels.begin(), sec.pixels.end(), rep);
    CHECK((on_rim || in_pixels));
  }
}

TEST_CASE("assignment is independent of square input order") {
  const std::vector<RoofSection> sections = {make_section(0, 5, 5, 15, 15),
                                             make_section(1, 5, 30, 15, 40),
                                             make_section(2, 30, 5, 40, 15)};
  std::vector<CornerSquare> squares = {{{5, 5}, 15, 2},   {{15, 15}, 15, 3}, {{5, 40}, 15, 4},
                                       {{30, 5}, 15, 5},  {{40, 15}, 15, 6}, {{15, 30}, 15, 7}};
  const auto forward = assign_squares(squares, sections, 64, 64);
  std::reverse(squares.begin(), squares.end());
  auto backward = assign_squares(squares, sections, 64, 64);

  auto key = [](const CornerAssignment& a) {
    return std::tuple(a.square.center.row, a.square.center.col, a.square.z);
  };
  auto fwd = forward.assigned;
  auto bwd = backward.assigned;
  auto by_key = [&](const CornerAssignment& a, const CornerAssignment& b) {
    return key(a) < key(b);
  };
  std::sort(fwd.begin(), fwd.end(), by_key);
  std::sort(bwd.begin(), bwd.end(), by_key);
  REQUIRE(fwd.size() == bwd.size());
  for (std::size_t i = 0; i < fwd.size(); ++i) {
    CHECK(fwd[i].section_id == bwd[i].section_id);
    CHECK(fwd[i].rep_pixel == bwd[i].rep_pixel);
  }
}

TEST_CASE("each square contributes to exactly one section") {
  // A square overlapping two adjacent sections must be filed once.
  const std::vector<RoofSection> sections = {make_section(0, 10, 10, 20, 19),
                                             make_section(1, 10, 21, 20, 30)};
  const std::vector<CornerSquare> squares = {{{15, 20}, 15, 5}};
  const auto result = assign_squares(squares, sections, 64, 64);
  REQUIRE(result.assigned.size() == 1);
  CHECK(result.unmatched.empty());
}
