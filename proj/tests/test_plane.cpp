#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "roofkit/plane.hpp"
#include "roofkit/rng.hpp"

using namespace roofkit;

TEST_CASE("file_heights follows the midpoint rule") {
  SECTION("middle below the extremes' midpoint: lower pair averaged") {
    const auto out = file_heights(2, 3, 8);  // 3 < 5
    CHECK(out[0] == 2.5);
    CHECK(out[1] == 2.5);
    CHECK(out[2] == 8.0);
  }
  SECTION("middle at or above the midpoint: upper pair averaged") {
    const auto out = file_heights(2, 7, 8);  // 7 >= 5
    CHECK(out[0] == 2.0);
    CHECK(out[1] == 7.5);
    CHECK(out[2] == 7.5);
  }
  SECTION("repeated heights pass through") {
    CHECK(file_heights(4, 4, 9) == std::array<double, 3>{4, 4, 9});
    CHECK(file_heights(4, 9, 9) == std::array<double, 3>{4, 9, 9});
    CHECK(file_heights(5, 5, 5) == std::array<double, 3>{5, 5, 5});
  }
  SECTION("non-ascending input errors") {
    CHECK_THROWS_AS(file_heights(3, 2, 8), OrderError);
    CHECK_THROWS_AS(file_heights(2, 8, 7), OrderError);
  }
}

TEST_CASE("file_heights is idempotent with at most two distinct outputs") {
  Rng rng(41);
  for (int round = 0; round < 5000; ++round) {
    double z[3];
    if (round % 2 == 0) {
      for (double& v : z) v = static_cast<double>(rng.uniform_int(1, 19));
    } else {
      for (double& v : z) v = rng.uniform(0.5, 19.5);
    }
    std::sort(z, z + 3);
    const auto once = file_heights(z[0], z[1], z[2]);
    REQUIRE(once[0] <= once[1]);
    REQUIRE(once[1] <= once[2]);
    const bool two_distinct = once[0] == once[1] || once[1] == once[2];
    REQUIRE(two_distinct);
    const auto twice = file_heights(once[0], once[1], once[2]);
    REQUIRE(twice == once);
  }
}

TEST_CASE("largest_triangle examples") {
  SECTION("hand-enumerated maximum") {
    const std::vector<PixelCoord> pts = {{0, 0}, {0, 1}, {1, 0}, {10, 10}};
    // (row, col): {(0,0),(1,0),(0,1),(10,10)} in (x=col, y=row) terms.
    const auto tri = largest_triangle(pts);
    CHECK(tri == std::array<PixelCoord, 3>{{{0, 1}, {1, 0}, {10, 10}}});
    CHECK(oracle::area2(tri[0], tri[1], tri[2]) == 19);  // area 9.5
  }
  SECTION("full symmetry breaks to the first lexicographic triple") {
    const std::vector<PixelCoord> pts = {{0, 0}, {0, 10}, {10, 10}, {10, 0}};
    const auto idx = largest_triangle_indices(pts);
    CHECK(idx == std::array<int, 3>{0, 1, 2});
  }
  SECTION("three points are returned as-is") {
    const std::vector<PixelCoord> pts = {{5, 1}, {2, 8}, {9, 9}};
    CHECK(largest_triangle(pts) == std::array<PixelCoord, 3>{{{5, 1}, {2, 8}, {9, 9}}});
  }
  SECTION("collinear input is degenerate") {
    const std::vector<PixelCoord> pts = {{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    CHECK_THROWS_AS(largest_triangle(pts), DegenerateError);
  }
}

TEST_CASE("largest_triangle agrees with exhaustive enumeration") {
  Rng rng(42);
  for (int round = 0; round < 2000; ++round) {
    const int n = static_cast<int>(rng.uniform_int(3, 10));
    std::vector<PixelCoord> pts(n);
    for (auto& p : pts)
      p = {static_cast<int>(rng.uniform_int(0, 50)), static_cast<int>(rng.uniform_int(0, 50))};
    const auto expected = oracle::exhaustive_largest_triangle(pts);
    if (expected[0] < 0) {
      CHECK_THROWS_AS(largest_triangle_indices(pts), DegenerateError);
      continue;
    }
    CHECK(largest_triangle_indices(pts) == expected);
  }
}

TEST_CASE("hull-restricted search matches exhaustive beyond 12 points") {
  Rng rng(43);
  for (int round = 0; round < 300; ++round) {
    const int n = static_cast<int>(rng.uniform_int(13, 40));
    std::vector<PixelCoord> pts(n);
    for (auto& p : pts)
      p = {static_cast<int>(rng.uniform_int(0, 80)), static_cast<int>(rng.uniform_int(0, 80))};
    const auto expected = oracle::exhaustive_largest_triangle(pts);
    if (expected[0] < 0) continue;
    const auto got = largest_triangle_indices(pts);
    // The triples must agree exactly, tie-break included.
    CHECK(got == expected);
  }
}

TEST_CASE("plane_from_points examples") {
  SECTION("horizontal plane") {
    const RoofPlane p = plane_from_points({0, 0, 3}, {1, 0, 3}, {0, 1, 3});
    CHECK(p.a == Catch::Approx(0.0).margin(1e-12));
    CHECK(p.b == Catch::Approx(0.0).margin(1e-12));
    CHECK(p.c == Catch::Approx(3.0).margin(1e-12));
    CHECK(height_at(p, 123.0, -7.0) == Catch::Approx(3.0).margin(1e-9));
  }
  SECTION("unit slope z = x") {
    const RoofPlane p = plane_from_points({0, 0, 0}, {1, 0, 1}, {0, 1, 0});
    CHECK(p.a == Catch::Approx(1.0).margin(1e-12));
    CHECK(p.b == Catch::Approx(0.0).margin(1e-12));
    CHECK(p.c == Catch::Approx(0.0).margin(1e-12));
    CHECK(height_at(p, 2.5, 7.0) == Catch::Approx(2.5).margin(1e-9));
  }
  SECTION("collinear (x, y) projections are degenerate") {
    CHECK_THROWS_AS(plane_from_points({0, 0, 1}, {1, 1, 2}, {2, 2, 3}), DegenerateError);
  }
}

TEST_CASE("plane_from_points interpolates within 1e-9 and matches Gauss") {
  Rng rng(44);
  for (int round = 0; round < 5000; ++round) {
    std::array<std::array<double, 3>, 3> pts;
    for (auto& p : pts)
      p = {rng.uniform(-200, 200), rng.uniform(-200, 200), rng.uniform(0, 20)};
    const double det = (pts[1][0] - pts[0][0]) * (pts[2][1] - pts[0][1]) -
                       (pts[2][0] - pts[0][0]) * (pts[1][1] - pts[0][1]);
    if (std::abs(det) < 1e-3) continue;  // stay away from near-degenerate
    const RoofPlane p =
        plane_from_points({pts[0][0], pts[0][1], pts[0][2]}, {pts[1][0], pts[1][1], pts[1][2]},
                          {pts[2][0], pts[2][1], pts[2][2]});
    for (const auto& q : pts)
      REQUIRE(std::abs(height_at(p, q[0], q[1]) - q[2]) < 1e-9);
    const auto gauss = oracle::plane_gauss(pts);
    CHECK(p.a == Catch::Approx(gauss[0]).margin(1e-7));
    CHECK(p.b == Catch::Approx(gauss[1]).margin(1e-7));
    CHECK(p.c == Catch::Approx(gauss[2]).margin(1e-6));
  }
}

TEST_CASE("reconstruct_section fallbacks") {
  const ReconstructOptions opt{6.11, std::nullopt};
  SECTION("N = 0 is horizontal at the default height") {
    const auto fit = reconstruct_section({}, opt);
    CHECK(fit.plane.provenance == PlaneProvenance::NoCorner);
    CHECK(fit.plane.a == 0.0);
    CHECK(fit.plane.b == 0.0);
    CHECK(fit.plane.c == 6.11);
    CHECK(fit.plane.corner_count == 0);
  }
  SECTION("N = 1 is horizontal at that height") {
    const std::vector<CornerObservation> obs = {{{5, 5}, 4.0}};
    const auto fit = reconstruct_section(obs, opt);
    CHECK(fit.plane.provenance == PlaneProvenance::OneCorner);
    CHECK(fit.plane.c == 4.0);
  }
  SECTION("N = 2 averages the two heights") {
    const std::vector<CornerObservation> obs = {{{5, 5}, 4.0}, {{9, 9}, 6.0}};
    const auto fit = reconstruct_section(obs, opt);
    CHECK(fit.plane.provenance == PlaneProvenance::TwoCorner);
    CHECK(fit.plane.c == 5.0);
    CHECK(fit.plane.corner_count == 2);
  }
  SECTION("collinear corners demote to a horizontal Degenerate plane") {
    const std::vector<CornerObservation> obs = {{{0, 0}, 2.0}, {{1, 1}, 9.0}, {{2, 2}, 4.0}};
    const auto fit = reconstruct_section(obs, opt);
    CHECK(fit.plane.provenance == PlaneProvenance::Degenerate);
    CHECK(fit.plane.a == 0.0);
    CHECK(fit.plane.c == Catch::Approx(5.5));  // mean of extremes 2 and 9
  }
}

TEST_CASE("reconstruct_section N >= 3 files heights then interpolates") {
  const ReconstructOptions opt{6.11, std::nullopt};
  // Gable-like quad: two eave corners at 3, two ridge corners at 8; the
  // largest triangle has heights {3, 3, 8} or {3, 8, 8}, so filing is a no-op.
  const std::vector<CornerObservation> obs = {
      {{0, 0}, 3.0}, {{0, 20}, 3.0}, {{10, 20}, 8.0}, {{10, 0}, 8.0}};
  const auto fit = reconstruct_section(obs, opt);
  CHECK(fit.plane.provenance == PlaneProvenance::Triangle);
  CHECK(fit.plane.corner_count == 4);
  CHECK_FALSE(fit.filing_applied);
  // The plane must reproduce all four corners: z = 3 + 0.5 * row.
  for (const auto& o : obs)
    CHECK(height_at(fit.plane, o.pixel.col, o.pixel.row) == Catch::Approx(o.z).margin(1e-9));

  // Three distinct heights trigger filing: (2, 3, 8) -> (2.5, 2.5, 8).
  const std::vector<CornerObservation> skew = {{{0, 0}, 2.0}, {{0, 10}, 3.0}, {{10, 0}, 8.0}};
  const auto filed = reconstruct_section(skew, opt);
  CHECK(filed.filing_applied);
  CHECK(filed.filed_z == std::array<double, 3>{2.5, 2.5, 8.0});
  CHECK(height_at(filed.plane, 0, 0) == Catch::Approx(2.5).margin(1e-9));
  CHECK(height_at(filed.plane, 10, 0) == Catch::Approx(2.5).margin(1e-9));
  CHECK(height_at(filed.plane, 0, 10) == Catch::Approx(8.0).margin(1e-9));
}

TEST_CASE("height_at evaluates the plane") {
  CHECK(height_at({0, 0, 3, PlaneProvenance::NoCorner, 0}, 4, 5) == 3.0);
  CHECK(height_at({1, 0, 0, PlaneProvenance::Triangle, 3}, 2.5, 7.0) == 2.5);
}
