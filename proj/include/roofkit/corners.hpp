#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "roofkit/codec.hpp"
#include "roofkit/sections.hpp"

namespace roofkit {

/// A corner square filed to the single roof section it belongs to, plus the
/// one representative rim pixel that stands in for the corner when fitting.
struct CornerAssignment {
  CornerSquare square;
  int section_id = -1;
  PixelCoord rep_pixel;
};

struct AssignmentResult {
  std::vector<CornerAssignment> assigned;
  std::vector<CornerSquare> unmatched;  // squares overlapping no section
};

/// Among footprint-and-rim pixels, picks the one nearest the square center
/// (ties row-major). A square interior to the section falls back to the
/// nearest section pixel.
inline PixelCoord select_rim_pixel(const CornerSquare& sq, const RoofSection& sec,
                                   int frame_width, int frame_height) {
  const auto fp = square_footprint(sq, frame_width, frame_height);
  auto best_of = [&](std::span<const PixelCoord> candidates, bool* found) {
    PixelCoord best{};
    std::int64_t best_d = -1;
    for (PixelCoord p : candidates) {
      if (p.row < fp.row0 || p.row > fp.row1 || p.col < fp.col0 || p.col > fp.col1) continue;
      const std::int64_t dr = p.row - sq.center.row;
      const std::int64_t dc = p.col - sq.center.col;
      const std::int64_t d = dr * dr + dc * dc;
      // candidates come row-major, so strict < keeps the row-major tie winner
      if (best_d < 0 || d < best_d) {
        best_d = d;
        best = p;
      }
    }
    *found = best_d >= 0;
    return best;
  };

  bool found = false;
  PixelCoord p = best_of(sec.rim, &found);
  if (found) return p;
  p = best_of(sec.pixels, &found);
  if (found) return p;
  throw AssignmentError("corner square does not intersect the section");
}

/// Files every square to the section with maximal footprint overlap (pixel
/// count; ties to the smaller section id). Squares overlapping no section are
/// reported unmatched rather than erroring: far-off squares are data.
inline AssignmentResult assign_squares(std::span<const CornerSquare> squares,
                                       std::span<const RoofSection> sections, int frame_width,
                                       int frame_height) {
  const auto grid = detail::label_sections(sections, frame_width, frame_height);
  std::map<std::int32_t, const RoofSection*> by_id;
  for (const auto& sec : sections) by_id[sec.id] = &sec;

  AssignmentResult result;
  for (const CornerSquare& sq : squares) {
    const auto fp = square_footprint(sq, frame_width, frame_height);
    std::map<std::int32_t, std::int64_t> overlap;  // section id -> pixel count
    if (!fp.empty()) {
      for (int r = fp.row0; r <= fp.row1; ++r) {
        for (int c = fp.col0; c <= fp.col1; ++c) {
          const std::int32_t id = grid.at(r, c);
          if (id >= 0) ++overlap[id];
        }
      }
    }
    if (overlap.empty()) {
      result.unmatched.push_back(sq);
      continue;
    }
    std::int32_t best_id = -1;
    std::int64_t best_count = 0;
    for (auto [id, count] : overlap) {  // ascending id, so ties keep the smaller
      if (count > best_count) {
        best_count = count;
        best_id = id;
      }
    }
    result.assigned.push_back(
        {sq, best_id, select_rim_pixel(sq, *by_id.at(best_id), frame_width, frame_height)});
  }
  return result;
}

}  // namespace roofkit
