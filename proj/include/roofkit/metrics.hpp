#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "roofkit/codec.hpp"
#include "roofkit/errors.hpp"
#include "roofkit/types.hpp"

namespace roofkit {

namespace detail {

/// Neumaier-compensated accumulator; keeps reductions order-insensitive well
/// below the 1e-12 contract.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace detail

/// Intersection over union of two pixel sets given as sorted unique vectors.
/// Both empty counts as 1.0.
inline double iou(std::span<const PixelCoord> pred, std::span<const PixelCoord> truth) {
  std::size_t inter = 0;
  std::size_t i = 0, j = 0;
  while (i < pred.size() && j < truth.size()) {
    if (pred[i] == truth[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (pred[i] < truth[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = pred.size() + truth.size() - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

struct HeightStats {
  std::size_t m = 0;                  // evaluated pairs
  double mean_abs_pct_error = 0.0;    // (1/M') sum 100|zhat - z|/z, z > 0 only
  double mean_accuracy = 0.0;         // 100 - mean_abs_pct_error
  double mean_difference = 0.0;       // (1/M) sum |zhat - z|
  double mse = 0.0;                   // (1/M) sum (zhat - z)^2
  std::size_t skipped_nonpositive = 0;  // pairs excluded from the pct statistic
};

/// Statistics over (predicted, truth) height pairs restricted to correctly
/// segmented pixels. Pairs with z <= 0 are skipped from the percentage
/// statistic only.
inline HeightStats height_error_stats(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw EmptyEvalError("no correctly segmented pixels to evaluate");
  HeightStats s;
  s.m = pairs.size();
  detail::KahanSum pct, diff, sq;
  std::size_t pct_n = 0;
  for (const auto& [zhat, z] : pairs) {
    const double d = zhat - z;
    diff.add(std::abs(d));
    sq.add(d * d);
    if (z > 0.0) {
      pct.add(100.0 * std::abs(d) / z);
      ++pct_n;
    } else {
      ++s.skipped_nonpositive;
    }
  }
  s.mean_difference = diff.value() / static_cast<double>(s.m);
  s.mse = sq.value() / static_cast<double>(s.m);
  s.mean_abs_pct_error = pct_n ? pct.value() / static_cast<double>(pct_n) : 0.0;
  s.mean_accuracy = 100.0 - s.mean_abs_pct_error;
  return s;
}

struct SplitEval {
  double iou = 0.0;
  std::size_t m = 0;
  std::optional<HeightStats> heights;  // absent when the split has no pairs
};

struct EvalReport {
  double iou = 0.0;
  std::size_t m = 0;  // |pred intersect truth|
  HeightStats overall;
  std::array<std::optional<SplitEval>, 3> per_split;  // indexed by split id
};

inline nlohmann::json to_json(const HeightStats& s) {
  return {{"m", s.m},
          {"mean_abs_pct_error", s.mean_abs_pct_error},
          {"mean_accuracy", s.mean_accuracy},
          {"mean_difference", s.mean_difference},
          {"mse", s.mse},
          {"skipped_nonpositive", s.skipped_nonpositive}};
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j{{"iou", r.iou}, {"m", r.m}, {"overall", to_json(r.overall)}};
  for (DatasetSplit split : kAllSplits) {
    const auto& se = r.per_split[split_id(split)];
    if (!se) continue;
    nlohmann::json js{{"iou", se->iou}, {"m", se->m}};
    if (se->heights) js["heights"] = to_json(*se->heights);
    j["splits"][split_name(split)] = js;
  }
  return j;
}

/// Aligned text table mirroring the reference layout: one statistic per row,
/// training / validation / testing columns plus an overall column.
inline std::string render_eval_table(const EvalReport& r, const std::string& title = "Statistic") {
  auto cell = [](double v, const char* suffix) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f %s", v, suffix);
    return std::string(buf);
  };
  auto col = [&](int idx, auto getter, const char* suffix) -> std::string {
    const auto& se = r.per_split[idx];
    if (!se) return "-";
    return cell(getter(*se), suffix);
  };

  struct Row {
    std::string name;
    std::array<std::string, 4> cells;
  };
  auto stat_row = [&](const std::string& name, auto from_split, auto from_overall,
                      const char* suffix) {
    Row row{name, {}};
    for (int i = 0; i < 3; ++i) row.cells[i] = col(i, from_split, suffix);
    row.cells[3] = cell(from_overall(r), suffix);
    return row;
  };

  const std::vector<Row> rows = {
      stat_row(
          "Jaccard index (IoU)", [](const SplitEval& s) { return s.iou * 100.0; },
          [](const EvalReport& e) { return e.iou * 100.0; }, "%"),
      stat_row(
          "Heights' mean accuracy",
          [](const SplitEval& s) { return s.heights ? s.heights->mean_accuracy : 0.0; },
          [](const EvalReport& e) { return e.overall.mean_accuracy; }, "%"),
      stat_row(
          "Heights' mean difference",
          [](const SplitEval& s) { return s.heights ? s.heights->mean_difference : 0.0; },
          [](const EvalReport& e) { return e.overall.mean_difference; }, "m"),
      stat_row(
          "Heights' mean square error",
          [](const SplitEval& s) { return s.heights ? s.heights->mse : 0.0; },
          [](const EvalReport& e) { return e.overall.mse; }, "m^2"),
  };

  const std::array<std::string, 5> header = {title, "Training", "Validation", "Testing",
                                             "Overall"};
  std::array<std::size_t, 5> widths;
  for (int c = 0; c < 5; ++c) widths[c] = header[c].size();
  for (const auto& row : rows) {
    widths[0] = std::max(widths[0], row.name.size());
    for (int c = 0; c < 4; ++c) widths[c + 1] = std::max(widths[c + 1], row.cells[c].size());
  }

  std::string out;
  auto emit = [&](const std::string& name, const std::array<std::string, 4>& cells) {
    out += name;
    out.append(widths[0] - name.size(), ' ');
    for (int c = 0; c < 4; ++c) {
      out += " | ";
      out += cells[c];
      out.append(widths[c + 1] - cells[c].size(), ' ');
    }
    out += '\n';
  };
  emit(header[0], {header[1], header[2], header[3], header[4]});
  std::size_t total = widths[0];
  for (int c = 1; c < 5; ++c) total += 3 + widths[c];
  out.append(total, '-');
  out += '\n';
  for (const auto& row : rows) emit(row.name, row.cells);
  return out;
}

}  // namespace roofkit
