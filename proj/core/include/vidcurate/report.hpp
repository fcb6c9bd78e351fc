#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vidcurate/metrics.hpp"
#include "vidcurate/sampling.hpp"
#include "vidcurate/stability.hpp"

namespace vidcurate::report {

/// 0.333 -> "33.3", 0.5 -> "50".
std::string percent_label(double fraction);

std::string eval_kv(const EvalReport& r);
std::string lipschitz_kv(const LipschitzReport& r, ClassId class_id);

struct EvalRow {
  Strategy strategy = Strategy::uniform;
  double fraction = 0;
  double precision = 0;
  double recall = 0;
  double map = 0;
  double labels = 0;  // mean selected-frame count
  std::size_t runs = 0;
};

struct LipschitzRow {
  Strategy strategy = Strategy::uniform;
  double fraction = 0;
  std::vector<double> levels;
  std::vector<double> values;  // mean K per level over runs
  std::size_t runs = 0;
};

/// Rows ordered by strategy group (uniform, frame_diff, random) then ascending P.
void sort_rows(std::vector<EvalRow>& rows);
void sort_rows(std::vector<LipschitzRow>& rows);

/// Aligned text tables with a leading comment block stating conventions.
std::string eval_table(std::span<const EvalRow> rows, const EvalOptions& options);
std::string lipschitz_table(std::span<const LipschitzRow> rows, PairMode mode, ClassId class_id);

std::string eval_summary_kv(std::span<const EvalRow> rows);
std::string lipschitz_summary_kv(std::span<const LipschitzRow> rows);

/// `frame_index iou` lines.
std::string iou_curve_text(const IoUCurve& curve);
/// `i j numerator denominator quotient` lines.
std::string quotients_text(const QuotientSet& set);
/// `t D_t` lines.
std::string diff_series_text(const DiffSeries& diffs);

}  // namespace vidcurate::report
