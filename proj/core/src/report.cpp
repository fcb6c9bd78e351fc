#include "vidcurate/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace vidcurate::report {
namespace {

int strategy_rank(Strategy s) {
  switch (s) {
    case Strategy::uniform: return 0;
    case Strategy::frame_diff: return 1;
    case Strategy::random: return 2;
  }
  return 3;
}

std::string display_name(Strategy s) {
  switch (s) {
    case Strategy::uniform: return "Uniform";
    case Strategy::frame_diff: return "Frame Diff";
    case Strategy::random: return "Random";
  }
  return "?";
}

template <class Row>
void sort_by_group(std::vector<Row>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (strategy_rank(a.strategy) != strategy_rank(b.strategy)) {
      return strategy_rank(a.strategy) < strategy_rank(b.strategy);
    }
    return a.fraction < b.fraction;
  });
}

std::string level_name(double level) { return fmt::format("K{}", level); }

}  // namespace

std::string percent_label(double fraction) {
  return fmt::format("{}", std::round(fraction * 1000.0) / 10.0);
}

void sort_rows(std::vector<EvalRow>& rows) { sort_by_group(rows); }
void sort_rows(std::vector<LipschitzRow>& rows) { sort_by_group(rows); }

std::string eval_kv(const EvalReport& r) {
  std::string out;
  out += "ap_interpolation=all_point\n";
  out += fmt::format("iou_threshold={}\n", r.options.iou_threshold);
  out += fmt::format("conf_min={}\n", r.options.conf_min);
  out += "vacuous_precision=1\n";
  out += fmt::format("map50={:.6f}\n", r.map);
  out += fmt::format("precision={:.6f}\n", r.overall.precision);
  out += fmt::format("recall={:.6f}\n", r.overall.recall);
  out += fmt::format("tp={}\nfp={}\nfn={}\n", r.totals.tp, r.totals.fp, r.totals.fn);
  for (const auto& c : r.classes) {
    const std::string k = fmt::format("class.{}", c.class_id);
    out += fmt::format("{}.name={}\n", k, c.name);
    out += fmt::format("{}.tp={}\n{}.fp={}\n{}.fn={}\n", k, c.counts.tp, k, c.counts.fp, k,
                       c.counts.fn);
    out += fmt::format("{}.precision={:.6f}\n", k, c.pr.precision);
    out += fmt::format("{}.recall={:.6f}\n", k, c.pr.recall);
    out += c.ap ? fmt::format("{}.ap50={:.6f}\n", k, *c.ap) : fmt::format("{}.ap50=none\n", k);
  }
  return out;
}

std::string lipschitz_kv(const LipschitzReport& r, ClassId class_id) {
  std::string out;
  out += fmt::format("class={}\n", class_id);
  out += fmt::format("pairs={}\n", to_string(r.mode));
  out += "distance=mean_abs_gray\n";
  out += fmt::format("samples={}\n", r.sample_count);
  out += fmt::format("dropped_zero_denominator={}\n", r.dropped_zero_denominator);
  for (std::size_t i = 0; i < r.levels.size(); ++i) {
    out += fmt::format("{}={:.6f}\n", level_name(r.levels[i]), r.values[i]);
  }
  return out;
}

std::string eval_table(std::span<const EvalRow> rows, const EvalOptions& options) {
  std::string out;
  out += fmt::format(
      "# mAP@{}: all-point interpolated AP, mean over classes with ground truth\n"
      "# conf_min={}; precision is 1 when there are no predictions\n"
      "# Labels: uniform uses every floor(1/P)-th frame, frame_diff/random use round(P*N)\n"
      "# Random rows: arithmetic mean over Runs\n",
      options.iou_threshold, options.conf_min);
  out += fmt::format("{:<12}{:>7}{:>12}{:>12}{:>12}{:>9}{:>6}\n", "Strategy", "P(%)", "Precision",
                     "Recall", "mAP@0.5", "Labels", "Runs");
  for (const auto& r : rows) {
    out += fmt::format("{:<12}{:>7}{:>12.5f}{:>12.5f}{:>12.5f}{:>9.1f}{:>6}\n",
                       display_name(r.strategy), percent_label(r.fraction), r.precision, r.recall,
                       r.map, r.labels, r.runs);
  }
  return out;
}

std::string lipschitz_table(std::span<const LipschitzRow> rows, PairMode mode, ClassId class_id) {
  std::string out;
  out += fmt::format(
      "# Empirical Lipschitz percentiles of |dIoU| / frame distance, class {}\n"
      "# pairs={}; distance=mean absolute gray difference per pixel; zero-distance pairs dropped\n"
      "# Random rows: arithmetic mean over Runs\n",
      class_id, to_string(mode));
  std::vector<double> levels;
  if (!rows.empty()) levels = rows.front().levels;
  out += fmt::format("{:<12}{:>7}", "Strategy", "P(%)");
  for (double l : levels) out += fmt::format("{:>10}", level_name(l));
  out += fmt::format("{:>6}\n", "Runs");
  for (const auto& r : rows) {
    out += fmt::format("{:<12}{:>7}", display_name(r.strategy), percent_label(r.fraction));
    for (double v : r.values) out += fmt::format("{:>10.3f}", v);
    out += fmt::format("{:>6}\n", r.runs);
  }
  return out;
}

std::string eval_summary_kv(std::span<const EvalRow> rows) {
  std::string out;
  for (const auto& r : rows) {
    const std::string k = fmt::format("{}.p{}", to_string(r.strategy), format_fraction(r.fraction));
    out += fmt::format("{}.precision={:.6f}\n{}.recall={:.6f}\n{}.map50={:.6f}\n", k, r.precision, k,
                       r.recall, k, r.map);
    out += fmt::format("{}.labels={:.1f}\n{}.runs={}\n", k, r.labels, k, r.runs);
  }
  return out;
}

std::string lipschitz_summary_kv(std::span<const LipschitzRow> rows) {
  std::string out;
  for (const auto& r : rows) {
    const std::string k = fmt::format("{}.p{}", to_string(r.strategy), format_fraction(r.fraction));
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
      out += fmt::format("{}.{}={:.6f}\n", k, level_name(r.levels[i]), r.values[i]);
    }
    out += fmt::format("{}.runs={}\n", k, r.runs);
  }
  return out;
}

std::string iou_curve_text(const IoUCurve& curve) {
  std::string out;
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    out += fmt::format("{} {:.6f}\n", curve.frames[i], curve.values[i]);
  }
  return out;
}

std::string quotients_text(const QuotientSet& set) {
  std::string out;
  for (const auto& s : set.samples) {
    out += fmt::format("{} {} {:.9g} {:.9g} {:.9g}\n", s.i, s.j, s.numerator, s.denominator,
                       s.quotient);
  }
  return out;
}

std::string diff_series_text(const DiffSeries& diffs) {
  std::string out;
  for (std::size_t t = 1; t < diffs.total_frames; ++t) {
    out += fmt::format("{} {}\n", t, diffs.values[t - 1]);
  }
  return out;
}

}  // namespace vidcurate::report
