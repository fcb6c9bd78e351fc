#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vidcurate/types.hpp"

namespace vidcurate {

inline constexpr double kMatchIou = 0.5;

/// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

struct MatchCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  MatchCounts& operator+=(const MatchCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

/// Outcome for one prediction. `prediction` and `ground_truth` index into the
/// frame's prediction and annotation lists.
struct MatchEntry {
  FrameIndex frame = 0;
  ClassId class_id = 0;
  std::size_t prediction = 0;
  std::optional<std::size_t> ground_truth;
  double iou = 0;
  double confidence = 0;
};

struct MatchResult {
  std::vector<MatchEntry> entries;
  std::map<ClassId, MatchCounts> per_class;
  MatchCounts totals;
  double iou_threshold = kMatchIou;
};

/// Greedy matching within one frame for one class: predictions in descending
/// confidence (ties keep input order) each take the unmatched ground truth
/// with the highest IoU (ties: earlier ground truth) when that IoU reaches the
/// threshold. Entries are returned in processing order; unmatched ground
/// truths are added to `counts.fn`.
std::vector<MatchEntry> match_frame(std::span<const Prediction> preds,
                                    std::span<const Annotation> gts, ClassId class_id,
                                    double iou_threshold, MatchCounts* counts = nullptr);

/// Per-frame, per-class greedy matching over a whole set.
/// Errc::InvalidThreshold unless 0 < threshold < 1; DimensionMismatch if the
/// sets cover different frame counts.
MatchResult match_detections(const PredictionSet& preds, const AnnotationSet& gts,
                             double iou_threshold);

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 1.0;
};

/// Vacuous cases: no predictions gives precision 1, no ground truth gives recall 1.
PrecisionRecall precision_recall(const MatchCounts& counts) noexcept;
PrecisionRecall precision_recall(const MatchResult& m) noexcept;

/// All-point interpolated AP for one class, pooled across frames.
/// Errc::NoGroundTruth when the class has no ground truth anywhere.
double average_precision(const PredictionSet& preds, const AnnotationSet& gts, ClassId class_id,
                         double iou_threshold = kMatchIou);

/// Unweighted mean of per-class APs. Errc::NoGroundTruth for an empty list.
double map50(std::span<const double> per_class_aps);

struct IoUCurve {
  ClassId class_id = 0;
  std::vector<FrameIndex> frames;
  std::vector<double> values;
};

/// Per frame: IoU of the class's top-confidence prediction against its
/// best-overlapping ground truth; 0 if exactly one side is empty, 1 if both are.
IoUCurve per_frame_iou_curve(const PredictionSet& preds, const AnnotationSet& gts,
                             ClassId class_id, std::span<const FrameIndex> frames);

/// Drops predictions below conf_min.
PredictionSet filter_confidence(const PredictionSet& preds, double conf_min);

struct ClassEval {
  ClassId class_id = 0;
  std::string name;
  MatchCounts counts;
  PrecisionRecall pr;
  std::optional<double> ap;  // empty when the class has no ground truth
};

struct EvalOptions {
  double iou_threshold = kMatchIou;
  double conf_min = 0.0;
};

struct EvalReport {
  std::vector<ClassEval> classes;  // ascending class id
  MatchCounts totals;
  PrecisionRecall overall;  // pooled over all classes
  double map = 0.0;
  EvalOptions options;
};

/// Errc::NoGroundTruth when no class has ground truth.
EvalReport evaluate(const PredictionSet& preds, const AnnotationSet& gts,
                    const EvalOptions& options = {});

}  // namespace vidcurate
