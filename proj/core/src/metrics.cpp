#include "vidcurate/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "vidcurate/error.hpp"

namespace vidcurate {

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

namespace {

void check_threshold(double t) {
  if (!(t > 0.0 && t < 1.0)) {
    throw Error(Errc::InvalidThreshold, fmt::format("IoU threshold {} not in (0, 1)", t));
  }
}

/// Indices of class-c predictions, highest confidence first, ties in input order.
std::vector<std::size_t> ranked_predictions(std::span<const Prediction> preds, ClassId c) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].class_id == c) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].confidence > preds[b].confidence;
  });
  return idx;
}

std::set<ClassId> classes_in(const PredictionSet& preds, const AnnotationSet& gts) {
  std::set<ClassId> out;
  for (const auto& f : preds.frames)
    for (const auto& p : f) out.insert(p.class_id);
  for (const auto& f : gts.frames)
    for (const auto& a : f) out.insert(a.class_id);
  for (const auto& [id, name] : gts.class_names) out.insert(id);
  return out;
}

}  // namespace

std::vector<MatchEntry> match_frame(std::span<const Prediction> preds,
                                    std::span<const Annotation> gts, ClassId class_id,
                                    double iou_threshold, MatchCounts* counts) {
  std::vector<std::size_t> gt_idx;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (gts[g].class_id == class_id) gt_idx.push_back(g);
  }
  std::vector<bool> taken(gt_idx.size(), false);
  std::vector<MatchEntry> out;
  MatchCounts local;

  for (std::size_t pi : ranked_predictions(preds, class_id)) {
    const Prediction& p = preds[pi];
    MatchEntry e{p.frame_index, class_id, pi, std::nullopt, 0.0, p.confidence};
    double best = -1.0;
    std::size_t best_slot = 0;
    for (std::size_t s = 0; s < gt_idx.size(); ++s) {
      if (taken[s]) continue;
      const double v = iou(p.box, gts[gt_idx[s]].box);
      if (v > best) {
        best = v;
        best_slot = s;
      }
    }
    if (best >= iou_threshold) {
      taken[best_slot] = true;
      e.ground_truth = gt_idx[best_slot];
      e.iou = best;
      ++local.tp;
    } else {
      e.iou = std::max(best, 0.0);
      ++local.fp;
    }
    out.push_back(e);
  }
  local.fn = static_cast<std::size_t>(std::count(taken.begin(), taken.end(), false));
  if (counts != nullptr) *counts += local;
  return out;
}

MatchResult match_detections(const PredictionSet& preds, const AnnotationSet& gts,
                             double iou_threshold) {
  check_threshold(iou_threshold);
  if (preds.frame_count() != gts.frame_count()) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("predictions cover {} frames, ground truth {}", preds.frame_count(),
                            gts.frame_count()));
  }
  MatchResult result;
  result.iou_threshold = iou_threshold;
  const auto classes = classes_in(preds, gts);
  for (ClassId c : classes) result.per_class[c];
  for (std::size_t f = 0; f < preds.frame_count(); ++f) {
    for (ClassId c : classes) {
      auto entries = match_frame(preds.frames[f], gts.frames[f], c, iou_threshold,
                                 &result.per_class[c]);
      for (auto& e : entries) {
        e.frame = f;
        result.entries.push_back(e);
      }
    }
  }
  for (const auto& [c, counts] : result.per_class) result.totals += counts;
  return result;
}

PrecisionRecall precision_recall(const MatchCounts& c) noexcept {
  PrecisionRecall pr;
  if (c.tp + c.fp > 0) pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) pr.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return pr;
}

PrecisionRecall precision_recall(const MatchResult& m) noexcept { return precision_recall(m.totals); }

double average_precision(const PredictionSet& preds, const AnnotationSet& gts, ClassId class_id,
                         double iou_threshold) {
  check_threshold(iou_threshold);
  if (preds.frame_count() != gts.frame_count()) {
    throw Error(Errc::DimensionMismatch, "prediction and ground-truth frame counts differ");
  }

  struct Scored {
    double confidence;
    FrameIndex frame;
    std::size_t order;
    bool tp;
  };
  std::vector<Scored> scored;
  std::size_t positives = 0;
  for (std::size_t f = 0; f < gts.frame_count(); ++f) {
    for (const auto& a : gts.frames[f]) positives += a.class_id == class_id ? 1 : 0;
    for (const auto& e : match_frame(preds.frames[f], gts.frames[f], class_id, iou_threshold)) {
      scored.push_back({e.confidence, f, e.prediction, e.ground_truth.has_value()});
    }
  }
  if (positives == 0) {
    throw Error(Errc::NoGroundTruth, fmt::format("class {} has no ground truth", class_id));
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.order < b.order;
  });

  std::vector<double> recall(scored.size());
  std::vector<double> precision(scored.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    tp += scored[i].tp ? 1 : 0;
    recall[i] = static_cast<double>(tp) / static_cast<double>(positives);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Precision envelope: max precision at any rank with recall >= this one.
  for (std::size_t i = scored.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return std::clamp(ap, 0.0, 1.0);
}

double map50(std::span<const double> per_class_aps) {
  if (per_class_aps.empty()) throw Error(Errc::NoGroundTruth, "no class has ground truth");
  return std::accumulate(per_class_aps.begin(), per_class_aps.end(), 0.0) /
         static_cast<double>(per_class_aps.size());
}

IoUCurve per_frame_iou_curve(const PredictionSet& preds, const AnnotationSet& gts,
                             ClassId class_id, std::span<const FrameIndex> frames) {
  IoUCurve curve;
  curve.class_id = class_id;
  curve.frames.assign(frames.begin(), frames.end());
  curve.values.reserve(frames.size());
  for (FrameIndex f : frames) {
    if (f >= preds.frame_count() || f >= gts.frame_count()) {
      throw Error(Errc::RangeError, fmt::format("frame {} outside evaluated sets", f));
    }
    const auto& fp = preds.frames[f];
    const auto ranked = ranked_predictions(fp, class_id);
    const Prediction* top = ranked.empty() ? nullptr : &fp[ranked.front()];
    bool any_gt = false;
    double best = 0.0;
    for (const auto& a : gts.frames[f]) {
      if (a.class_id != class_id) continue;
      any_gt = true;
      if (top != nullptr) best = std::max(best, iou(top->box, a.box));
    }
    if (top == nullptr && !any_gt) {
      curve.values.push_back(1.0);
    } else if (top == nullptr || !any_gt) {
      curve.values.push_back(0.0);
    } else {
      curve.values.push_back(best);
    }
  }
  return curve;
}

PredictionSet filter_confidence(const PredictionSet& preds, double conf_min) {
  PredictionSet out(preds.frame_count());
  out.class_names = preds.class_names;
  for (std::size_t f = 0; f < preds.frame_count(); ++f) {
    for (const auto& p : preds.frames[f]) {
      if (p.confidence >= conf_min) out.frames[f].push_back(p);
    }
  }
  return out;
}

EvalReport evaluate(const PredictionSet& raw_preds, const AnnotationSet& gts,
                    const EvalOptions& options) {
  const PredictionSet preds = filter_confidence(raw_preds, options.conf_min);
  const MatchResult m = match_detections(preds, gts, options.iou_threshold);

  EvalReport report;
  report.options = options;
  report.totals = m.totals;
  report.overall = precision_recall(m.totals);
  std::vector<double> aps;
  for (const auto& [c, counts] : m.per_class) {
    ClassEval ce;
    ce.class_id = c;
    const auto name = gts.class_names.find(c);
    ce.name = name != gts.class_names.end() ? name->second : std::to_string(c);
    ce.counts = counts;
    ce.pr = precision_recall(counts);
    if (counts.tp + counts.fn > 0) {
      ce.ap = average_precision(preds, gts, c, options.iou_threshold);
      aps.push_back(*ce.ap);
    }
    report.classes.push_back(ce);
  }
  report.map = map50(aps);
  return report;
}

}  // namespace vidcurate
