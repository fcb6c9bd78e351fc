#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <tuple>

#include "oracles.hpp"
#include "vidcurate/error.hpp"
#include "vidcurate/metrics.hpp"

namespace vidcurate {
namespace {

using testing::exhaustive_match;

Errc error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::IoError;
}

BoundingBox random_box(std::mt19937_64& rng, int extent = 20) {
  const double x0 = static_cast<double>(rng() % extent), y0 = static_cast<double>(rng() % extent);
  return {x0, y0, x0 + 1 + static_cast<double>(rng() % 10), y0 + 1 + static_cast<double>(rng() % 10)};
}

PredictionSet preds_of(std::size_t frames, std::vector<Prediction> list) {
  PredictionSet s(frames);
  for (auto& p : list) s.frames[p.frame_index].push_back(p);
  return s;
}

AnnotationSet gts_of(std::size_t frames, std::vector<Annotation> list) {
  AnnotationSet s(frames);
  for (auto& a : list) s.frames[a.frame_index].push_back(a);
  return s;
}

TEST(Iou, HandValues) {
  const BoundingBox a{0, 0, 2, 2}, b{1, 1, 3, 3};
  EXPECT_NEAR(iou(a, a), 1.0, 1e-12);
  EXPECT_NEAR(iou(a, BoundingBox{5, 5, 6, 6}), 0.0, 1e-12);
  EXPECT_NEAR(iou(a, b), 1.0 / 7.0, 1e-12);
  EXPECT_NEAR(iou(a, BoundingBox{2, 0, 4, 2}), 0.0, 1e-12);  // touching edge
  EXPECT_NEAR(iou(BoundingBox{0, 0, 4, 4}, BoundingBox{1, 1, 3, 3}), 0.25, 1e-12);
}

TEST(Iou, Properties) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 5000; ++i) {
    const auto a = random_box(rng), b = random_box(rng);
    const double v = iou(a, b);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_EQ(v, iou(b, a));
    ASSERT_EQ(v == 1.0, a == b);
    const double dx = static_cast<double>(rng() % 50), dy = static_cast<double>(rng() % 50);
    const BoundingBox at{a.x_min + dx, a.y_min + dy, a.x_max + dx, a.y_max + dy};
    const BoundingBox bt{b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy};
    ASSERT_EQ(v, iou(at, bt));
  }
}

TEST(Match, SingleTruePositive) {
  // IoU of {0,0,10,10} and {0,0,10,6} is 0.6.
  const auto m = match_detections(preds_of(1, {{0, 0, {0, 0, 10, 6}, 0.9}}),
                                  gts_of(1, {{0, 0, {0, 0, 10, 10}}}), 0.5);
  EXPECT_EQ(m.totals, (MatchCounts{1, 0, 0}));
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_NEAR(m.entries[0].iou, 0.6, 1e-12);
}

TEST(Match, DuplicateDetectionIsFalsePositive) {
  const auto m = match_detections(
      preds_of(1, {{0, 0, {0, 0, 10, 9}, 0.6}, {0, 0, {0, 0, 10, 8}, 0.9}}),
      gts_of(1, {{0, 0, {0, 0, 10, 10}}}), 0.5);
  EXPECT_EQ(m.totals, (MatchCounts{1, 1, 0}));
  // Higher confidence wins even though the other box overlaps more.
  EXPECT_EQ(m.entries[0].prediction, 1u);
  EXPECT_TRUE(m.entries[0].ground_truth.has_value());
  EXPECT_FALSE(m.entries[1].ground_truth.has_value());
}

TEST(Match, NoPredictions) {
  const auto m = match_detections(PredictionSet(1),
                                  gts_of(1, {{0, 0, {0, 0, 2, 2}}, {0, 0, {5, 5, 7, 7}}}), 0.5);
  EXPECT_EQ(m.totals, (MatchCounts{0, 0, 2}));
}

TEST(Match, ClassesNeverCrossMatch) {
  const auto m = match_detections(preds_of(1, {{0, 1, {0, 0, 2, 2}, 0.9}}),
                                  gts_of(1, {{0, 0, {0, 0, 2, 2}}}), 0.5);
  EXPECT_EQ(m.totals, (MatchCounts{0, 1, 1}));
  EXPECT_EQ(m.per_class.at(0), (MatchCounts{0, 0, 1}));
  EXPECT_EQ(m.per_class.at(1), (MatchCounts{0, 1, 0}));
}

TEST(Match, IouTieGoesToEarlierGroundTruth) {
  const auto m = match_detections(preds_of(1, {{0, 0, {1, 0, 3, 2}, 0.9}}),
                                  gts_of(1, {{0, 0, {0, 0, 3, 2}}, {0, 0, {1, 0, 4, 2}}}), 0.5);
  ASSERT_TRUE(m.entries[0].ground_truth.has_value());
  EXPECT_EQ(*m.entries[0].ground_truth, 0u);
}

TEST(Match, InvalidThreshold) {
  for (double t : {0.0, 1.0, -0.5, 1.5}) {
    EXPECT_EQ(error_code_of([&] { match_detections(PredictionSet(1), AnnotationSet(1), t); }),
              Errc::InvalidThreshold);
  }
}

TEST(Match, GreedyEqualsExhaustiveOnSmallScenes) {
  std::mt19937_64 rng(123);
  for (int scene = 0; scene < 3000; ++scene) {
    const std::size_t np = rng() % 4, ng = rng() % 4;
    std::vector<Prediction> preds;
    std::vector<Annotation> gts;
    for (std::size_t g = 0; g < ng; ++g) gts.push_back({0, 0, random_box(rng, 6)});
    for (std::size_t p = 0; p < np; ++p) {
      // Coarse confidences so ties in confidence occur too.
      preds.push_back({0, 0, random_box(rng, 6), static_cast<double>(rng() % 4) / 4.0});
    }
    const double thr = (scene % 3 == 0) ? 0.5 : 0.1 + 0.1 * static_cast<double>(rng() % 8);
    MatchCounts counts;
    const auto entries = match_frame(preds, gts, 0, thr, &counts);
    const auto oracle = exhaustive_match(preds, gts, thr);
    ASSERT_EQ(counts, oracle.counts) << "scene " << scene;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const int got = entries[i].ground_truth ? static_cast<int>(*entries[i].ground_truth) : -1;
      ASSERT_EQ(got, oracle.gt_of_pred[i]) << "scene " << scene;
    }
  }
}

TEST(Match, ConservationOnRandomScenes) {
  std::mt19937_64 rng(77);
  for (int scene = 0; scene < 300; ++scene) {
    const std::size_t frames = 1 + rng() % 6;
    PredictionSet preds(frames);
    AnnotationSet gts(frames);
    std::size_t np = 0, ng = 0;
    for (std::size_t f = 0; f < frames; ++f) {
      for (std::size_t i = rng() % 6; i > 0; --i, ++np)
        preds.frames[f].push_back({f, ClassId(rng() % 3), random_box(rng), double(rng() % 100) / 100});
      for (std::size_t i = rng() % 6; i > 0; --i, ++ng)
        gts.frames[f].push_back({f, ClassId(rng() % 3), random_box(rng)});
    }
    const auto m = match_detections(preds, gts, 0.5);
    ASSERT_EQ(m.totals.tp + m.totals.fp, np);
    ASSERT_EQ(m.totals.tp + m.totals.fn, ng);
    ASSERT_EQ(m.entries.size(), np);
  }
}

TEST(PrecisionRecall, Examples) {
  auto pr = precision_recall(MatchCounts{1, 0, 0});
  EXPECT_DOUBLE_EQ(pr.precision, 1.0);
  EXPECT_DOUBLE_EQ(pr.recall, 1.0);
  pr = precision_recall(MatchCounts{0, 9, 1});
  EXPECT_DOUBLE_EQ(pr.precision, 0.0);
  EXPECT_DOUBLE_EQ(pr.recall, 0.0);
  pr = precision_recall(MatchCounts{3, 1, 2});
  EXPECT_DOUBLE_EQ(pr.precision, 0.75);
  EXPECT_DOUBLE_EQ(pr.recall, 0.6);
  pr = precision_recall(MatchCounts{0, 0, 4});
  EXPECT_DOUBLE_EQ(pr.precision, 1.0);  // vacuous
  EXPECT_DOUBLE_EQ(pr.recall, 0.0);
  pr = precision_recall(MatchCounts{0, 2, 0});
  EXPECT_DOUBLE_EQ(pr.recall, 1.0);
}

TEST(AveragePrecision, HandCases) {
  const auto gt = gts_of(1, {{0, 0, {0, 0, 10, 10}}});
  EXPECT_DOUBLE_EQ(average_precision(preds_of(1, {{0, 0, {0, 0, 10, 10}, 0.9}}), gt, 0), 1.0);
  EXPECT_DOUBLE_EQ(average_precision(preds_of(1, {{0, 0, {20, 20, 30, 30}, 0.9},
                                                  {0, 0, {0, 0, 10, 10}, 0.8}}),
                                     gt, 0),
                   0.5);
  EXPECT_DOUBLE_EQ(average_precision(PredictionSet(1), gt, 0), 0.0);
}

TEST(AveragePrecision, EnvelopeAcrossFrames) {
  // Ranked: TP (p=1, r=.5), FP (p=.5), TP (p=2/3, r=1) -> AP = .5*1 + .5*(2/3).
  const auto gt = gts_of(2, {{0, 0, {0, 0, 10, 10}}, {1, 0, {0, 0, 10, 10}}});
  const auto preds = preds_of(2, {{0, 0, {0, 0, 10, 10}, 0.9},
                                  {0, 0, {50, 50, 60, 60}, 0.8},
                                  {1, 0, {0, 0, 10, 10}, 0.7}});
  EXPECT_NEAR(average_precision(preds, gt, 0), 0.5 + 0.5 * 2.0 / 3.0, 1e-12);
}

TEST(AveragePrecision, NoGroundTruthSignalled) {
  EXPECT_EQ(error_code_of([] {
              average_precision(preds_of(1, {{0, 0, {0, 0, 1, 1}, 0.5}}), AnnotationSet(1), 0);
            }),
            Errc::NoGroundTruth);
}

TEST(AveragePrecision, BoundedAndMonotoneUnderFalsePositiveRemoval) {
  std::mt19937_64 rng(55);
  for (int scene = 0; scene < 400; ++scene) {
    const std::size_t frames = 1 + rng() % 5;
    PredictionSet preds(frames);
    AnnotationSet gts(frames);
    for (std::size_t f = 0; f < frames; ++f) {
      for (std::size_t i = rng() % 5; i > 0; --i)
        preds.frames[f].push_back({f, 0, random_box(rng, 8), double(rng() % 1000) / 1000});
      for (std::size_t i = rng() % 4; i > 0; --i) gts.frames[f].push_back({f, 0, random_box(rng, 8)});
    }
    if (gts.total() == 0) continue;
    const double ap = average_precision(preds, gts, 0);
    ASSERT_GE(ap, 0.0);
    ASSERT_LE(ap, 1.0);
    // Drop one false positive that cannot overlap anything.
    PredictionSet with_fp = preds;
    with_fp.frames[0].push_back({0, 0, {500, 500, 510, 510}, double(rng() % 1000) / 1000});
    ASSERT_LE(average_precision(with_fp, gts, 0), ap + 1e-12);
  }
}

TEST(Map50, Examples) {
  EXPECT_DOUBLE_EQ(map50(std::vector<double>{1.0}), 1.0);
  EXPECT_DOUBLE_EQ(map50(std::vector<double>{1.0, 0.0}), 0.5);
  EXPECT_NEAR(map50(std::vector<double>{0.5, 0.725}), 0.6125, 1e-12);
  EXPECT_EQ(error_code_of([] { map50(std::vector<double>{}); }), Errc::NoGroundTruth);
}

TEST(IouCurve, Examples) {
  const auto gts = gts_of(3, {{0, 0, {0, 0, 4, 4}}, {1, 0, {0, 0, 4, 4}}});
  const auto preds = preds_of(3, {{0, 0, {0, 0, 4, 4}, 0.8}, {0, 0, {10, 10, 12, 12}, 0.3}});
  const std::vector<FrameIndex> frames{0, 1, 2};
  const auto curve = per_frame_iou_curve(preds, gts, 0, frames);
  EXPECT_EQ(curve.values, (std::vector<double>{1.0, 0.0, 1.0}));
  EXPECT_EQ(curve.frames, frames);
}

TEST(IouCurve, UsesTopConfidencePrediction) {
  const auto gts = gts_of(1, {{0, 0, {0, 0, 4, 4}}});
  const auto preds = preds_of(1, {{0, 0, {0, 0, 4, 4}, 0.2}, {0, 0, {0, 0, 4, 2}, 0.9}});
  const std::vector<FrameIndex> frames{0};
  EXPECT_DOUBLE_EQ(per_frame_iou_curve(preds, gts, 0, frames).values[0], 0.5);
  // Prediction without ground truth.
  EXPECT_DOUBLE_EQ(per_frame_iou_curve(preds, AnnotationSet(1), 0, frames).values[0], 0.0);
}

TEST(Evaluate, SingleClassMapEqualsAp) {
  std::mt19937_64 rng(66);
  for (int scene = 0; scene < 100; ++scene) {
    PredictionSet preds(3);
    AnnotationSet gts(3);
    for (std::size_t f = 0; f < 3; ++f) {
      gts.frames[f].push_back({f, 2, random_box(rng, 8)});
      for (std::size_t i = rng() % 4; i > 0; --i)
        preds.frames[f].push_back({f, 2, random_box(rng, 8), double(rng() % 100) / 100});
    }
    const auto r = evaluate(preds, gts);
    ASSERT_EQ(r.classes.size(), 1u);
    ASSERT_DOUBLE_EQ(r.map, average_precision(preds, gts, 2));
  }
}

TEST(Evaluate, ConfidenceFloorAndClassWithoutGroundTruth) {
  const auto gts = gts_of(1, {{0, 0, {0, 0, 10, 10}}});
  const auto preds = preds_of(1, {{0, 0, {0, 0, 10, 10}, 0.9},
                                  {0, 0, {20, 20, 30, 30}, 0.05},
                                  {0, 1, {40, 40, 45, 45}, 0.5}});
  const auto r = evaluate(preds, gts, EvalOptions{0.5, 0.1});
  ASSERT_EQ(r.classes.size(), 2u);
  EXPECT_EQ(r.classes[0].counts, (MatchCounts{1, 0, 0}));
  EXPECT_FALSE(r.classes[1].ap.has_value());
  EXPECT_DOUBLE_EQ(r.map, 1.0);
  EXPECT_EQ(r.totals, (MatchCounts{1, 1, 0}));
  EXPECT_DOUBLE_EQ(r.overall.precision, 0.5);
  EXPECT_EQ(error_code_of([&] { evaluate(preds, AnnotationSet(1)); }), Errc::NoGroundTruth);
}

}  // namespace
}  // namespace vidcurate
