#include "rbox/eval.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using rbox::Detection;
using rbox::EvalBox;
using rbox::EvalConfig;
using rbox::MatchLabel;
using rbox::Metric;
using rbox::Obb;

namespace {

std::vector<std::pair<double, MatchLabel>> ranked(std::initializer_list<MatchLabel> labels) {
  std::vector<std::pair<double, MatchLabel>> out;
  double score = 1.0;
  for (MatchLabel label : labels) {
    out.emplace_back(score, label);
    score -= 0.01;
  }
  return out;
}

}  // namespace

TEST(MatchDetections, ExactHitIsTruePositive) {
  const Obb o(50, 50, 20, 10, 0.4);
  const auto labels = rbox::match_detections({{o, 0, 0.9}}, {{o, false}}, {});
  ASSERT_EQ(labels.size(), 1u);
  EXPECT_EQ(labels[0], MatchLabel::kTruePositive);
}

TEST(MatchDetections, SecondHitOnSameTruthIsFalsePositive) {
  const Obb o(50, 50, 20, 10, 0.4);
  const std::vector<Detection> dets{{o, 0, 0.8}, {o, 0, 0.9}};
  const auto labels = rbox::match_detections(dets, {{o, false}}, {});
  EXPECT_EQ(labels[1], MatchLabel::kTruePositive);   // higher score matched first
  EXPECT_EQ(labels[0], MatchLabel::kFalsePositive);
}

TEST(MatchDetections, NearThresholdPairSplitsOnIou) {
  // two unit-height slabs sharing 45% of their area
  const Obb gt(0, 0, 10, 10, 0);
  const Obb det_box(5.5, 0, 10, 10, 0);  // IoU = 4.5 / 15.5 ~ 0.29
  EXPECT_LT(rbox::polygon_iou(rbox::obb_corners(det_box), rbox::obb_corners(gt)), 0.5);
  const auto labels = rbox::match_detections({{det_box, 0, 0.9}}, {{gt, false}}, {});
  EXPECT_EQ(labels[0], MatchLabel::kFalsePositive);
  // nudge inside the threshold
  const Obb close_box(3.0, 0, 10, 10, 0);  // IoU = 7 / 13 ~ 0.54
  const auto close_labels = rbox::match_detections({{close_box, 0, 0.9}}, {{gt, false}}, {});
  EXPECT_EQ(close_labels[0], MatchLabel::kTruePositive);
}

TEST(MatchDetections, DifficultTruthsAbsorbWithoutCounting) {
  const Obb o(50, 50, 20, 10, 0.4);
  EvalConfig cfg;
  const auto labels = rbox::match_detections({{o, 0, 0.9}, {o, 0, 0.8}}, {{o, true}}, cfg);
  EXPECT_EQ(labels[0], MatchLabel::kIgnored);
  EXPECT_EQ(labels[1], MatchLabel::kIgnored);  // difficult truths are never used up
  cfg.skip_difficult = false;
  const auto counted = rbox::match_detections({{o, 0, 0.9}, {o, 0, 0.8}}, {{o, true}}, cfg);
  EXPECT_EQ(counted[0], MatchLabel::kTruePositive);
  EXPECT_EQ(counted[1], MatchLabel::kFalsePositive);
}

TEST(AveragePrecision, TrivialCases) {
  EXPECT_DOUBLE_EQ(rbox::average_precision(ranked({MatchLabel::kTruePositive}), 1, Metric::kVoc07), 1.0);
  EXPECT_DOUBLE_EQ(rbox::average_precision(ranked({MatchLabel::kTruePositive}), 1, Metric::kVoc12), 1.0);
  EXPECT_DOUBLE_EQ(rbox::average_precision(ranked({MatchLabel::kFalsePositive}), 1, Metric::kVoc07), 0.0);
  EXPECT_DOUBLE_EQ(rbox::average_precision(ranked({MatchLabel::kFalsePositive}), 1, Metric::kVoc12), 0.0);
  EXPECT_DOUBLE_EQ(rbox::average_precision({}, 0, Metric::kVoc12), 0.0);
}

TEST(AveragePrecision, HandComputedFixture) {
  const auto labels = ranked(
      {MatchLabel::kTruePositive, MatchLabel::kFalsePositive, MatchLabel::kTruePositive});
  // VOC12: 0.5 * 1 + 0.5 * 2/3
  EXPECT_NEAR(rbox::average_precision(labels, 2, Metric::kVoc12), 5.0 / 6.0, 1e-12);
  // VOC07: recalls {0,...,0.5} see precision 1, {0.6,...,1.0} see 2/3
  EXPECT_NEAR(rbox::average_precision(labels, 2, Metric::kVoc07), 28.0 / 33.0, 1e-12);
}

TEST(AveragePrecision, IgnoredEntriesLeaveTheCurveUntouched) {
  const auto with_ignored =
      ranked({MatchLabel::kTruePositive, MatchLabel::kIgnored, MatchLabel::kFalsePositive,
              MatchLabel::kTruePositive});
  const auto without = ranked(
      {MatchLabel::kTruePositive, MatchLabel::kFalsePositive, MatchLabel::kTruePositive});
  EXPECT_DOUBLE_EQ(rbox::average_precision(with_ignored, 2, Metric::kVoc12),
                   average_precision(without, 2, Metric::kVoc12));
}

TEST(AveragePrecision, TopRankedHitNeverHurts) {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<double, MatchLabel>> labels;
    int tp = 0;
    for (int i = 0; i < 12; ++i) {
      const bool hit = coin(rng) == 1;
      tp += hit;
      labels.emplace_back(0.9 - 0.01 * i,
                          hit ? MatchLabel::kTruePositive : MatchLabel::kFalsePositive);
    }
    const int n_pos = tp + 3;  // leave some truths unmatched
    for (Metric metric : {Metric::kVoc07, Metric::kVoc12}) {
      const double before = average_precision(labels, n_pos, metric);
      auto improved = labels;
      improved.emplace_back(0.99, MatchLabel::kTruePositive);
      const double after = average_precision(improved, n_pos, metric);
      EXPECT_GE(after, before - 1e-12);
    }
  }
}

TEST(AveragePrecision, TrailingFalsePositiveKeepsVoc07Value) {
  std::mt19937_64 rng(62);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<double, MatchLabel>> labels;
    int tp = 0;
    for (int i = 0; i < 10; ++i) {
      const bool hit = coin(rng) == 1;
      tp += hit;
      labels.emplace_back(0.9 - 0.01 * i,
                          hit ? MatchLabel::kTruePositive : MatchLabel::kFalsePositive);
    }
    if (tp == 0) continue;
    const double before = average_precision(labels, tp, Metric::kVoc07);
    auto extended = labels;
    extended.emplace_back(0.01, MatchLabel::kFalsePositive);
    EXPECT_DOUBLE_EQ(rbox::average_precision(extended, tp, Metric::kVoc07), before);
  }
}

TEST(AveragePrecision, Voc12IsAreaUnderMonotonizedCurve) {
  // when precision is already nonincreasing the envelope changes nothing:
  // [TP, TP, FP] has precisions 1, 1, 2/3
  const auto labels = ranked(
      {MatchLabel::kTruePositive, MatchLabel::kTruePositive, MatchLabel::kFalsePositive});
  EXPECT_NEAR(rbox::average_precision(labels, 2, Metric::kVoc12), 1.0, 1e-12);
}

TEST(MeanAp, BasicArithmetic) {
  EXPECT_DOUBLE_EQ(rbox::mean_ap({0.8}), 0.8);
  EXPECT_DOUBLE_EQ(rbox::mean_ap({1.0, 0.0}), 0.5);
  EXPECT_THROW(rbox::mean_ap({}), std::invalid_argument);
  std::vector<double> aps;
  double sum = 0.0;
  for (int i = 0; i < 15; ++i) {
    aps.push_back(0.05 * i);
    sum += 0.05 * i;
  }
  EXPECT_NEAR(rbox::mean_ap(aps), sum / 15.0, 1e-15);
}

TEST(EvaluateDataset, PerfectReplayScoresOne) {
  std::mt19937_64 rng(63);
  for (int scene = 0; scene < 5; ++scene) {
    std::map<std::string, rbox::ImageEvalInput> images;
    const std::vector<std::string> classes{"plane", "ship", "vehicle"};
    for (int img = 0; img < 3; ++img) {
      rbox::ImageEvalInput input;
      const int n = 4 + img;
      for (int i = 0; i < n; ++i) {
        const Obb o = oracle::random_obb(rng, 50.0, 950.0, 8.0, 90.0);
        const int cls = (i + img) % 3;
        input.ground_truths.push_back({cls, {o, false}});
        input.detections.push_back({o, cls, 1.0});
      }
      images["img" + std::to_string(img)] = input;
    }
    for (Metric metric : {Metric::kVoc07, Metric::kVoc12}) {
      EvalConfig cfg;
      cfg.metric = metric;
      const rbox::DatasetEval result = rbox::evaluate_dataset(images, classes, cfg);
      EXPECT_DOUBLE_EQ(result.map, 1.0) << "scene " << scene;
    }
  }
}

TEST(EvaluateDataset, EmptyClassesExcludedFromMeanByDefault) {
  std::map<std::string, rbox::ImageEvalInput> images;
  const Obb o(100, 100, 30, 12, 0.3);
  images["img0"].ground_truths.push_back({0, {o, false}});
  images["img0"].detections.push_back({o, 0, 1.0});
  const std::vector<std::string> classes{"ship", "never-seen"};
  const rbox::DatasetEval by_default = rbox::evaluate_dataset(images, classes, {});
  EXPECT_DOUBLE_EQ(by_default.map, 1.0);
  const rbox::DatasetEval included = rbox::evaluate_dataset(images, classes, {}, true);
  EXPECT_DOUBLE_EQ(included.map, 0.5);
}
