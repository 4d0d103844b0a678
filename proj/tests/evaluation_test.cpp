#include "detpost/evaluation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "detpost/scene_gen.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using detpost::Box;
using detpost::Detection;
using detpost::DetectionMatch;
using detpost::EvalReport;
using detpost::GroundTruth;
using detpost::ImageDetection;
using detpost::PRCurve;
using detpost::ScoredFlag;

namespace {

ImageDetection idet(const std::string& image, const Box& box, double score,
                    int class_id = 0) {
    return ImageDetection{image, Detection{box, class_id, score}};
}

GroundTruth gt(const std::string& image, const Box& box, int class_id = 0) {
    return GroundTruth{image, box, class_id};
}

PRCurve curve_of(std::vector<ScoredFlag> flags, std::size_t n_gt) {
    return detpost::make_pr_curve(std::move(flags), n_gt, 0, 0.5);
}

/// A moderately messy scene: overlaps, duplicate detections, jitter and
/// spurious false positives across several classes.
detpost::SceneSpec messy_spec(std::uint64_t seed) {
    detpost::SceneSpec spec;
    spec.n_images = 6;
    spec.min_boxes = 2;
    spec.max_boxes = 6;
    spec.overlap_level = 0.3;
    spec.class_count = 3;
    spec.center_jitter = 2.0;
    spec.size_jitter = 2.0;
    spec.score.noise_sigma = 0.05;
    spec.dupes_min = 1;
    spec.dupes_max = 3;
    spec.spurious_per_image = 2;
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST(MatchDetectionsTest, ExactHitIsTruePositive) {
    const std::vector<GroundTruth> gts{gt("a", Box(0, 0, 10, 10))};
    const std::vector<ImageDetection> dets{idet("a", Box(0, 0, 10, 10), 0.9)};
    const auto matches = detpost::match_detections(dets, gts, 0.5);
    ASSERT_EQ(matches.size(), 1u);
    EXPECT_EQ(matches[0].det_index, 0u);
    EXPECT_TRUE(matches[0].is_tp);
}

TEST(MatchDetectionsTest, NoEligibleGroundTruthIsFalsePositive) {
    const std::vector<GroundTruth> gts{gt("a", Box(0, 0, 10, 10), 1)};
    const std::vector<ImageDetection> wrong_image{
        idet("b", Box(0, 0, 10, 10), 0.9, 1)};
    const std::vector<ImageDetection> wrong_class{
        idet("a", Box(0, 0, 10, 10), 0.9, 2)};
    EXPECT_FALSE(detpost::match_detections(wrong_image, gts, 0.5)[0].is_tp);
    EXPECT_FALSE(detpost::match_detections(wrong_class, gts, 0.5)[0].is_tp);
}

TEST(MatchDetectionsTest, GroundTruthClaimedOnlyOnce) {
    const std::vector<GroundTruth> gts{gt("a", Box(0, 0, 10, 10))};
    const std::vector<ImageDetection> dets{
        idet("a", Box(0, 0, 10, 10), 0.9),
        idet("a", Box(0, 0, 10, 10), 0.8),
    };
    const auto matches = detpost::match_detections(dets, gts, 0.5);
    ASSERT_EQ(matches.size(), 2u);
    // Verdicts come back in descending score order.
    EXPECT_EQ(matches[0].det_index, 0u);
    EXPECT_TRUE(matches[0].is_tp);
    EXPECT_EQ(matches[1].det_index, 1u);
    EXPECT_FALSE(matches[1].is_tp);
}

TEST(MatchDetectionsTest, HigherScoreClaimsItsBestOverlapFirst) {
    // Each detection prefers a different ground truth, so greedy claiming
    // by best IoU leaves both matched.
    const std::vector<GroundTruth> gts{gt("a", Box(0, 0, 10, 10)),
                                       gt("a", Box(0, 0, 10, 12))};
    const std::vector<ImageDetection> dets{
        idet("a", Box(0, 0, 10, 10), 0.9),
        idet("a", Box(0, 0, 10, 12), 0.8),
    };
    const auto matches = detpost::match_detections(dets, gts, 0.5);
    EXPECT_TRUE(matches[0].is_tp);
    EXPECT_TRUE(matches[1].is_tp);
}

TEST(MatchDetectionsTest, ThresholdIsInclusive) {
    // IoU of these boxes is exactly 1/3.
    const std::vector<GroundTruth> gts{gt("a", Box(0, 0, 2, 2))};
    const std::vector<ImageDetection> dets{idet("a", Box(1, 0, 3, 2), 0.9)};
    EXPECT_TRUE(detpost::match_detections(dets, gts, 1.0 / 3.0)[0].is_tp);
    EXPECT_FALSE(
        detpost::match_detections(dets, gts, 1.0 / 3.0 + 1e-9)[0].is_tp);
}

TEST(MatchDetectionsTest, ValidatesThreshold) {
    const std::vector<GroundTruth> gts{gt("a", Box(0, 0, 2, 2))};
    const std::vector<ImageDetection> dets{idet("a", Box(0, 0, 2, 2), 0.9)};
    EXPECT_THROW(detpost::match_detections(dets, gts, 0.0),
                 std::invalid_argument);
    EXPECT_THROW(detpost::match_detections(dets, gts, 1.5),
                 std::invalid_argument);
    EXPECT_NO_THROW(detpost::match_detections(dets, gts, 1.0));
}

TEST(PrecisionRecallTest, HandValues) {
    EXPECT_EQ(detpost::precision_recall(10, 0, 0), std::make_pair(1.0, 1.0));
    EXPECT_EQ(detpost::precision_recall(0, 5, 5), std::make_pair(0.0, 0.0));
    EXPECT_EQ(detpost::precision_recall(3, 1, 2), std::make_pair(0.75, 0.6));
    EXPECT_EQ(detpost::precision_recall(0, 0, 0), std::make_pair(0.0, 0.0));
}

TEST(AveragePrecisionTest, PerfectDetectorScoresOne) {
    const PRCurve curve = curve_of({{0.9, true}}, 1);
    EXPECT_DOUBLE_EQ(detpost::average_precision(curve), 1.0);
    EXPECT_DOUBLE_EQ(detpost::average_precision_exact(curve), 1.0);
}

TEST(AveragePrecisionTest, NoTruePositivesScoresZero) {
    const PRCurve curve = curve_of({{0.9, false}, {0.8, false}}, 3);
    EXPECT_DOUBLE_EQ(detpost::average_precision(curve), 0.0);
    EXPECT_DOUBLE_EQ(detpost::average_precision_exact(curve), 0.0);
}

TEST(AveragePrecisionTest, TrailingFalsePositiveBelowFullRecallIsFree) {
    // One ground truth, hit at score 0.9; the 0.8 false positive sits past
    // full recall and the envelope ignores it.
    const PRCurve curve = curve_of({{0.9, true}, {0.8, false}}, 1);
    EXPECT_DOUBLE_EQ(detpost::average_precision(curve), 1.0);
    EXPECT_DOUBLE_EQ(detpost::average_precision_exact(curve), 1.0);
}

TEST(AveragePrecisionTest, EmptyCurveScoresZero) {
    EXPECT_DOUBLE_EQ(detpost::average_precision(PRCurve{}), 0.0);
    EXPECT_DOUBLE_EQ(detpost::average_precision_exact(PRCurve{}), 0.0);
}

TEST(AveragePrecisionTest, SampledAgreesWithExhaustiveOracle) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + rng() % 50;
        std::vector<ScoredFlag> flags;
        std::vector<oracles::ScoredVerdict> verdicts;
        std::size_t tp = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double score = testutil::uniform(rng, 0.01, 1.0);
            const bool is_tp = (rng() % 3) != 0;
            tp += is_tp ? 1 : 0;
            flags.push_back({score, is_tp});
            verdicts.push_back({score, is_tp});
        }
        const std::size_t n_gt = tp + rng() % 5;
        if (n_gt == 0) continue;
        const PRCurve curve = curve_of(flags, n_gt);
        const double oracle = oracles::ap_exhaustive(verdicts, n_gt);
        EXPECT_NEAR(detpost::average_precision(curve), oracle, 0.01);
        EXPECT_NEAR(detpost::average_precision_exact(curve), oracle, 1e-12);
    }
}

TEST(PrCurveTest, RecallNonDecreasingAndPrecisionInRange) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 30;
        std::vector<ScoredFlag> flags;
        std::size_t tp = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool is_tp = (rng() % 2) != 0;
            tp += is_tp ? 1 : 0;
            flags.push_back({testutil::uniform(rng, 0.01, 1.0), is_tp});
        }
        const PRCurve curve = curve_of(flags, tp + 1);
        ASSERT_EQ(curve.points.size(), n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto [r, p] = curve.points[i];
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
            EXPECT_GE(r, 0.0);
            EXPECT_LE(r, 1.0);
            if (i > 0) EXPECT_GE(r, curve.points[i - 1].first);
        }
    }
}

TEST(EvaluateTest, PerfectDetectionsScoreOneEverywhere) {
    detpost::SceneSpec spec;
    spec.n_images = 5;
    spec.max_boxes = 6;
    spec.class_count = 2;
    spec.seed = 33;
    const auto [gts, dets] = detpost::generate_scenes(spec);
    const EvalReport report =
        detpost::evaluate(dets, gts, detpost::coco_iou_thresholds());
    EXPECT_DOUBLE_EQ(report.map50, 1.0);
    EXPECT_DOUBLE_EQ(report.map50_95, 1.0);
    for (const auto& [cls, cm] : report.per_class) {
        EXPECT_DOUBLE_EQ(cm.ap50, 1.0);
        EXPECT_DOUBLE_EQ(cm.ap50_95, 1.0);
        EXPECT_DOUBLE_EQ(cm.precision, 1.0);
        EXPECT_DOUBLE_EQ(cm.recall, 1.0);
    }
}

TEST(EvaluateTest, NoDetectionsScoreZero) {
    const std::vector<GroundTruth> gts{gt("a", Box(0, 0, 10, 10), 1),
                                       gt("a", Box(20, 20, 30, 30), 2)};
    const EvalReport report = detpost::evaluate({}, gts, {0.5, 0.75});
    EXPECT_DOUBLE_EQ(report.map50, 0.0);
    EXPECT_DOUBLE_EQ(report.map50_95, 0.0);
    ASSERT_EQ(report.per_class.size(), 2u);
    for (const auto& [cls, cm] : report.per_class) {
        EXPECT_DOUBLE_EQ(cm.ap50, 0.0);
        EXPECT_DOUBLE_EQ(cm.precision, 0.0);
        EXPECT_DOUBLE_EQ(cm.recall, 0.0);
    }
}

TEST(EvaluateTest, ValidatesArguments) {
    const std::vector<GroundTruth> gts{gt("a", Box(0, 0, 10, 10))};
    const std::vector<ImageDetection> dets{idet("a", Box(0, 0, 10, 10), 0.9)};
    EXPECT_THROW(detpost::evaluate(dets, {}, {0.5}), std::invalid_argument);
    EXPECT_THROW(detpost::evaluate(dets, gts, {}), std::invalid_argument);
    EXPECT_THROW(detpost::evaluate(dets, gts, {0.0}), std::invalid_argument);
    EXPECT_THROW(detpost::evaluate(dets, gts, {0.5, 1.2}),
                 std::invalid_argument);
}

TEST(EvaluateTest, ThresholdListIsSortedAndDeduplicated) {
    const auto [gts, dets] = detpost::generate_scenes(messy_spec(34));
    const EvalReport a = detpost::evaluate(dets, gts, {0.9, 0.5, 0.5, 0.7});
    const EvalReport b = detpost::evaluate(dets, gts, {0.5, 0.7, 0.9});
    EXPECT_DOUBLE_EQ(a.map50, b.map50);
    EXPECT_DOUBLE_EQ(a.map50_95, b.map50_95);
    // ap50 is the AP at the lowest requested threshold.
    const EvalReport only_half = detpost::evaluate(dets, gts, {0.5});
    for (const auto& [cls, cm] : a.per_class) {
        EXPECT_DOUBLE_EQ(cm.ap50, only_half.per_class.at(cls).ap50);
    }
}

TEST(EvaluateTest, InvariantUnderMonotoneScoreRescale) {
    const auto [gts, dets] = detpost::generate_scenes(messy_spec(35));
    std::vector<ImageDetection> rescaled = dets;
    for (ImageDetection& d : rescaled) {
        d.det.score *= 0.25;  // exact in binary floating point
    }
    const EvalReport a = detpost::evaluate(dets, gts, detpost::coco_iou_thresholds());
    const EvalReport b =
        detpost::evaluate(rescaled, gts, detpost::coco_iou_thresholds());
    EXPECT_DOUBLE_EQ(a.map50, b.map50);
    EXPECT_DOUBLE_EQ(a.map50_95, b.map50_95);
    for (const auto& [cls, cm] : a.per_class) {
        EXPECT_DOUBLE_EQ(cm.ap50, b.per_class.at(cls).ap50);
        EXPECT_DOUBLE_EQ(cm.ap50_95, b.per_class.at(cls).ap50_95);
        EXPECT_DOUBLE_EQ(cm.precision, b.per_class.at(cls).precision);
        EXPECT_DOUBLE_EQ(cm.recall, b.per_class.at(cls).recall);
    }
}

TEST(EvaluateTest, GuaranteedFalsePositiveNeverRaisesAp) {
    for (std::uint64_t seed = 40; seed < 50; ++seed) {
        const auto [gts, dets] = detpost::generate_scenes(messy_spec(seed));
        std::vector<ImageDetection> extended = dets;
        // Far outside every generated box, below every generated score: a
        // certain false positive for its class at any threshold.
        extended.push_back(idet(gts[0].image_id, Box(5000, 5000, 5010, 5010),
                                0.005, gts[0].class_id));
        const EvalReport before =
            detpost::evaluate(dets, gts, detpost::coco_iou_thresholds());
        const EvalReport after =
            detpost::evaluate(extended, gts, detpost::coco_iou_thresholds());
        EXPECT_LE(after.map50, before.map50 + 1e-12);
        EXPECT_LE(after.map50_95, before.map50_95 + 1e-12);
        for (const auto& [cls, cm] : before.per_class) {
            EXPECT_LE(after.per_class.at(cls).ap50, cm.ap50 + 1e-12);
        }
    }
}

TEST(EvaluateTest, ApNeverIncreasesWithStricterIou) {
    for (std::uint64_t seed = 50; seed < 60; ++seed) {
        const auto [gts, dets] = detpost::generate_scenes(messy_spec(seed));
        double prev_map = 1.0;
        for (double tau : {0.5, 0.6, 0.7, 0.8, 0.9}) {
            const EvalReport r = detpost::evaluate(dets, gts, {tau});
            EXPECT_LE(r.map50, prev_map + 1e-12);
            prev_map = r.map50;
        }
    }
}

TEST(EvaluateTest, MapsAreMeansOfPerClassMetrics) {
    const auto [gts, dets] = detpost::generate_scenes(messy_spec(36));
    const EvalReport r = detpost::evaluate(dets, gts, detpost::coco_iou_thresholds());
    double sum50 = 0.0, sum5095 = 0.0;
    for (const auto& [cls, cm] : r.per_class) {
        sum50 += cm.ap50;
        sum5095 += cm.ap50_95;
    }
    const double n = static_cast<double>(r.per_class.size());
    EXPECT_DOUBLE_EQ(r.map50, sum50 / n);
    EXPECT_DOUBLE_EQ(r.map50_95, sum5095 / n);
}

TEST(EvaluateTest, F1OperatingPointHandInstance) {
    // Two ground truths, one hit and one false positive: best F1 sits at
    // the first cutoff with precision 1 and recall 1/2.
    const std::vector<GroundTruth> gts{gt("a", Box(0, 0, 10, 10)),
                                       gt("a", Box(100, 100, 110, 110))};
    const std::vector<ImageDetection> dets{
        idet("a", Box(0, 0, 10, 10), 0.9),
        idet("a", Box(200, 200, 210, 210), 0.8),
    };
    const EvalReport r = detpost::evaluate(dets, gts, {0.5});
    const detpost::ClassMetrics& cm = r.per_class.at(0);
    EXPECT_DOUBLE_EQ(cm.precision, 1.0);
    EXPECT_DOUBLE_EQ(cm.recall, 0.5);
}

TEST(PrCurvesExportTest, OneCurvePerGroundTruthClass) {
    const auto [gts, dets] = detpost::generate_scenes(messy_spec(37));
    const auto curves = detpost::pr_curves(dets, gts, 0.5);

    std::map<int, std::size_t> gt_count, det_count;
    for (const GroundTruth& g : gts) ++gt_count[g.class_id];
    for (const ImageDetection& d : dets) ++det_count[d.det.class_id];

    ASSERT_EQ(curves.size(), gt_count.size());
    for (const auto& [cls, curve] : curves) {
        EXPECT_TRUE(gt_count.count(cls));
        EXPECT_EQ(curve.class_id, cls);
        EXPECT_DOUBLE_EQ(curve.iou_threshold, 0.5);
        EXPECT_EQ(curve.points.size(), det_count[cls]);
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            EXPECT_GE(curve.points[i].first, curve.points[i - 1].first);
        }
        if (!curve.points.empty()) {
            EXPECT_LE(curve.points.back().first, 1.0);
        }
    }
}
