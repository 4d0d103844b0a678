#ifndef DETPOST_EVALUATION_HPP
#define DETPOST_EVALUATION_HPP

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "detpost/geometry.hpp"
#include "detpost/nms.hpp"

namespace detpost {

struct GroundTruth {
    std::string image_id;
    Box box;
    int class_id = 0;
};

/// A detection tagged with the image it belongs to; the record type that
/// flows between files, NMS batches and the evaluator.
struct ImageDetection {
    std::string image_id;
    Detection det;
};

/// TP/FP verdict for one detection, emitted in descending score order.
struct DetectionMatch {
    std::size_t det_index = 0;
    bool is_tp = false;
};

/// Greedy prediction-to-ground-truth matching, per image and class:
/// detections in descending score order claim the unclaimed ground truth
/// with the highest IoU at or above the threshold. Each ground truth is
/// claimable once; unclaimed detections are false positives.
inline std::vector<DetectionMatch> match_detections(
    std::span<const ImageDetection> dets, std::span<const GroundTruth> gts,
    double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        throw std::invalid_argument("match_detections: threshold must be in (0,1]");
    }
    std::map<std::pair<std::string, int>, std::vector<std::size_t>> gt_index;
    for (std::size_t g = 0; g < gts.size(); ++g) {
        gt_index[{gts[g].image_id, gts[g].class_id}].push_back(g);
    }
    std::vector<char> claimed(gts.size(), 0);

    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].det.score > dets[b].det.score;
    });

    std::vector<DetectionMatch> matches;
    matches.reserve(dets.size());
    for (std::size_t idx : order) {
        const ImageDetection& d = dets[idx];
        bool tp = false;
        auto it = gt_index.find({d.image_id, d.det.class_id});
        if (it != gt_index.end()) {
            double best_iou = 0.0;
            std::size_t best_g = gts.size();
            for (std::size_t g : it->second) {
                if (claimed[g]) continue;
                const double v = iou(d.det.box, gts[g].box);
                if (v >= iou_threshold && v > best_iou) {
                    best_iou = v;
                    best_g = g;
                }
            }
            if (best_g < gts.size()) {
                claimed[best_g] = 1;
                tp = true;
            }
        }
        matches.push_back({idx, tp});
    }
    return matches;
}

/// Precision = TP/(TP+FP), Recall = TP/(TP+FN); zero denominators yield 0.
inline std::pair<double, double> precision_recall(std::size_t tp, std::size_t fp,
                                                  std::size_t fn) {
    const double p = (tp + fp) > 0
                         ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                         : 0.0;
    const double r = (tp + fn) > 0
                         ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                         : 0.0;
    return {p, r};
}

struct PRCurve {
    /// (recall, precision) per score cutoff, recall non-decreasing.
    std::vector<std::pair<double, double>> points;
    int class_id = 0;
    double iou_threshold = 0.5;
};

/// One detection's score and verdict, the raw material for a PR curve.
struct ScoredFlag {
    double score = 0.0;
    bool is_tp = false;
};

/// Accumulates (recall, precision) over descending-score prefixes.
inline PRCurve make_pr_curve(std::vector<ScoredFlag> flags, std::size_t n_gt,
                             int class_id, double iou_threshold) {
    std::stable_sort(flags.begin(), flags.end(),
                     [](const ScoredFlag& a, const ScoredFlag& b) {
                         return a.score > b.score;
                     });
    PRCurve curve;
    curve.class_id = class_id;
    curve.iou_threshold = iou_threshold;
    curve.points.reserve(flags.size());
    std::size_t tp = 0;
    for (std::size_t k = 0; k < flags.size(); ++k) {
        if (flags[k].is_tp) ++tp;
        const double recall =
            n_gt > 0 ? static_cast<double>(tp) / static_cast<double>(n_gt) : 0.0;
        const double precision =
            static_cast<double>(tp) / static_cast<double>(k + 1);
        curve.points.emplace_back(recall, precision);
    }
    return curve;
}

namespace detail {

/// Precision envelope: suffix maximum, so env[i] is the best precision at
/// any recall >= points[i].recall.
inline std::vector<double> precision_envelope(const PRCurve& curve) {
    std::vector<double> env(curve.points.size());
    double running = 0.0;
    for (std::size_t i = curve.points.size(); i-- > 0;) {
        running = std::max(running, curve.points[i].second);
        env[i] = running;
    }
    return env;
}

}  // namespace detail

/// 101-point interpolated average precision: the precision envelope
/// sampled at recall 0, 0.01, ..., 1.00 and averaged.
inline double average_precision(const PRCurve& curve) {
    if (curve.points.empty()) {
        return 0.0;
    }
    const std::vector<double> env = detail::precision_envelope(curve);
    double sum = 0.0;
    std::size_t i = 0;
    for (int s = 0; s <= 100; ++s) {
        const double r = static_cast<double>(s) / 100.0;
        while (i < curve.points.size() && curve.points[i].first < r) {
            ++i;
        }
        if (i < curve.points.size()) {
            sum += env[i];
        }
    }
    return sum / 101.0;
}

/// Exact area under the precision envelope over every score cutoff; the
/// un-sampled counterpart of average_precision.
inline double average_precision_exact(const PRCurve& curve) {
    if (curve.points.empty()) {
        return 0.0;
    }
    const std::vector<double> env = detail::precision_envelope(curve);
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        ap += (curve.points[i].first - prev_recall) * env[i];
        prev_recall = curve.points[i].first;
    }
    return ap;
}

struct ClassMetrics {
    double ap50 = 0.0;
    double ap50_95 = 0.0;
    /// Precision and recall at the per-class score cutoff maximizing F1,
    /// evaluated at the lowest requested IoU threshold.
    double precision = 0.0;
    double recall = 0.0;
};

struct EvalReport {
    std::map<int, ClassMetrics> per_class;
    double map50 = 0.0;
    double map50_95 = 0.0;
};

/// The standard threshold sweep 0.50, 0.55, ..., 0.95.
inline std::vector<double> coco_iou_thresholds() {
    std::vector<double> t;
    for (int i = 0; i < 10; ++i) {
        t.push_back(0.5 + 0.05 * static_cast<double>(i));
    }
    return t;
}

/// Full evaluation: per-class AP at each requested IoU threshold. ap50 is
/// the AP at the lowest threshold, ap50_95 the mean over all of them, so
/// the standard sweep yields the usual mAP@0.5 and mAP@0.5:0.95. Classes
/// present in the ground truth but never detected score 0 and still count
/// in the means.
inline EvalReport evaluate(std::span<const ImageDetection> dets,
                           std::span<const GroundTruth> gts,
                           std::vector<double> iou_thresholds) {
    if (gts.empty()) {
        throw std::invalid_argument("evaluate: no ground truths");
    }
    if (iou_thresholds.empty()) {
        throw std::invalid_argument("evaluate: no IoU thresholds");
    }
    for (double t : iou_thresholds) {
        if (!(t > 0.0 && t <= 1.0)) {
            throw std::invalid_argument("evaluate: thresholds must be in (0,1]");
        }
    }
    std::sort(iou_thresholds.begin(), iou_thresholds.end());
    iou_thresholds.erase(
        std::unique(iou_thresholds.begin(), iou_thresholds.end()),
        iou_thresholds.end());

    std::map<int, std::size_t> gt_count;
    for (const GroundTruth& g : gts) {
        ++gt_count[g.class_id];
    }

    EvalReport report;
    std::map<int, double> ap_sum;
    for (std::size_t ti = 0; ti < iou_thresholds.size(); ++ti) {
        const double tau = iou_thresholds[ti];
        const std::vector<DetectionMatch> matches =
            match_detections(dets, gts, tau);
        std::map<int, std::vector<ScoredFlag>> per_class_flags;
        for (const DetectionMatch& m : matches) {
            const Detection& d = dets[m.det_index].det;
            per_class_flags[d.class_id].push_back({d.score, m.is_tp});
        }
        for (const auto& [cls, n_gt] : gt_count) {
            std::vector<ScoredFlag> flags;
            if (auto it = per_class_flags.find(cls); it != per_class_flags.end()) {
                flags = it->second;
            }
            const PRCurve curve = make_pr_curve(std::move(flags), n_gt, cls, tau);
            const double ap = average_precision(curve);
            ap_sum[cls] += ap;
            if (ti == 0) {
                ClassMetrics& cm = report.per_class[cls];
                cm.ap50 = ap;
                // F1-maximizing operating point along the curve.
                std::size_t best_k = curve.points.size();
                double best_f1 = -1.0;
                for (std::size_t kk = 0; kk < curve.points.size(); ++kk) {
                    const auto [r, p] = curve.points[kk];
                    const double f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
                    if (f1 > best_f1) {
                        best_f1 = f1;
                        best_k = kk;
                    }
                }
                if (best_k < curve.points.size()) {
                    cm.recall = curve.points[best_k].first;
                    cm.precision = curve.points[best_k].second;
                }
            }
        }
    }

    const double n_thresholds = static_cast<double>(iou_thresholds.size());
    for (auto& [cls, cm] : report.per_class) {
        cm.ap50_95 = ap_sum[cls] / n_thresholds;
        report.map50 += cm.ap50;
        report.map50_95 += cm.ap50_95;
    }
    const double n_classes = static_cast<double>(report.per_class.size());
    report.map50 /= n_classes;
    report.map50_95 /= n_classes;
    return report;
}

/// Per-class PR curves at one IoU threshold, for CSV export.
inline std::map<int, PRCurve> pr_curves(std::span<const ImageDetection> dets,
                                        std::span<const GroundTruth> gts,
                                        double iou_threshold) {
    std::map<int, std::size_t> gt_count;
    for (const GroundTruth& g : gts) {
        ++gt_count[g.class_id];
    }
    const std::vector<DetectionMatch> matches =
        match_detections(dets, gts, iou_threshold);
    std::map<int, std::vector<ScoredFlag>> per_class_flags;
    for (const DetectionMatch& m : matches) {
        const Detection& d = dets[m.det_index].det;
        per_class_flags[d.class_id].push_back({d.score, m.is_tp});
    }
    std::map<int, PRCurve> curves;
    for (const auto& [cls, n_gt] : gt_count) {
        std::vector<ScoredFlag> flags;
        if (auto it = per_class_flags.find(cls); it != per_class_flags.end()) {
            flags = it->second;
        }
        curves[cls] = make_pr_curve(std::move(flags), n_gt, cls, iou_threshold);
    }
    return curves;
}

}  // namespace detpost

#endif  // DETPOST_EVALUATION_HPP
