#ifndef DETPOST_NMS_HPP
#define DETPOST_NMS_HPP

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "detpost/geometry.hpp"
#include "detpost/overlap.hpp"

namespace detpost {

/// One candidate RoI: box, class label and confidence score in [0,1].
struct Detection {
    Box box;
    int class_id = 0;
    double score = 0.0;
};

enum class NmsVariant { Greedy, Cluster, WeightedCluster };

inline const char* to_string(NmsVariant v) {
    switch (v) {
        case NmsVariant::Greedy: return "greedy";
        case NmsVariant::Cluster: return "cluster";
        case NmsVariant::WeightedCluster: return "wcluster";
    }
    return "?";
}

inline NmsVariant parse_nms_variant(const std::string& name) {
    if (name == "greedy") return NmsVariant::Greedy;
    if (name == "cluster") return NmsVariant::Cluster;
    if (name == "wcluster") return NmsVariant::WeightedCluster;
    throw std::invalid_argument("unknown nms variant: " + name);
}

struct NmsConfig {
    OverlapKind kind = OverlapKind::IoU;
    double threshold_eps = 0.5;
    /// Iteration bound T for the cluster variants; 0 selects the safe
    /// default of one iteration per box.
    std::size_t max_iters = 0;
    bool class_agnostic = false;
    /// Detections scoring below this are dropped before suppression.
    double score_floor = 0.001;
};

struct NmsResult {
    /// Survivors in descending score order. The weighted variant reports
    /// merged coordinates here; the others keep the originals.
    std::vector<Detection> kept;
    /// Indices into the score-sorted (and score_floor-filtered) input,
    /// strictly increasing.
    std::vector<std::size_t> kept_indices;
    /// Fixed-point iteration count for the cluster variants, 0 for greedy.
    std::size_t iterations_used = 0;
    /// False when a cluster variant hit max_iters before its fixed point.
    bool converged = true;
};

namespace detail {

/// Stable sort by descending score after dropping sub-floor detections.
/// Ties keep input order so results are deterministic.
inline std::vector<Detection> sort_and_filter(std::span<const Detection> dets,
                                              double score_floor) {
    std::vector<Detection> out;
    out.reserve(dets.size());
    for (const Detection& d : dets) {
        if (d.score >= score_floor) {
            out.push_back(d);
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Detection& a, const Detection& b) {
                         return a.score > b.score;
                     });
    return out;
}

/// Partition of sorted-detection indices by class (or one group when
/// class-agnostic), groups ordered by first appearance.
inline std::vector<std::vector<std::size_t>> class_groups(
    const std::vector<Detection>& sorted, bool class_agnostic) {
    std::vector<std::vector<std::size_t>> groups;
    if (class_agnostic) {
        groups.emplace_back(sorted.size());
        std::iota(groups.back().begin(), groups.back().end(), std::size_t{0});
        return groups;
    }
    std::vector<int> group_class;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const int c = sorted[i].class_id;
        auto it = std::find(group_class.begin(), group_class.end(), c);
        if (it == group_class.end()) {
            group_class.push_back(c);
            groups.emplace_back();
            groups.back().push_back(i);
        } else {
            groups[static_cast<std::size_t>(it - group_class.begin())].push_back(i);
        }
    }
    return groups;
}

struct ClusterPass {
    std::vector<char> keep;
    std::size_t iterations = 0;
    bool converged = true;
};

/// Matrix-form suppression loop: starting from an all-ones keep vector,
/// mask the criterion matrix rows by the previous keep vector, take the
/// column maximum, and keep a box while that maximum stays below eps.
/// Stops at the fixed point or after max_iters iterations.
inline ClusterPass cluster_iterate(const OverlapMatrix& x, double eps,
                                   std::size_t max_iters) {
    const std::size_t m = x.n;
    ClusterPass pass;
    pass.keep.assign(m, 1);
    std::vector<char> next(m, 1);
    std::vector<double> g(m);
    const std::size_t bound = max_iters > 0 ? max_iters : m;

    for (std::size_t t = 1; t <= bound; ++t) {
        // Column max over rows of diag(keep) * X. Masked and lower-triangle
        // entries are zero, so the max never drops below zero even for
        // penalized criteria.
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            if (!pass.keep[i]) continue;
            const double* row = x.values.data() + i * m;
            for (std::size_t j = i + 1; j < m; ++j) {
                if (row[j] > g[j]) g[j] = row[j];
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            next[j] = g[j] < eps ? 1 : 0;
        }
        pass.iterations = t;
        if (next == pass.keep) {
            return pass;
        }
        pass.keep = next;
    }
    pass.converged = false;
    return pass;
}

}  // namespace detail

/// Classical greedy suppression: repeatedly keep the highest-scoring
/// remaining box and drop every remaining box whose IoU with it exceeds
/// threshold_eps. Plain IoU regardless of cfg.kind. Runs per class unless
/// cfg.class_agnostic is set.
inline NmsResult greedy_nms(std::span<const Detection> dets, const NmsConfig& cfg) {
    NmsResult result;
    const std::vector<Detection> sorted =
        detail::sort_and_filter(dets, cfg.score_floor);
    if (sorted.empty()) {
        return result;
    }
    std::vector<char> suppressed(sorted.size(), 0);
    for (const auto& group : detail::class_groups(sorted, cfg.class_agnostic)) {
        for (std::size_t a = 0; a < group.size(); ++a) {
            const std::size_t i = group[a];
            if (suppressed[i]) continue;
            for (std::size_t b = a + 1; b < group.size(); ++b) {
                const std::size_t j = group[b];
                if (suppressed[j]) continue;
                if (iou(sorted[i].box, sorted[j].box) > cfg.threshold_eps) {
                    suppressed[j] = 1;
                }
            }
        }
    }
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!suppressed[i]) {
            result.kept_indices.push_back(i);
            result.kept.push_back(sorted[i]);
        }
    }
    return result;
}

namespace detail {

/// Shared driver for the cluster variants. When `weighted` is set, each
/// kept box's coordinates become the score-and-overlap weighted average of
/// itself and the boxes it suppressed.
inline NmsResult cluster_nms_impl(std::span<const Detection> dets,
                                  const NmsConfig& cfg, bool weighted) {
    NmsResult result;
    std::vector<Detection> sorted = sort_and_filter(dets, cfg.score_floor);
    if (sorted.empty()) {
        return result;
    }
    const double eps = cfg.threshold_eps;
    std::vector<char> keep_global(sorted.size(), 0);

    for (const auto& group : class_groups(sorted, cfg.class_agnostic)) {
        const std::size_t m = group.size();
        std::vector<Box> boxes;
        boxes.reserve(m);
        for (std::size_t idx : group) {
            boxes.push_back(sorted[idx].box);
        }
        const OverlapMatrix x = overlap_matrix(boxes, cfg.kind);
        const ClusterPass pass = cluster_iterate(x, eps, cfg.max_iters);
        result.iterations_used = std::max(result.iterations_used, pass.iterations);
        result.converged = result.converged && pass.converged;

        if (weighted) {
            for (std::size_t a = 0; a < m; ++a) {
                if (!pass.keep[a]) continue;
                const Detection& self = sorted[group[a]];
                if (self.score <= 0.0) continue;
                // Row a of the converged masked matrix: entries at or above
                // eps belong to boxes this one suppressed. Weights stay
                // positive so the merge is a convex combination.
                double wsum = self.score;
                double cx1 = self.score * self.box.x1;
                double cy1 = self.score * self.box.y1;
                double cx2 = self.score * self.box.x2;
                double cy2 = self.score * self.box.y2;
                for (std::size_t b = a + 1; b < m; ++b) {
                    const double c = x.at(a, b);
                    if (c < eps || c <= 0.0) continue;
                    const Detection& other = sorted[group[b]];
                    const double w = c * other.score;
                    wsum += w;
                    cx1 += w * other.box.x1;
                    cy1 += w * other.box.y1;
                    cx2 += w * other.box.x2;
                    cy2 += w * other.box.y2;
                }
                sorted[group[a]].box =
                    Box(cx1 / wsum, cy1 / wsum, cx2 / wsum, cy2 / wsum);
            }
        }
        for (std::size_t a = 0; a < m; ++a) {
            if (pass.keep[a]) {
                keep_global[group[a]] = 1;
            }
        }
    }
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (keep_global[i]) {
            result.kept_indices.push_back(i);
            result.kept.push_back(sorted[i]);
        }
    }
    return result;
}

}  // namespace detail

/// Matrix-form cluster suppression with the configured overlap criterion.
/// Under plain IoU the kept set coincides with greedy_nms.
inline NmsResult cluster_nms(std::span<const Detection> dets, const NmsConfig& cfg) {
    return detail::cluster_nms_impl(dets, cfg, /*weighted=*/false);
}

/// Cluster suppression followed by weighted coordinate merging: each kept
/// box is replaced by the normalized weighted sum of its own corners
/// (weight = own score) and the corners of every box it suppressed
/// (weight = criterion value times that box's score). Scores are unchanged.
inline NmsResult weighted_cluster_nms(std::span<const Detection> dets,
                                      const NmsConfig& cfg) {
    return detail::cluster_nms_impl(dets, cfg, /*weighted=*/true);
}

inline NmsResult run_nms(std::span<const Detection> dets, const NmsConfig& cfg,
                         NmsVariant variant) {
    switch (variant) {
        case NmsVariant::Greedy: return greedy_nms(dets, cfg);
        case NmsVariant::Cluster: return cluster_nms(dets, cfg);
        case NmsVariant::WeightedCluster: return weighted_cluster_nms(dets, cfg);
    }
    throw std::invalid_argument("run_nms: bad variant");
}

using ImageDetections = std::pair<std::string, std::vector<Detection>>;
using ImageNmsResult = std::pair<std::string, NmsResult>;

/// Applies the selected variant independently per image. Output order
/// matches input order; `jobs` threads may process images concurrently and
/// the result is identical regardless of scheduling.
inline std::vector<ImageNmsResult> batched_nms(
    std::span<const ImageDetections> per_image, const NmsConfig& cfg,
    NmsVariant variant, std::size_t jobs = 1) {
    std::vector<ImageNmsResult> out(per_image.size());
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                out[i] = {per_image[i].first,
                          run_nms(per_image[i].second, cfg, variant)};
            } catch (const std::exception& e) {
                throw std::runtime_error("image " + per_image[i].first + ": " +
                                         e.what());
            }
        }
    };
    if (jobs <= 1 || per_image.size() < 2) {
        worker(0, per_image.size());
        return out;
    }
    const std::size_t n_threads = std::min(jobs, per_image.size());
    const std::size_t chunk = (per_image.size() + n_threads - 1) / n_threads;
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(begin + chunk, per_image.size());
        threads.emplace_back([&, t, begin, end] {
            try {
                worker(begin, end);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return out;
}

}  // namespace detpost

#endif  // DETPOST_NMS_HPP
