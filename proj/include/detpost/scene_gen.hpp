#ifndef DETPOST_SCENE_GEN_HPP
#define DETPOST_SCENE_GEN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "detpost/evaluation.hpp"
#include "detpost/geometry.hpp"
#include "detpost/nms.hpp"

namespace detpost {

/// How detection confidences are synthesized: base score, minus a term
/// proportional to the relative jitter magnitude (so worse localization
/// tends to score lower), plus Gaussian noise that weakens the coupling.
struct ScoreModel {
    double base = 0.95;
    double jitter_weight = 0.5;
    double noise_sigma = 0.0;
};

struct SceneSpec {
    std::size_t n_images = 10;
    std::size_t min_boxes = 1;
    std::size_t max_boxes = 8;
    /// Probability that a new ground-truth box is planted overlapping an
    /// existing one instead of in free space (0 → pairwise disjoint).
    double overlap_level = 0.0;
    int class_count = 1;
    double image_w = 640.0;
    double image_h = 640.0;
    double box_min = 20.0;
    double box_max = 120.0;
    /// Gaussian σ, in pixels, applied per detection to the box center and
    /// to each dimension.
    double center_jitter = 0.0;
    double size_jitter = 0.0;
    ScoreModel score;
    /// Detections emitted per ground truth (sampled uniformly in range).
    std::size_t dupes_min = 1;
    std::size_t dupes_max = 1;
    /// Low-score false positives added per image.
    std::size_t spurious_per_image = 0;
    std::uint64_t seed = 0;
};

namespace detail {

/// Uniform in [0,1) from the top 53 bits; the engine is fully specified by
/// the standard, so outputs are identical across toolchains.
inline double rng_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double rng_uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * rng_unit(rng);
}

inline std::size_t rng_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

/// Box–Muller; bounded (|z| ≲ 8.6) because the uniform draw is ≥ 2^-53.
inline double rng_normal(std::mt19937_64& rng, double sigma) {
    const double u1 = rng_unit(rng);
    const double u2 = rng_unit(rng);
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return sigma * r * std::cos(2.0 * 3.141592653589793 * u2);
}

inline void validate_scene_spec(const SceneSpec& spec) {
    if (spec.n_images == 0) throw std::invalid_argument("SceneSpec: n_images must be positive");
    if (spec.min_boxes == 0 || spec.min_boxes > spec.max_boxes) {
        throw std::invalid_argument("SceneSpec: need 0 < min_boxes <= max_boxes");
    }
    if (!(spec.overlap_level >= 0.0 && spec.overlap_level <= 1.0)) {
        throw std::invalid_argument("SceneSpec: overlap_level must be in [0,1]");
    }
    if (spec.class_count < 1) throw std::invalid_argument("SceneSpec: class_count must be positive");
    if (!(spec.image_w > 0.0) || !(spec.image_h > 0.0)) {
        throw std::invalid_argument("SceneSpec: image size must be positive");
    }
    if (!(spec.box_min > 0.0) || spec.box_min > spec.box_max) {
        throw std::invalid_argument("SceneSpec: need 0 < box_min <= box_max");
    }
    if (spec.box_max > spec.image_w || spec.box_max > spec.image_h) {
        throw std::invalid_argument("SceneSpec: box_max exceeds image size");
    }
    if (!(spec.center_jitter >= 0.0) || !(spec.size_jitter >= 0.0)) {
        throw std::invalid_argument("SceneSpec: jitter sigmas must be nonnegative");
    }
    if (!(spec.score.base > 0.0 && spec.score.base <= 1.0)) {
        throw std::invalid_argument("SceneSpec: score base must be in (0,1]");
    }
    if (!(spec.score.jitter_weight >= 0.0) || !(spec.score.noise_sigma >= 0.0)) {
        throw std::invalid_argument("SceneSpec: score model parameters must be nonnegative");
    }
    if (spec.dupes_min > spec.dupes_max) {
        throw std::invalid_argument("SceneSpec: need dupes_min <= dupes_max");
    }
}

}  // namespace detail

/// Seeded synthetic occluded-scene generator: ground truths with controlled
/// pairwise overlap, plus detections derived from them as jittered copies
/// whose scores correlate negatively with jitter magnitude, plus optional
/// spurious low-score false positives. Identical spec (including seed)
/// yields identical output.
inline std::pair<std::vector<GroundTruth>, std::vector<ImageDetection>>
generate_scenes(const SceneSpec& spec) {
    detail::validate_scene_spec(spec);
    std::mt19937_64 rng(spec.seed);
    std::vector<GroundTruth> gts;
    std::vector<ImageDetection> dets;

    for (std::size_t img = 0; img < spec.n_images; ++img) {
        const std::string image_id = "img_" + std::to_string(img);
        const std::size_t n_boxes =
            spec.min_boxes +
            detail::rng_index(rng, spec.max_boxes - spec.min_boxes + 1);
        std::vector<Box> placed;
        std::vector<int> classes;
        for (std::size_t b = 0; b < n_boxes; ++b) {
            const double w = detail::rng_uniform(rng, spec.box_min, spec.box_max);
            const double h = detail::rng_uniform(rng, spec.box_min, spec.box_max);
            const int cls = static_cast<int>(
                detail::rng_index(rng, static_cast<std::size_t>(spec.class_count)));
            const double lo_x = w / 2.0;
            const double hi_x = spec.image_w - w / 2.0;
            const double lo_y = h / 2.0;
            const double hi_y = spec.image_h - h / 2.0;

            double cx = 0.0;
            double cy = 0.0;
            const bool overlapped =
                !placed.empty() && detail::rng_unit(rng) < spec.overlap_level;
            if (overlapped) {
                // Plant near a random partner, offset less than the sum of
                // half-extents so the interiors intersect (modulo clamping
                // at the image border).
                const Box& partner = placed[detail::rng_index(rng, placed.size())];
                const auto [pcx, pcy] = center(partner);
                const double span_x = (w + partner.width()) / 2.0;
                const double span_y = (h + partner.height()) / 2.0;
                cx = std::clamp(pcx + detail::rng_uniform(rng, -0.9, 0.9) * span_x,
                                lo_x, hi_x);
                cy = std::clamp(pcy + detail::rng_uniform(rng, -0.9, 0.9) * span_y,
                                lo_y, hi_y);
            } else {
                // Free-space placement: rejection-sample until disjoint from
                // everything already in the image.
                bool found = false;
                for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
                    cx = detail::rng_uniform(rng, lo_x, hi_x);
                    cy = detail::rng_uniform(rng, lo_y, hi_y);
                    const Box candidate(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0,
                                        cy + h / 2.0);
                    found = std::all_of(placed.begin(), placed.end(),
                                        [&](const Box& p) {
                                            return intersection_area(candidate, p) == 0.0;
                                        });
                }
                if (!found) {
                    throw std::runtime_error(
                        "generate_scenes: no disjoint placement found after 1000 "
                        "attempts; boxes do not fit the image");
                }
            }
            const Box box(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0);
            placed.push_back(box);
            classes.push_back(cls);
            gts.push_back({image_id, box, cls});
        }

        // Detections: jittered copies of each ground truth.
        for (std::size_t b = 0; b < placed.size(); ++b) {
            const Box& g = placed[b];
            const std::size_t n_dup =
                spec.dupes_min +
                detail::rng_index(rng, spec.dupes_max - spec.dupes_min + 1);
            for (std::size_t d = 0; d < n_dup; ++d) {
                const double dx = detail::rng_normal(rng, spec.center_jitter);
                const double dy = detail::rng_normal(rng, spec.center_jitter);
                const double dw = detail::rng_normal(rng, spec.size_jitter);
                const double dh = detail::rng_normal(rng, spec.size_jitter);
                const double w = std::max(1e-3, g.width() + dw);
                const double h = std::max(1e-3, g.height() + dh);
                // Grow/shrink about the center, working from the original
                // corners so zero jitter reproduces the box exactly.
                const double grow_x = (w - g.width()) / 2.0;
                const double grow_y = (h - g.height()) / 2.0;
                const Box jittered(g.x1 + dx - grow_x, g.y1 + dy - grow_y,
                                   g.x2 + dx + grow_x, g.y2 + dy + grow_y);
                const double rel_jitter = (std::abs(dx) + std::abs(dy) +
                                           std::abs(dw) + std::abs(dh)) /
                                          (g.width() + g.height());
                const double score =
                    std::clamp(spec.score.base -
                                   spec.score.jitter_weight * rel_jitter +
                                   detail::rng_normal(rng, spec.score.noise_sigma),
                               0.01, 1.0);
                dets.push_back({image_id, {jittered, classes[b], score}});
            }
        }

        // Spurious low-confidence false positives.
        for (std::size_t s = 0; s < spec.spurious_per_image; ++s) {
            const double w = detail::rng_uniform(rng, spec.box_min, spec.box_max);
            const double h = detail::rng_uniform(rng, spec.box_min, spec.box_max);
            const double cx = detail::rng_uniform(rng, w / 2.0, spec.image_w - w / 2.0);
            const double cy = detail::rng_uniform(rng, h / 2.0, spec.image_h - h / 2.0);
            const int cls = static_cast<int>(
                detail::rng_index(rng, static_cast<std::size_t>(spec.class_count)));
            const double score = detail::rng_uniform(rng, 0.01, 0.3);
            dets.push_back({image_id,
                            {Box(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0,
                                 cy + h / 2.0),
                             cls, score}});
        }
    }
    return {std::move(gts), std::move(dets)};
}

}  // namespace detpost

#endif  // DETPOST_SCENE_GEN_HPP
