#ifndef DETPOST_ANCHORS_HPP
#define DETPOST_ANCHORS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "detpost/detail/text.hpp"
#include "detpost/geometry.hpp"

namespace detpost {

enum class AnchorMethod { HC, KMeans, KMeansPP };

inline const char* to_string(AnchorMethod m) {
    switch (m) {
        case AnchorMethod::HC: return "hc";
        case AnchorMethod::KMeans: return "kmeans";
        case AnchorMethod::KMeansPP: return "kmeanspp";
    }
    return "?";
}

inline AnchorMethod parse_anchor_method(const std::string& name) {
    if (name == "hc") return AnchorMethod::HC;
    if (name == "kmeans") return AnchorMethod::KMeans;
    if (name == "kmeanspp") return AnchorMethod::KMeansPP;
    throw std::invalid_argument("unknown anchor method: " + name);
}

/// Cluster count used throughout when the caller does not override it.
inline constexpr std::size_t kDefaultAnchorCount = 9;

/// Estimated anchors, sorted by area ascending.
struct AnchorSet {
    std::vector<BoxWH> anchors;
    AnchorMethod method = AnchorMethod::HC;
    std::size_t k = 0;
};

/// One agglomerative merge. Cluster ids follow the usual convention:
/// input points are 0..n-1 and the cluster created by step s gets id n+s.
struct LinkageStep {
    std::size_t left = 0;
    std::size_t right = 0;
    double distance = 0.0;
    std::size_t size = 0;
};

struct FitnessReport {
    double achievable_recall = 0.0;
    std::size_t matched = 0;
    std::size_t total = 0;
    double match_threshold = 0.0;
};

namespace detail {

inline void sort_by_area(std::vector<BoxWH>& anchors) {
    std::stable_sort(anchors.begin(), anchors.end(),
                     [](const BoxWH& a, const BoxWH& b) {
                         if (a.area() != b.area()) return a.area() < b.area();
                         if (a.w != b.w) return a.w < b.w;
                         return a.h < b.h;
                     });
}

inline double sqdist(const BoxWH& a, const BoxWH& b) {
    const double dw = a.w - b.w;
    const double dh = a.h - b.h;
    return dw * dw + dh * dh;
}

/// Candidate merge, ordered by cost with ties broken on the smallest
/// (left,right) cluster-id pair.
struct MergeCandidate {
    double cost = std::numeric_limits<double>::infinity();
    std::size_t left_id = 0;
    std::size_t right_id = 0;
    std::size_t other_slot = 0;

    bool better_than(const MergeCandidate& o) const {
        if (cost != o.cost) return cost < o.cost;
        if (left_id != o.left_id) return left_id < o.left_id;
        return right_id < o.right_id;
    }
};

}  // namespace detail

/// Agglomerative clustering of (w,h) points under Ward's minimum-variance
/// linkage, implemented with the Lance-Williams recurrence on squared
/// Euclidean distances. The dendrogram is flattened by stopping at exactly
/// k clusters; each anchor is the arithmetic mean of its cluster. The full
/// merge sequence is returned alongside for inspection. Deterministic:
/// cost ties break on the smallest (left,right) id pair.
inline std::pair<AnchorSet, std::vector<LinkageStep>> hc_anchors(
    std::span<const BoxWH> boxes, std::size_t k) {
    const std::size_t n = boxes.size();
    if (n == 0) {
        throw std::invalid_argument("hc_anchors: no boxes");
    }
    if (k == 0 || k > n) {
        throw std::invalid_argument("hc_anchors: k must be in [1, boxes.size()]");
    }

    // Condensed squared-distance storage over slot pairs (i < j).
    auto cidx = [n](std::size_t i, std::size_t j) {
        return n * i - i * (i + 1) / 2 + (j - i - 1);
    };
    std::vector<double> d2(n * (n - 1) / 2);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            d2[cidx(i, j)] = detail::sqdist(boxes[i], boxes[j]);
        }
    }
    auto dist = [&](std::size_t a, std::size_t b) -> double& {
        return a < b ? d2[cidx(a, b)] : d2[cidx(b, a)];
    };

    std::vector<char> active(n, 1);
    std::vector<double> size(n, 1.0);
    std::vector<std::size_t> cluster_id(n);
    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) {
        cluster_id[i] = i;
        members[i] = {i};
    }

    auto candidate = [&](std::size_t s, std::size_t o) {
        detail::MergeCandidate c;
        c.cost = dist(s, o);
        c.left_id = std::min(cluster_id[s], cluster_id[o]);
        c.right_id = std::max(cluster_id[s], cluster_id[o]);
        c.other_slot = o;
        return c;
    };
    auto best_partner = [&](std::size_t s) {
        detail::MergeCandidate best;
        for (std::size_t o = 0; o < n; ++o) {
            if (o == s || !active[o]) continue;
            const auto c = candidate(s, o);
            if (c.better_than(best)) best = c;
        }
        return best;
    };

    std::vector<detail::MergeCandidate> nn(n);
    for (std::size_t s = 0; s < n; ++s) {
        nn[s] = best_partner(s);
    }

    std::vector<LinkageStep> steps;
    steps.reserve(n - 1);
    std::size_t active_count = n;
    std::vector<std::vector<std::size_t>> cut;  // the k-cluster partition

    auto snapshot_cut = [&] {
        cut.clear();
        for (std::size_t s = 0; s < n; ++s) {
            if (active[s]) cut.push_back(members[s]);
        }
    };
    if (k == n) {
        snapshot_cut();
    }

    for (std::size_t step = 0; step < n - 1; ++step) {
        detail::MergeCandidate best;
        std::size_t best_slot = 0;
        for (std::size_t s = 0; s < n; ++s) {
            if (!active[s]) continue;
            if (nn[s].better_than(best)) {
                best = nn[s];
                best_slot = s;
            }
        }
        std::size_t a = std::min(best_slot, best.other_slot);
        std::size_t b = std::max(best_slot, best.other_slot);

        steps.push_back({best.left_id, best.right_id, std::sqrt(best.cost),
                         static_cast<std::size_t>(size[a] + size[b])});

        // Lance-Williams Ward update of the merged cluster's distances.
        const double sa = size[a];
        const double sb = size[b];
        const double dab = dist(a, b);
        for (std::size_t c = 0; c < n; ++c) {
            if (!active[c] || c == a || c == b) continue;
            const double sc = size[c];
            dist(a, c) = ((sa + sc) * dist(a, c) + (sb + sc) * dist(b, c) -
                          sc * dab) /
                         (sa + sb + sc);
        }
        active[b] = 0;
        size[a] = sa + sb;
        cluster_id[a] = n + step;
        members[a].insert(members[a].end(), members[b].begin(), members[b].end());
        members[b].clear();
        --active_count;

        // Cached partners stay exact: Ward is reducible, so only entries
        // involving the merged slots change.
        for (std::size_t c = 0; c < n; ++c) {
            if (!active[c] || c == a) continue;
            if (nn[c].other_slot == a || nn[c].other_slot == b) {
                nn[c] = best_partner(c);
            } else {
                const auto cand = candidate(c, a);
                if (cand.better_than(nn[c])) nn[c] = cand;
            }
        }
        if (active_count > 1) {
            nn[a] = best_partner(a);
        }
        if (active_count == k) {
            snapshot_cut();
        }
    }

    AnchorSet set;
    set.method = AnchorMethod::HC;
    set.k = k;
    for (const auto& cluster : cut) {
        double sw = 0.0, sh = 0.0;
        for (std::size_t idx : cluster) {
            sw += boxes[idx].w;
            sh += boxes[idx].h;
        }
        const double cnt = static_cast<double>(cluster.size());
        set.anchors.emplace_back(sw / cnt, sh / cnt);
    }
    detail::sort_by_area(set.anchors);
    return {std::move(set), std::move(steps)};
}

namespace detail {

// rng() % m and explicit bit mapping keep the sampling independent of the
// standard library's distribution implementations.
inline std::size_t rand_index(std::mt19937_64& rng, std::size_t m) {
    return static_cast<std::size_t>(rng() % m);
}

inline double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::vector<BoxWH> kmeans_pp_seed(std::span<const BoxWH> pts,
                                         std::size_t k, std::mt19937_64& rng) {
    std::vector<BoxWH> centers;
    centers.reserve(k);
    centers.push_back(pts[rand_index(rng, pts.size())]);
    std::vector<double> d2(pts.size());
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double best = sqdist(pts[i], centers[0]);
            for (std::size_t c = 1; c < centers.size(); ++c) {
                best = std::min(best, sqdist(pts[i], centers[c]));
            }
            d2[i] = best;
            total += best;
        }
        std::size_t chosen = 0;
        if (total > 0.0) {
            const double target = rand_unit(rng) * total;
            double acc = 0.0;
            chosen = pts.size() - 1;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                acc += d2[i];
                if (acc > target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            // All remaining points coincide with a center already.
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (d2[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        }
        centers.push_back(pts[chosen]);
    }
    return centers;
}

}  // namespace detail

/// Lloyd's iterations on (w,h) points with Euclidean distance, run to an
/// assignment fixed point or 300 iterations. init selects uniform sampling
/// of k distinct points or D-squared (k-means++) seeding; both are fully
/// determined by the seed. An emptied cluster is re-seeded with the point
/// farthest from its assigned centroid.
inline AnchorSet kmeans_anchors(std::span<const BoxWH> boxes, std::size_t k,
                                std::uint64_t seed,
                                AnchorMethod init = AnchorMethod::KMeans) {
    const std::size_t n = boxes.size();
    if (n == 0) {
        throw std::invalid_argument("kmeans_anchors: no boxes");
    }
    if (k == 0 || k > n) {
        throw std::invalid_argument("kmeans_anchors: k must be in [1, boxes.size()]");
    }
    if (init == AnchorMethod::HC) {
        throw std::invalid_argument("kmeans_anchors: init must be kmeans or kmeanspp");
    }

    std::mt19937_64 rng(seed);
    std::vector<BoxWH> centers;
    if (init == AnchorMethod::KMeansPP) {
        centers = detail::kmeans_pp_seed(boxes, k, rng);
    } else {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + detail::rand_index(rng, n - i);
            std::swap(order[i], order[j]);
        }
        centers.reserve(k);
        for (std::size_t i = 0; i < k; ++i) centers.push_back(boxes[order[i]]);
    }

    std::vector<std::size_t> assign(n, 0), prev(n, k);
    for (int iter = 0; iter < 300; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = detail::sqdist(boxes[i], centers[0]);
            for (std::size_t c = 1; c < k; ++c) {
                const double d = detail::sqdist(boxes[i], centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assign[i] = best;
        }
        std::vector<std::size_t> count(k, 0);
        for (std::size_t a : assign) ++count[a];
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] > 0) continue;
            std::size_t far_pt = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (count[assign[i]] <= 1) continue;  // keep donors non-empty
                const double d = detail::sqdist(boxes[i], centers[assign[i]]);
                if (d > far_d) {
                    far_d = d;
                    far_pt = i;
                }
            }
            --count[assign[far_pt]];
            assign[far_pt] = c;
            count[c] = 1;
        }
        if (assign == prev) break;
        prev = assign;
        std::vector<double> sw(k, 0.0), sh(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            sw[assign[i]] += boxes[i].w;
            sh[assign[i]] += boxes[i].h;
        }
        for (std::size_t c = 0; c < k; ++c) {
            centers[c] = BoxWH(sw[c] / static_cast<double>(count[c]),
                               sh[c] / static_cast<double>(count[c]));
        }
    }

    AnchorSet set;
    set.method = init;
    set.k = k;
    set.anchors = std::move(centers);
    detail::sort_by_area(set.anchors);
    return set;
}

/// Shape IoU of two boxes sharing a center: the anchor-fit measure.
inline double shape_iou(const BoxWH& a, const BoxWH& b) {
    const double inter = std::min(a.w, b.w) * std::min(a.h, b.h);
    return inter / (a.area() + b.area() - inter);
}

/// Achievable recall: the fraction of ground-truth shapes whose best
/// co-centered shape IoU over all anchors meets match_threshold. An upper
/// bound on detector recall attributable to the anchor choice.
inline FitnessReport anchor_fitness(const AnchorSet& anchors,
                                    std::span<const BoxWH> gt_boxes,
                                    double match_threshold) {
    if (anchors.anchors.empty()) {
        throw std::invalid_argument("anchor_fitness: empty anchor set");
    }
    if (gt_boxes.empty()) {
        throw std::invalid_argument("anchor_fitness: no ground-truth boxes");
    }
    if (!(match_threshold > 0.0 && match_threshold < 1.0)) {
        throw std::invalid_argument("anchor_fitness: threshold must be in (0,1)");
    }
    FitnessReport report;
    report.total = gt_boxes.size();
    report.match_threshold = match_threshold;
    for (const BoxWH& g : gt_boxes) {
        double best = 0.0;
        for (const BoxWH& a : anchors.anchors) {
            best = std::max(best, shape_iou(g, a));
        }
        if (best >= match_threshold) {
            ++report.matched;
        }
    }
    report.achievable_recall =
        static_cast<double>(report.matched) / static_cast<double>(report.total);
    return report;
}

/// Plain text anchor format: one `w,h` pair per line, area-ascending.
inline void write_anchor_file(const AnchorSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    for (const BoxWH& a : set.anchors) {
        out << detail::format_double(a.w) << ',' << detail::format_double(a.h)
            << '\n';
    }
}

/// Linkage CSV (left,right,distance,size) for external dendrogram plotting.
inline void write_linkage_csv(std::span<const LinkageStep> steps,
                              const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "left,right,distance,size\n";
    for (const LinkageStep& s : steps) {
        out << s.left << ',' << s.right << ','
            << detail::format_double(s.distance) << ',' << s.size << '\n';
    }
}

}  // namespace detpost

#endif  // DETPOST_ANCHORS_HPP
