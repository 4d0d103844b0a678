// Independent reference implementations used as oracles by the test
// suites. Each is written the straightforward, unoptimized way — set-based
// suppression, recomputing cluster costs from raw members, enumerating
// every score cutoff — so that agreement with the library is evidence
// rather than tautology.

#ifndef DETPOST_TESTS_ORACLES_HPP
#define DETPOST_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "detpost/anchors.hpp"
#include "detpost/geometry.hpp"
#include "detpost/nms.hpp"

namespace oracles {

// ---------------------------------------------------------------------
// Greedy NMS, transcribed as literal set manipulation: repeatedly move the
// highest-scoring remaining box to the kept set and erase every remaining
// box whose IoU with it exceeds the threshold.
// ---------------------------------------------------------------------
inline std::vector<std::size_t> greedy_keep_reference(
    const std::vector<detpost::Detection>& dets, double theta) {
    std::vector<std::size_t> remaining(dets.size());
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    std::vector<std::size_t> kept;
    while (!remaining.empty()) {
        std::size_t best_pos = 0;
        for (std::size_t p = 1; p < remaining.size(); ++p) {
            if (dets[remaining[p]].score > dets[remaining[best_pos]].score) {
                best_pos = p;
            }
        }
        const std::size_t m = remaining[best_pos];
        kept.push_back(m);
        remaining.erase(remaining.begin() +
                        static_cast<std::ptrdiff_t>(best_pos));
        std::vector<std::size_t> survivors;
        for (std::size_t idx : remaining) {
            if (!(detpost::iou(dets[m].box, dets[idx].box) > theta)) {
                survivors.push_back(idx);
            }
        }
        remaining = std::move(survivors);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

// ---------------------------------------------------------------------
// Scalar overlap references computed directly from the definitions, with
// no shared code or guard structure with the library.
// ---------------------------------------------------------------------
inline double iou_reference(const detpost::Box& a, const detpost::Box& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    const double inter = iw * ih;
    const double area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
    const double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
    return inter / (area_a + area_b - inter);
}

struct EiouReference {
    double center_term;
    double width_term;
    double height_term;
    double penalty;    // sum of the three terms
    double criterion;  // iou - penalty
};

inline EiouReference eiou_reference(const detpost::Box& a, const detpost::Box& b) {
    const double wc = std::max(a.x2, b.x2) - std::min(a.x1, b.x1);
    const double hc = std::max(a.y2, b.y2) - std::min(a.y1, b.y1);
    const double acx = (a.x1 + a.x2) / 2.0;
    const double acy = (a.y1 + a.y2) / 2.0;
    const double bcx = (b.x1 + b.x2) / 2.0;
    const double bcy = (b.y1 + b.y2) / 2.0;
    const double rho2 = (acx - bcx) * (acx - bcx) + (acy - bcy) * (acy - bcy);
    const double dw = (a.x2 - a.x1) - (b.x2 - b.x1);
    const double dh = (a.y2 - a.y1) - (b.y2 - b.y1);
    EiouReference r{};
    r.center_term = rho2 / (wc * wc + hc * hc);
    r.width_term = (dw * dw) / (wc * wc);
    r.height_term = (dh * dh) / (hc * hc);
    r.penalty = r.center_term + r.width_term + r.height_term;
    r.criterion = iou_reference(a, b) - r.penalty;
    return r;
}

inline double diou_reference(const detpost::Box& a, const detpost::Box& b) {
    const double wc = std::max(a.x2, b.x2) - std::min(a.x1, b.x1);
    const double hc = std::max(a.y2, b.y2) - std::min(a.y1, b.y1);
    const double acx = (a.x1 + a.x2) / 2.0;
    const double acy = (a.y1 + a.y2) / 2.0;
    const double bcx = (b.x1 + b.x2) / 2.0;
    const double bcy = (b.y1 + b.y2) / 2.0;
    const double rho2 = (acx - bcx) * (acx - bcx) + (acy - bcy) * (acy - bcy);
    return iou_reference(a, b) - rho2 / (wc * wc + hc * hc);
}

inline double ciou_reference(const detpost::Box& a, const detpost::Box& b) {
    const double iou_ab = iou_reference(a, b);
    const double d = diou_reference(a, b);
    const double pi = 3.14159265358979323846;
    const double da = std::atan((a.x2 - a.x1) / (a.y2 - a.y1));
    const double db = std::atan((b.x2 - b.x1) / (b.y2 - b.y1));
    const double v = 4.0 / (pi * pi) * (da - db) * (da - db);
    if (v <= 0.0) {
        return d;
    }
    const double alpha = v / ((1.0 - iou_ab) + v);
    return d - alpha * v;
}

// ---------------------------------------------------------------------
// Naive O(n^3) agglomerative Ward clustering: clusters carry their member
// point indices, every pairwise cost is recomputed from the raw members at
// every step, and the merge cost is the textbook
//   d(A,B) = sqrt( 2|A||B|/(|A|+|B|) * ||mean(A) - mean(B)||^2 ).
// Ties break on the smallest (left id, right id) pair, ids assigned as in
// the library: points 0..n-1, merge s creates id n+s.
// ---------------------------------------------------------------------
struct NaiveWardResult {
    std::vector<detpost::LinkageStep> steps;
    // Member point indices per cluster at the k-cut, each sorted, the list
    // sorted lexicographically for canonical comparison.
    std::vector<std::vector<std::size_t>> partition;
    // Mean (w,h) per partition cluster, aligned with `partition`.
    std::vector<detpost::BoxWH> means;
};

inline NaiveWardResult naive_ward(const std::vector<detpost::BoxWH>& pts,
                                  std::size_t k) {
    struct Cluster {
        std::size_t id;
        std::vector<std::size_t> members;
    };
    const std::size_t n = pts.size();
    std::vector<Cluster> clusters(n);
    for (std::size_t i = 0; i < n; ++i) {
        clusters[i] = {i, {i}};
    }
    auto mean_of = [&](const Cluster& c) {
        double w = 0.0;
        double h = 0.0;
        for (std::size_t m : c.members) {
            w += pts[m].w;
            h += pts[m].h;
        }
        const double sz = static_cast<double>(c.members.size());
        return std::pair<double, double>{w / sz, h / sz};
    };
    auto cost = [&](const Cluster& a, const Cluster& b) {
        const auto [aw, ah] = mean_of(a);
        const auto [bw, bh] = mean_of(b);
        const double na = static_cast<double>(a.members.size());
        const double nb = static_cast<double>(b.members.size());
        const double d2 = (aw - bw) * (aw - bw) + (ah - bh) * (ah - bh);
        return 2.0 * na * nb / (na + nb) * d2;
    };

    NaiveWardResult out;
    auto snapshot = [&] {
        out.partition.clear();
        out.means.clear();
        std::vector<std::vector<std::size_t>> part;
        for (const Cluster& c : clusters) {
            std::vector<std::size_t> members = c.members;
            std::sort(members.begin(), members.end());
            part.push_back(std::move(members));
        }
        std::sort(part.begin(), part.end());
        for (const auto& members : part) {
            Cluster tmp{0, members};
            const auto [w, h] = mean_of(tmp);
            out.means.push_back(detpost::BoxWH(w, h));
        }
        out.partition = std::move(part);
    };

    if (clusters.size() == k) {
        snapshot();
    }
    std::size_t next_id = n;
    while (clusters.size() > 1) {
        std::size_t best_a = 0;
        std::size_t best_b = 1;
        double best_cost = std::numeric_limits<double>::infinity();
        std::size_t best_left = 0;
        std::size_t best_right = 0;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                const double c = cost(clusters[i], clusters[j]);
                const std::size_t left = std::min(clusters[i].id, clusters[j].id);
                const std::size_t right = std::max(clusters[i].id, clusters[j].id);
                const bool better =
                    c < best_cost ||
                    (c == best_cost &&
                     (left < best_left ||
                      (left == best_left && right < best_right)));
                if (better) {
                    best_cost = c;
                    best_a = i;
                    best_b = j;
                    best_left = left;
                    best_right = right;
                }
            }
        }
        Cluster merged;
        merged.id = next_id++;
        merged.members = clusters[best_a].members;
        merged.members.insert(merged.members.end(),
                              clusters[best_b].members.begin(),
                              clusters[best_b].members.end());
        out.steps.push_back({best_left, best_right, std::sqrt(best_cost),
                             merged.members.size()});
        // Erase the higher position first so the lower stays valid.
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_b));
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_a));
        clusters.push_back(std::move(merged));
        if (clusters.size() == k) {
            snapshot();
        }
    }
    return out;
}

// ---------------------------------------------------------------------
// Exhaustive all-cutoffs AP: walk every prefix of the descending-score
// detection list, form the precision envelope, and integrate it exactly
// over recall.
// ---------------------------------------------------------------------
struct ScoredVerdict {
    double score;
    bool is_tp;
};

inline double ap_exhaustive(std::vector<ScoredVerdict> flags, std::size_t n_gt) {
    if (flags.empty() || n_gt == 0) {
        return 0.0;
    }
    std::stable_sort(flags.begin(), flags.end(),
                     [](const ScoredVerdict& a, const ScoredVerdict& b) {
                         return a.score > b.score;
                     });
    std::vector<double> recall;
    std::vector<double> precision;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (flags[i].is_tp) {
            ++tp;
        }
        recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
        precision.push_back(static_cast<double>(tp) /
                            static_cast<double>(i + 1));
    }
    std::vector<double> envelope(precision.size());
    double running = 0.0;
    for (std::size_t i = precision.size(); i-- > 0;) {
        running = std::max(running, precision[i]);
        envelope[i] = running;
    }
    double ap = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < recall.size(); ++i) {
        ap += (recall[i] - prev) * envelope[i];
        prev = recall[i];
    }
    return ap;
}

}  // namespace oracles

#endif  // DETPOST_TESTS_ORACLES_HPP
