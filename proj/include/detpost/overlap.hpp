#ifndef DETPOST_OVERLAP_HPP
#define DETPOST_OVERLAP_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "detpost/geometry.hpp"

namespace detpost {

/// Overlap criterion used for suppression: plain IoU or IoU minus a
/// geometric penalty (center distance, aspect ratio, width/height gaps).
enum class OverlapKind { IoU, DIoU, CIoU, EIoU };

inline const char* to_string(OverlapKind kind) {
    switch (kind) {
        case OverlapKind::IoU: return "iou";
        case OverlapKind::DIoU: return "diou";
        case OverlapKind::CIoU: return "ciou";
        case OverlapKind::EIoU: return "eiou";
    }
    return "?";
}

inline OverlapKind parse_overlap_kind(const std::string& name) {
    if (name == "iou") return OverlapKind::IoU;
    if (name == "diou") return OverlapKind::DIoU;
    if (name == "ciou") return OverlapKind::CIoU;
    if (name == "eiou") return OverlapKind::EIoU;
    throw std::invalid_argument("unknown overlap kind: " + name);
}

/// The three E-IoU penalty terms. All numerators and denominators are
/// squared lengths, so each term is a dimensionless value in [0,1].
struct EiouPenaltyTerms {
    double center = 0.0;
    double width = 0.0;
    double height = 0.0;

    double total() const { return center + width + height; }
};

inline EiouPenaltyTerms eiou_penalty_terms(const Box& a, const Box& b) {
    const Box enc = enclosing_box(a, b);
    const double wc = enc.width();
    const double hc = enc.height();
    const auto [acx, acy] = center(a);
    const auto [bcx, bcy] = center(b);

    EiouPenaltyTerms t;
    const double diag2 = wc * wc + hc * hc;
    if (diag2 > 0.0) {
        const double dx = acx - bcx;
        const double dy = acy - bcy;
        t.center = (dx * dx + dy * dy) / diag2;
    }
    // wc == 0 forces both widths to 0, so the numerator vanishes with it.
    if (wc > 0.0) {
        const double dw = a.width() - b.width();
        t.width = (dw * dw) / (wc * wc);
    }
    if (hc > 0.0) {
        const double dh = a.height() - b.height();
        t.height = (dh * dh) / (hc * hc);
    }
    return t;
}

/// Penalty subtracted from IoU under the E-IoU criterion: squared center
/// distance over the squared enclosing-box diagonal, plus squared width and
/// height differences over the squared enclosing-box sides.
inline double eiou_penalty(const Box& a, const Box& b) {
    return eiou_penalty_terms(a, b).total();
}

/// D-IoU penalty: squared center distance over squared enclosing diagonal.
inline double diou_penalty(const Box& a, const Box& b) {
    const Box enc = enclosing_box(a, b);
    const double wc = enc.width();
    const double hc = enc.height();
    const double diag2 = wc * wc + hc * hc;
    if (diag2 <= 0.0) {
        return 0.0;
    }
    const auto [acx, acy] = center(a);
    const auto [bcx, bcy] = center(b);
    const double dx = acx - bcx;
    const double dy = acy - bcy;
    return (dx * dx + dy * dy) / diag2;
}

/// C-IoU penalty: D-IoU center term plus alpha*v where v measures the
/// arctan aspect-ratio gap and alpha = v / ((1 - IoU) + v).
inline double ciou_penalty(const Box& a, const Box& b, double iou_ab) {
    const double d = diou_penalty(a, b);
    // atan2 keeps degenerate zero-height boxes well defined.
    const double da = std::atan2(a.width(), a.height());
    const double db = std::atan2(b.width(), b.height());
    const double four_over_pi2 = 4.0 / (std::numbers::pi * std::numbers::pi);
    const double v = four_over_pi2 * (da - db) * (da - db);
    if (v <= 0.0) {
        return d;
    }
    const double alpha = v / ((1.0 - iou_ab) + v);
    return d + alpha * v;
}

/// Pairwise overlap criterion: IoU minus the kind's penalty term
/// (zero for plain IoU). Symmetric in its box arguments.
inline double pairwise_overlap(const Box& a, const Box& b, OverlapKind kind) {
    const double i = iou(a, b);
    switch (kind) {
        case OverlapKind::IoU: return i;
        case OverlapKind::DIoU: return i - diou_penalty(a, b);
        case OverlapKind::CIoU: return i - ciou_penalty(a, b, i);
        case OverlapKind::EIoU: return i - eiou_penalty(a, b);
    }
    return i;
}

/// Dense n-by-n criterion matrix; only the strict upper triangle is
/// populated, the diagonal and lower triangle stay zero.
struct OverlapMatrix {
    std::size_t n = 0;
    std::vector<double> values;  // row-major

    double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

/// Computes pairwise_overlap for every i < j. Callers pass boxes already
/// sorted in descending score order; the ordering contract is theirs.
inline OverlapMatrix overlap_matrix(std::span<const Box> boxes, OverlapKind kind) {
    if (boxes.empty()) {
        throw std::invalid_argument("overlap_matrix: no boxes");
    }
    const std::size_t n = boxes.size();
    OverlapMatrix m;
    m.n = n;
    m.values.assign(n * n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double* row = m.values.data() + i * n;
        for (std::size_t j = i + 1; j < n; ++j) {
            row[j] = pairwise_overlap(boxes[i], boxes[j], kind);
        }
    }
    return m;
}

}  // namespace detpost

#endif  // DETPOST_OVERLAP_HPP
