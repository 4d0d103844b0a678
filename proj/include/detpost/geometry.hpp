#ifndef DETPOST_GEOMETRY_HPP
#define DETPOST_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace detpost {

/// Axis-aligned box in corner format: (x1,y1) top-left, (x2,y2) bottom-right,
/// real-valued pixel coordinates. Degenerate zero-area boxes are allowed,
/// negative extents are rejected at construction.
struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    Box() = default;

    Box(double x1_, double y1_, double x2_, double y2_)
        : x1(x1_), y1(y1_), x2(x2_), y2(y2_) {
        if (!(std::isfinite(x1) && std::isfinite(y1) &&
              std::isfinite(x2) && std::isfinite(y2))) {
            throw std::invalid_argument("Box: coordinates must be finite");
        }
        if (x2 < x1 || y2 < y1) {
            throw std::invalid_argument("Box: negative extent");
        }
    }

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }

    bool operator==(const Box&) const = default;
};

/// Box dimensions only, the unit clustered for anchor estimation.
/// Width and height are strictly positive.
struct BoxWH {
    double w = 1.0;
    double h = 1.0;

    BoxWH() = default;

    BoxWH(double w_, double h_) : w(w_), h(h_) {
        if (!(std::isfinite(w) && std::isfinite(h)) || w <= 0.0 || h <= 0.0) {
            throw std::invalid_argument("BoxWH: dimensions must be finite and positive");
        }
    }

    double area() const { return w * h; }

    bool operator==(const BoxWH&) const = default;
};

inline double area(const Box& b) {
    return (b.x2 - b.x1) * (b.y2 - b.y1);
}

inline double intersection_area(const Box& a, const Box& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    return iw * ih;
}

/// Intersection over union. Two zero-area boxes have IoU 0 by convention.
inline double iou(const Box& a, const Box& b) {
    const double inter = intersection_area(a, b);
    const double uni = area(a) + area(b) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

/// Smallest box containing both inputs.
inline Box enclosing_box(const Box& a, const Box& b) {
    return Box(std::min(a.x1, b.x1), std::min(a.y1, b.y1),
               std::max(a.x2, b.x2), std::max(a.y2, b.y2));
}

inline std::pair<double, double> center(const Box& b) {
    return {(b.x1 + b.x2) * 0.5, (b.y1 + b.y2) * 0.5};
}

}  // namespace detpost

#endif  // DETPOST_GEOMETRY_HPP
