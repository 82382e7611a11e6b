#pragma once

#include <algorithm>
#include <cmath>

namespace hoidist {

// Axis-aligned box, center format, coordinates normalized to [0,1].
struct Box {
    double cx = 0, cy = 0, w = 0, h = 0;

    double x1() const { return cx - 0.5 * w; }
    double y1() const { return cy - 0.5 * h; }
    double x2() const { return cx + 0.5 * w; }
    double y2() const { return cy + 0.5 * h; }
    double area() const { return w * h; }
};

inline double iou(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1()));
    const double iy = std::max(0.0, std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1()));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

inline double giou(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1()));
    const double iy = std::max(0.0, std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1()));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    const double ex = std::max(a.x2(), b.x2()) - std::min(a.x1(), b.x1());
    const double ey = std::max(a.y2(), b.y2()) - std::min(a.y1(), b.y1());
    const double enclose = ex * ey;
    const double i = uni > 0.0 ? inter / uni : 0.0;
    return enclose > 0.0 ? i - (enclose - uni) / enclose : i;
}

// Smallest gap between box edges; 0 when they touch or overlap.
inline double box_gap(const Box& a, const Box& b) {
    const double dx = std::max({a.x1() - b.x2(), b.x1() - a.x2(), 0.0});
    const double dy = std::max({a.y1() - b.y2(), b.y1() - a.y2(), 0.0});
    return std::hypot(dx, dy);
}

inline double center_dist(const Box& a, const Box& b) {
    return std::hypot(a.cx - b.cx, a.cy - b.cy);
}

}  // namespace hoidist
