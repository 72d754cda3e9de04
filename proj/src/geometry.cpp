#include "delaykit/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace delaykit {

namespace {

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double dist2(const Point2& a, const Point2& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

}  // namespace

std::vector<Point2> graham_hull(std::vector<Point2> pts) {
    if (pts.size() < 3) return pts;

    auto lowest = std::min_element(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.y < b.y || (a.y == b.y && a.x < b.x);
    });
    std::swap(*pts.begin(), *lowest);
    const Point2 pivot = pts[0];

    std::sort(pts.begin() + 1, pts.end(), [&](const Point2& a, const Point2& b) {
        const double c = cross(pivot, a, b);
        if (c != 0.0) return c > 0.0;
        return dist2(pivot, a) < dist2(pivot, b);
    });

    std::vector<Point2> hull;
    hull.reserve(pts.size());
    for (const Point2& p : pts) {
        while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0.0)
            hull.pop_back();
        hull.push_back(p);
    }
    return hull;
}

double polygon_area_signed(const std::vector<Point2>& ring) {
    if (ring.size() < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Point2& a = ring[i];
        const Point2& b = ring[(i + 1) % ring.size()];
        acc += a.x * b.y - b.x * a.y;
    }
    return 0.5 * acc;
}

double polygon_area(const std::vector<Point2>& ring) {
    return std::abs(polygon_area_signed(ring));
}

double convex_hull_area(const std::vector<Point2>& points) {
    return polygon_area(graham_hull(points));
}

}  // namespace delaykit
