#pragma once

#include <cstddef>
#include <vector>

namespace delaykit {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Convex hull by Graham scan: pivot at the lowest point, angular sort,
/// left-turn filtering. Returns hull vertices in counter-clockwise order;
/// collinear sets degenerate to a 2-point (or smaller) hull.
std::vector<Point2> graham_hull(std::vector<Point2> points);

/// Shoelace polygon area (absolute value) for vertices in ring order.
double polygon_area(const std::vector<Point2>& ring);

/// Signed shoelace area; positive for counter-clockwise rings.
double polygon_area_signed(const std::vector<Point2>& ring);

/// Area of the convex hull of a point set.
double convex_hull_area(const std::vector<Point2>& points);

}  // namespace delaykit
