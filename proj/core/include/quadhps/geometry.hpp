#ifndef QUADHPS_GEOMETRY_HPP
#define QUADHPS_GEOMETRY_HPP

#include <cmath>

namespace quadhps {

/// Axis-aligned rectangle in physical coordinates.
struct Rect {
    double x_lo = 0.0;
    double y_lo = 0.0;
    double x_hi = 1.0;
    double y_hi = 1.0;

    double width() const { return x_hi - x_lo; }
    double height() const { return y_hi - y_lo; }

    bool is_square(double rel_tol = 1e-12) const {
        double w = width(), h = height();
        return std::abs(w - h) <= rel_tol * std::max(std::abs(w), std::abs(h));
    }

    bool contains(double x, double y) const {
        return x >= x_lo && x <= x_hi && y >= y_lo && y <= y_hi;
    }
};

} // namespace quadhps

#endif
