#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace sppkit {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Wrap an angle into [-pi, pi). remainder() lands in [-pi, pi]; the single
// shift keeps the half-open convention (pi maps to -pi) without drift.
inline double wrap_heading(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("wrap_heading: non-finite angle");
    double r = std::remainder(x, two_pi);
    if (r >= pi) r -= two_pi;
    return r;
}

// Signed circular difference a - b, in [-pi, pi).
inline double circular_diff(double a, double b) { return wrap_heading(a - b); }

// Offset of x past lo going counterclockwise, in [0, 2pi).
inline double ccw_offset(double x, double lo) {
    double off = std::fmod(x - lo, two_pi);
    if (off < 0) off += two_pi;
    if (off >= two_pi) off = 0;
    return off;
}

inline bool on_circular_arc(double x, double lo, double arc_len) { return ccw_offset(x, lo) <= arc_len; }

struct CircularCover {
    double length; // shortest arc length covering all points, in [0, 2pi)
    double start;  // arc is [start, start + length] counterclockwise
    double midpoint() const { return wrap_heading(start + 0.5 * length); }
};

// Shortest covering arc by the sorted-gap method: the cover is 2pi minus the
// largest circular gap between consecutive points.
inline CircularCover circular_cover(std::span<const double> angles) {
    if (angles.empty()) throw std::invalid_argument("circular_cover: empty input");
    std::vector<double> a(angles.begin(), angles.end());
    for (double& x : a) x = wrap_heading(x);
    std::sort(a.begin(), a.end());
    const std::size_t n = a.size();
    double best_gap = two_pi - a[n - 1] + a[0]; // wrap gap
    std::size_t after = 0;                      // index of the point that ends the largest gap
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double g = a[k + 1] - a[k];
        if (g > best_gap) {
            best_gap = g;
            after = k + 1;
        }
    }
    return {two_pi - best_gap, a[after]};
}

} // namespace sppkit
