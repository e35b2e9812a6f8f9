#pragma once

#include <cstdint>
#include <vector>

namespace sppkit {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Heading update: circular = atan2 of the weighted unit-vector sum,
// arithmetic = weighted mean of raw angles (no unwrapping across the cut).
enum class HeadingRule { circular, arithmetic };

inline const char* to_string(HeadingRule r) { return r == HeadingRule::circular ? "circular" : "arithmetic"; }

struct SwarmState {
    long t = 0;
    std::vector<Vec2> positions;
    std::vector<double> headings; // each in [-pi, pi)

    std::size_t size() const { return headings.size(); }
};

} // namespace sppkit
