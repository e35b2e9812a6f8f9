#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "angles.hpp"
#include "errors.hpp"
#include "noise.hpp"
#include "rng.hpp"
#include "state.hpp"

namespace sppkit {

struct Boundary {
    enum class Kind { open, periodic };
    Kind kind = Kind::open;
    double side = 0.0; // box side length when periodic

    static Boundary open() { return {}; }
    static Boundary periodic(double side) {
        if (!(side > 0)) throw ConfigError("boundary: periodic side length must be > 0");
        Boundary b;
        b.kind = Kind::periodic;
        b.side = side;
        return b;
    }
    bool is_periodic() const { return kind == Kind::periodic; }
};

// Interaction weight f_ij evaluated for receiver i and source j. Rules must
// keep f_ii > 0 and return 0 past the receiver's radius (probe_weight_rule
// spot-checks both). An empty rule means indicator weights.
using WeightRule = std::function<double(const SwarmState&, std::size_t i, std::size_t j, double dist, double radius_i)>;

enum class NeighborSearch { naive, grid };

struct SimConfig {
    std::size_t n = 0;
    double speed = 0.0;
    std::vector<double> radii; // per-agent interaction radius
    Boundary boundary;
    WeightRule weight_rule; // empty => indicator
    NoiseSpec noise = NoiseSpec::uniform(0.6);
    NeighborSearch search = NeighborSearch::naive;
    std::uint64_t seed = 0;

    double r_max() const { return radii.empty() ? 0.0 : *std::max_element(radii.begin(), radii.end()); }

    void validate() const {
        if (n < 2) throw ConfigError("config: n must be >= 2");
        if (!(speed > 0)) throw ConfigError("config: speed must be > 0");
        if (radii.size() != n) throw ConfigError("config: radii size must equal n");
        for (double r : radii)
            if (!(r >= 0)) throw ConfigError("config: radii must be >= 0");
        if (boundary.is_periodic() && !(boundary.side > 0)) throw ConfigError("config: periodic side must be > 0");
        noise.validate();
    }
};

inline SimConfig make_config(std::size_t n, double speed, double radius, Boundary boundary,
                             NoiseSpec noise = NoiseSpec::uniform(0.6), std::uint64_t seed = 0) {
    SimConfig cfg;
    cfg.n = n;
    cfg.speed = speed;
    cfg.radii.assign(n, radius);
    cfg.boundary = boundary;
    cfg.noise = noise;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

inline double wrap_coordinate(double x, double side) {
    double r = std::fmod(x, side);
    if (r < 0) r += side;
    if (r >= side) r -= side;
    if (r < 0) r = 0;
    return r;
}

// Headings uniform in [-pi, pi); positions uniform in the periodic box, or in
// [0, extent)^2 under open boundaries.
inline SwarmState uniform_random_state(const SimConfig& cfg, std::uint64_t seed, double open_extent = 5.0) {
    const double extent = cfg.boundary.is_periodic() ? cfg.boundary.side : open_extent;
    SwarmState s;
    s.t = 0;
    s.positions.resize(cfg.n);
    s.headings.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        RandomStream hp(seed, stream_tag::init_heading, i);
        RandomStream xp(seed, stream_tag::init_position, i);
        s.headings[i] = wrap_heading(hp.uniform(0, -pi, pi));
        s.positions[i] = {xp.uniform(0, 0.0, extent), xp.uniform(1, 0.0, extent)};
    }
    return s;
}

// Random positions with headings confined to [-width/2, width/2].
inline SwarmState aligned_random_state(const SimConfig& cfg, std::uint64_t seed, double width,
                                       double open_extent = 5.0) {
    SwarmState s = uniform_random_state(cfg, seed, open_extent);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        RandomStream hp(seed, stream_tag::init_heading, i);
        s.headings[i] = hp.uniform(1, -width / 2.0, width / 2.0);
    }
    return s;
}

} // namespace sppkit
