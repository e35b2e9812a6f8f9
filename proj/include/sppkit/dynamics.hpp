#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "angles.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "state.hpp"

namespace sppkit {

// Euclidean norm under open boundaries, minimum-image under periodic ones.
inline double pair_distance(const SimConfig& cfg, const Vec2& a, const Vec2& b) {
    double dx = std::abs(a.x - b.x);
    double dy = std::abs(a.y - b.y);
    if (cfg.boundary.is_periodic()) {
        const double L = cfg.boundary.side;
        dx = std::min(dx, L - dx);
        dy = std::min(dy, L - dy);
    }
    return std::sqrt(dx * dx + dy * dy);
}

inline double weight_between(const SimConfig& cfg, const SwarmState& s, std::size_t i, std::size_t j, double dist) {
    if (cfg.weight_rule) return cfg.weight_rule(s, i, j, dist, cfg.radii[i]);
    return dist <= cfg.radii[i] ? 1.0 : 0.0; // indicator, inclusive at the radius
}

// In-neighbors of i: j such that dist(X_i, X_j) <= r_i (inclusive, so i is
// always its own neighbor when r_i >= 0).
inline std::vector<std::uint32_t> neighbor_set(const SimConfig& cfg, const SwarmState& s, std::size_t i) {
    std::vector<std::uint32_t> out;
    for (std::size_t j = 0; j < s.size(); ++j)
        if (pair_distance(cfg, s.positions[i], s.positions[j]) <= cfg.radii[i]) out.push_back(static_cast<std::uint32_t>(j));
    return out;
}

struct DegenerateMeanEvent {
    long t = 0;
    std::uint32_t agent = 0;
};

namespace detail {

struct MeanAccum {
    double weight_sum = 0.0;
    double sin_sum = 0.0, cos_sum = 0.0; // circular rule
    double angle_sum = 0.0;              // arithmetic rule
};

inline void accumulate(MeanAccum& acc, HeadingRule rule, double w, double heading) {
    if (w == 0.0) return;
    acc.weight_sum += w;
    if (rule == HeadingRule::circular) {
        acc.sin_sum += w * std::sin(heading);
        acc.cos_sum += w * std::cos(heading);
    } else {
        acc.angle_sum += w * heading;
    }
}

// Candidates from a uniform cell grid, ascending ids; superset of all j with
// dist <= r_i. Only used with indicator weights, where skipped far agents
// contribute exactly nothing, keeping results bit-identical to the naive scan.
class UniformGrid {
  public:
    UniformGrid(const SimConfig& cfg, const SwarmState& s) : cfg_(cfg), s_(s) {
        cell_ = std::max(cfg.r_max(), 1e-12);
        if (cfg.boundary.is_periodic()) {
            cells_per_side_ = std::max<long>(1, static_cast<long>(std::floor(cfg.boundary.side / cell_)));
            cell_ = cfg.boundary.side / static_cast<double>(cells_per_side_);
        }
        for (std::size_t j = 0; j < s.size(); ++j) {
            buckets_[key(cell_index(s.positions[j]))].push_back(static_cast<std::uint32_t>(j));
        }
    }

    std::vector<std::uint32_t> candidates(std::size_t i) const {
        std::vector<std::uint32_t> out;
        const auto [cx, cy] = cell_index(s_.positions[i]);
        const long reach = static_cast<long>(std::ceil(cfg_.radii[i] / cell_)) + 1;
        for (long dx = -reach; dx <= reach; ++dx) {
            for (long dy = -reach; dy <= reach; ++dy) {
                long x = cx + dx, y = cy + dy;
                if (cfg_.boundary.is_periodic()) {
                    x = ((x % cells_per_side_) + cells_per_side_) % cells_per_side_;
                    y = ((y % cells_per_side_) + cells_per_side_) % cells_per_side_;
                }
                auto it = buckets_.find(key({x, y}));
                if (it == buckets_.end()) continue;
                out.insert(out.end(), it->second.begin(), it->second.end());
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

  private:
    std::pair<long, long> cell_index(const Vec2& p) const {
        return {static_cast<long>(std::floor(p.x / cell_)), static_cast<long>(std::floor(p.y / cell_))};
    }
    static std::uint64_t key(std::pair<long, long> c) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.first)) << 32) |
               static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.second));
    }
    const SimConfig& cfg_;
    const SwarmState& s_;
    double cell_ = 1.0;
    long cells_per_side_ = 1;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

inline double finish_mean(const MeanAccum& acc, HeadingRule rule, double own_heading, bool* degenerate) {
    if (degenerate) *degenerate = false;
    if (!(acc.weight_sum > 0)) {
        if (degenerate) *degenerate = true;
        return own_heading;
    }
    if (rule == HeadingRule::circular) {
        if (acc.sin_sum == 0.0 && acc.cos_sum == 0.0) {
            if (degenerate) *degenerate = true;
            return own_heading;
        }
        return wrap_heading(std::atan2(acc.sin_sum, acc.cos_sum));
    }
    return wrap_heading(acc.angle_sum / acc.weight_sum);
}

} // namespace detail

// Neighborhood mean headings for every agent, computed synchronously from the
// given state. A degenerate circular mean falls back to the agent's own
// heading and is reported through `events`.
inline std::vector<double> mean_headings(const SimConfig& cfg, const SwarmState& s, HeadingRule rule,
                                         std::vector<DegenerateMeanEvent>* events = nullptr) {
    const std::size_t n = s.size();
    std::vector<double> out(n);
    const bool use_grid = cfg.search == NeighborSearch::grid && !cfg.weight_rule && cfg.r_max() > 0;
    std::optional<detail::UniformGrid> grid;
    if (use_grid) grid.emplace(cfg, s);
    for (std::size_t i = 0; i < n; ++i) {
        detail::MeanAccum acc;
        if (use_grid) {
            for (std::uint32_t j : grid->candidates(i)) {
                const double d = pair_distance(cfg, s.positions[i], s.positions[j]);
                detail::accumulate(acc, rule, weight_between(cfg, s, i, j, d), s.headings[j]);
            }
        } else {
            for (std::size_t j = 0; j < n; ++j) {
                const double d = pair_distance(cfg, s.positions[i], s.positions[j]);
                detail::accumulate(acc, rule, weight_between(cfg, s, i, j, d), s.headings[j]);
            }
        }
        bool degenerate = false;
        out[i] = detail::finish_mean(acc, rule, s.headings[i], &degenerate);
        if (degenerate && events) events->push_back({s.t, static_cast<std::uint32_t>(i)});
    }
    return out;
}

// Library-call variant: a degenerate mean is an error here.
inline double local_mean_heading(const SimConfig& cfg, const SwarmState& s, std::size_t i, HeadingRule rule) {
    detail::MeanAccum acc;
    for (std::size_t j = 0; j < s.size(); ++j) {
        const double d = pair_distance(cfg, s.positions[i], s.positions[j]);
        detail::accumulate(acc, rule, weight_between(cfg, s, i, j, d), s.headings[j]);
    }
    bool degenerate = false;
    const double m = detail::finish_mean(acc, rule, s.headings[i], &degenerate);
    if (degenerate) throw DegenerateMeanError("local_mean_heading: weighted heading vectors cancel");
    return m;
}

// Per-agent additive heading perturbation for one step. Control inputs carry
// their admissibility data and are validated on construction.
class StepInput {
  public:
    static StepInput noise(std::vector<double> values) {
        StepInput in;
        in.values_ = std::move(values);
        return in;
    }

    static StepInput control(std::span<const double> drive, std::span<const double> margin,
                             std::span<const double> disturbance, double noise_bound) {
        if (drive.size() != margin.size() || drive.size() != disturbance.size())
            throw InadmissibleControl("control input: mismatched lengths");
        StepInput in;
        in.control_ = true;
        in.values_.resize(drive.size());
        constexpr double tol = 1e-12;
        for (std::size_t i = 0; i < drive.size(); ++i) {
            if (!(margin[i] > 0.0) || !(margin[i] < noise_bound))
                throw InadmissibleControl("control input: margin outside (0, noise_bound)");
            if (std::abs(drive[i]) > noise_bound - margin[i] + tol)
                throw InadmissibleControl("control input: |drive| exceeds noise_bound - margin");
            if (std::abs(disturbance[i]) > margin[i] + tol)
                throw InadmissibleControl("control input: |disturbance| exceeds margin");
            in.values_[i] = drive[i] + disturbance[i];
        }
        return in;
    }

    std::span<const double> values() const { return values_; }
    bool is_control() const { return control_; }

  private:
    std::vector<double> values_;
    bool control_ = false;
};

// Apply one synchronous update given precomputed means: headings first, then
// positions move with the *new* headings.
inline SwarmState advance(const SimConfig& cfg, const SwarmState& s, std::span<const double> means,
                          std::span<const double> applied) {
    const std::size_t n = s.size();
    if (means.size() != n || applied.size() != n) throw ConfigError("advance: input length must equal n");
    SwarmState next;
    next.t = s.t + 1;
    next.headings.resize(n);
    next.positions.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double h = wrap_heading(means[i] + applied[i]);
        next.headings[i] = h;
        double x = s.positions[i].x + cfg.speed * std::cos(h);
        double y = s.positions[i].y + cfg.speed * std::sin(h);
        if (cfg.boundary.is_periodic()) {
            x = wrap_coordinate(x, cfg.boundary.side);
            y = wrap_coordinate(y, cfg.boundary.side);
        }
        next.positions[i] = {x, y};
    }
    return next;
}

inline SwarmState step(const SimConfig& cfg, const SwarmState& s, HeadingRule rule, const StepInput& input,
                       std::vector<DegenerateMeanEvent>* events = nullptr) {
    const auto means = mean_headings(cfg, s, rule, events);
    return advance(cfg, s, means, input.values());
}

inline void validate_state(const SimConfig& cfg, const SwarmState& s) {
    if (s.size() != cfg.n || s.positions.size() != cfg.n) throw ConfigError("state: size must equal config n");
    for (double h : s.headings)
        if (!(h >= -pi && h < pi)) throw ConfigError("state: heading outside [-pi, pi)");
    if (cfg.boundary.is_periodic()) {
        const double L = cfg.boundary.side;
        for (const Vec2& p : s.positions)
            if (!(p.x >= 0 && p.x < L && p.y >= 0 && p.y < L)) throw ConfigError("state: position outside [0, L)^2");
    }
}

// Spot-check the two weight-rule conditions on random states.
inline bool probe_weight_rule(const SimConfig& cfg, std::uint64_t seed = 7, int trials = 64) {
    for (int k = 0; k < trials; ++k) {
        const SwarmState s = uniform_random_state(cfg, seed + static_cast<std::uint64_t>(k));
        for (std::size_t i = 0; i < cfg.n; ++i) {
            if (!(weight_between(cfg, s, i, i, 0.0) > 0)) return false;
            for (std::size_t j = 0; j < cfg.n; ++j) {
                const double d = pair_distance(cfg, s.positions[i], s.positions[j]);
                if (d > cfg.radii[i] && weight_between(cfg, s, i, j, d) != 0.0) return false;
            }
        }
    }
    return true;
}

} // namespace sppkit
