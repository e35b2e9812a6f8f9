#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "angles.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "state.hpp"
#include "targets.hpp"

namespace sppkit {

// One agent's control for one step: reserve `margin` for the disturbance and
// apply `drive`, with margin in (0, noise_bound) and |drive| <= noise_bound -
// margin.
struct ControlDecision {
    double margin = 0.0;
    double drive = 0.0;
};

struct PhaseContext {
    const SimConfig* cfg = nullptr;
    const SwarmState* entry = nullptr;
    long start_step = 0;
};

using AgentRule =
    std::function<ControlDecision(const SwarmState& s, std::span<const double> means, std::size_t agent, long step_in_phase)>;

struct PlanPhase {
    std::string name;
    long duration = 0;
    std::function<AgentRule(const PhaseContext&)> enter;
    std::vector<std::pair<std::string, double>> constants;
};

struct RegimeNote {
    bool proven = true;
    std::string note;
};

struct StepWindow {
    long first = 0;
    long last = 0;
};

struct ControlPlan {
    HeadingRule rule = HeadingRule::arithmetic;
    double noise_bound = 0.0;
    std::optional<TargetSet> target;
    std::optional<TargetSet> precondition;
    RegimeNote regime;
    std::vector<PlanPhase> phases;
    std::optional<StepWindow> disconnect_window;

    long horizon() const {
        long h = 0;
        for (const auto& p : phases) h += p.duration;
        return h;
    }

    std::string describe() const {
        std::ostringstream os;
        os << "plan rule=" << to_string(rule) << " noise_bound=" << noise_bound << " horizon=" << horizon() << "\n";
        os << "target: " << (target ? target->describe() : std::string("none")) << "\n";
        if (precondition) os << "precondition: " << precondition->describe() << "\n";
        os << "regime: " << (regime.proven ? "proven" : "unproven");
        if (!regime.note.empty()) os << " (" << regime.note << ")";
        os << "\n";
        if (disconnect_window)
            os << "disconnect_window: [" << disconnect_window->first << ", " << disconnect_window->last << "]\n";
        for (std::size_t k = 0; k < phases.size(); ++k) {
            os << "phase " << k << ": " << phases[k].name << " duration=" << phases[k].duration;
            for (const auto& [key, val] : phases[k].constants) os << " " << key << "=" << val;
            os << "\n";
        }
        return os.str();
    }
};

inline long horizon(const ControlPlan& plan) { return plan.horizon(); }

inline ControlPlan compose(const ControlPlan& a, const ControlPlan& b) {
    if (a.rule != b.rule || a.noise_bound != b.noise_bound)
        throw ConfigError("compose: plans must share heading rule and noise bound");
    ControlPlan p;
    p.rule = a.rule;
    p.noise_bound = a.noise_bound;
    p.phases = a.phases;
    p.phases.insert(p.phases.end(), b.phases.begin(), b.phases.end());
    p.target = b.target ? b.target : a.target;
    p.precondition = a.precondition;
    p.regime.proven = a.regime.proven && b.regime.proven;
    p.regime.note = a.regime.note;
    if (!b.regime.note.empty()) p.regime.note += (p.regime.note.empty() ? "" : "; ") + b.regime.note;
    if (b.disconnect_window)
        p.disconnect_window = StepWindow{b.disconnect_window->first + a.horizon(), b.disconnect_window->last + a.horizon()};
    else if (a.disconnect_window)
        p.disconnect_window = a.disconnect_window;
    return p;
}

struct Partition {
    std::vector<std::vector<std::uint32_t>> groups;
    std::vector<int> group_of; // agent -> group index

    std::size_t size() const { return groups.size(); }
};

// Agents sorted by descending second coordinate (ties by ascending id), cut
// into consecutive blocks of the given sizes. Zero-size blocks are allowed.
inline Partition partition_by_ordinate(const SwarmState& s, std::span<const std::size_t> sizes) {
    std::size_t total = 0;
    for (std::size_t k : sizes) total += k;
    if (total != s.size()) throw ConfigError("partition_by_ordinate: sizes must sum to n");
    std::vector<std::uint32_t> order(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) order[i] = static_cast<std::uint32_t>(i);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (s.positions[a].y != s.positions[b].y) return s.positions[a].y > s.positions[b].y;
        return a < b;
    });
    Partition p;
    p.group_of.assign(s.size(), -1);
    std::size_t next = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        std::vector<std::uint32_t> block(order.begin() + static_cast<long>(next),
                                         order.begin() + static_cast<long>(next + sizes[g]));
        for (std::uint32_t id : block) p.group_of[id] = static_cast<int>(g);
        p.groups.push_back(std::move(block));
        next += sizes[g];
    }
    return p;
}

namespace rules {

inline double clamp_drive(double drive, double noise_bound, double margin) {
    const double lim = noise_bound - margin;
    if (drive > lim) return lim;
    if (drive < -lim) return -lim;
    return drive;
}

// Three-branch pull of the local mean toward zero within a box of the given
// width: saturate at 3/4 of the bound outside the reachable zone, place the
// heading exactly inside the box otherwise.
inline ControlDecision center_table(double mean, double noise_bound, double width) {
    const double half = width / 2.0;
    if (mean > noise_bound - half) return {noise_bound / 4.0, -0.75 * noise_bound};
    if (mean < half - noise_bound) return {noise_bound / 4.0, 0.75 * noise_bound};
    return {half, -mean};
}

// Pull toward an off-center target, reserving `band` once within reach. The
// far-side saturation only fires outside the construction's envelope, keeping
// the rule total over arbitrary states.
inline ControlDecision pull_banded(double mean, double noise_bound, double target, double band) {
    if (mean < target + band - noise_bound) return {noise_bound / 4.0, 0.75 * noise_bound};
    if (mean > target - band + noise_bound) return {noise_bound / 4.0, -0.75 * noise_bound};
    return {band, target - mean};
}

// Pull with the full admissible drive; margin stays at the given value.
inline ControlDecision pull_full(double mean, double noise_bound, double target, double margin) {
    if (mean < target + margin - noise_bound) return {margin, noise_bound - margin};
    if (mean > target - margin + noise_bound) return {margin, -(noise_bound - margin)};
    return {margin, target - mean};
}

// Circular variant used when the target center may sit anywhere on the circle.
inline ControlDecision pull_full_circular(double mean, double noise_bound, double center, double margin) {
    const double off = circular_diff(mean, center);
    if (off < margin - noise_bound) return {margin, noise_bound - margin};
    if (off > noise_bound - margin) return {margin, -(noise_bound - margin)};
    return {margin, -off};
}

// Hold a small vertical drift toward a horizontal line: heading target is
// +-3 margin depending on the side of the line.
inline ControlDecision line_toggle(double mean, double x2, double line, double noise_bound, double margin) {
    const double target = (x2 >= line) ? -3.0 * margin : 3.0 * margin;
    return {margin, clamp_drive(target - mean, noise_bound, margin)};
}

} // namespace rules

namespace detail {

inline long ceil_long(double x) { return static_cast<long>(std::ceil(x)); }
inline long floor_long(double x) { return static_cast<long>(std::floor(x)); }

// The separation and climb maneuvers keep every heading comparison inside a
// half circle; large noise bounds are capped here and reached via an order
// prefix, mirroring the eta' reduction used for wide-noise regimes.
inline double maneuver_bound(HeadingRule rule, double noise_bound) {
    return std::min(noise_bound, rule == HeadingRule::circular ? 1.5 : 2.0);
}

inline PlanPhase static_phase(std::string name, long duration, AgentRule rule,
                              std::vector<std::pair<std::string, double>> constants = {}) {
    PlanPhase p;
    p.name = std::move(name);
    p.duration = duration;
    p.enter = [r = std::move(rule)](const PhaseContext&) { return r; };
    p.constants = std::move(constants);
    return p;
}

inline double climb_excursion_sum(double nbe, long steps, double cap) {
    double sum = 0.0;
    for (long j = 0; j < steps; ++j) sum += std::sin(std::min(nbe / 2.0 + static_cast<double>(j) * nbe, cap));
    return sum;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Order plan: drive every heading into [-width/2, width/2].
// ---------------------------------------------------------------------------
inline ControlPlan plan_order(HeadingRule rule, double width, double noise_bound, const SimConfig& cfg) {
    if (!(width > 0)) throw std::invalid_argument("plan_order: width must be > 0");
    if (!(width < two_pi)) throw std::invalid_argument("plan_order: width must be < 2*pi");
    if (!(noise_bound > 0)) throw std::invalid_argument("plan_order: noise_bound must be > 0");
    cfg.validate();

    ControlPlan plan;
    plan.rule = rule;
    plan.noise_bound = noise_bound;
    plan.target = TargetSet::order_box(width);

    if (rule == HeadingRule::arithmetic) {
        const double w = std::min(width, noise_bound);
        const long T = std::max<long>(detail::ceil_long((two_pi - width) / noise_bound), 0);
        plan.phases.push_back(detail::static_phase(
            "align", T,
            [noise_bound, w](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                return rules::center_table(means[i], noise_bound, w);
            },
            {{"width", w}}));
        return plan;
    }

    // Circular rule: compress the means toward the cover midpoint, tighten
    // around it, then walk the cluster to zero.
    const std::size_t n = cfg.n;
    const double threshold = pi / 2.0 - pi / static_cast<double>(n);
    const bool proven = noise_bound > threshold;
    if (!proven) {
        plan.regime.proven = false;
        std::ostringstream os;
        os << "circular-rule alignment proven only for noise_bound > " << threshold;
        plan.regime.note = os.str();
    }
    const double e1 = proven ? std::min((noise_bound - threshold) / 3.0, pi / 8.0) : std::min(noise_bound / 4.0, pi / 8.0);
    const double e2 = std::min({pi / 8.0, noise_bound / 4.0, width / 2.0});
    const long sat_steps = detail::ceil_long((pi / 2.0 - noise_bound + e2) / (noise_bound - 2.0 * e2));
    const long t1 = std::max<long>(sat_steps + 2, 2);
    const long t2 = detail::ceil_long(pi / (noise_bound - 2.0 * e2)) + t1;
    const double gain = (static_cast<double>(n) - 2.0) / (2.0 * (static_cast<double>(n) - 1.0));

    PlanPhase compress;
    compress.name = "compress";
    compress.duration = 1;
    compress.constants = {{"gain", gain}, {"margin", e1}};
    compress.enter = [rule, e1, gain, noise_bound](const PhaseContext& ctx) -> AgentRule {
        const auto means = mean_headings(*ctx.cfg, *ctx.entry, rule);
        const double pivot = circular_cover(means).midpoint();
        return [pivot, e1, gain, noise_bound](const SwarmState&, std::span<const double> m, std::size_t i, long) {
            const double off = circular_diff(m[i], pivot);
            double drive = (off >= 0 ? -2.0 * e1 : 2.0 * e1) - gain * off;
            drive = rules::clamp_drive(drive, noise_bound, e1);
            return ControlDecision{e1, drive};
        };
    };
    plan.phases.push_back(std::move(compress));

    PlanPhase tighten;
    tighten.name = "tighten";
    tighten.duration = t1 - 1;
    tighten.constants = {{"margin", e2}};
    tighten.enter = [rule, e2, noise_bound](const PhaseContext& ctx) -> AgentRule {
        const auto means = mean_headings(*ctx.cfg, *ctx.entry, rule);
        const double pivot = circular_cover(means).midpoint();
        return [pivot, e2, noise_bound](const SwarmState&, std::span<const double> m, std::size_t i, long) {
            const double off = circular_diff(m[i], pivot);
            if (off > noise_bound - e2) return ControlDecision{e2, -(noise_bound - e2)};
            if (off < e2 - noise_bound) return ControlDecision{e2, noise_bound - e2};
            return ControlDecision{e2, rules::clamp_drive(-off, noise_bound, e2)};
        };
    };
    plan.phases.push_back(std::move(tighten));

    PlanPhase recenter;
    recenter.name = "recenter";
    recenter.duration = t2 - t1;
    recenter.constants = {{"margin", e2}};
    recenter.enter = [rule, e2, noise_bound](const PhaseContext& ctx) -> AgentRule {
        const auto means = mean_headings(*ctx.cfg, *ctx.entry, rule);
        const bool descending = circular_cover(means).midpoint() > 0;
        return [descending, e2, noise_bound](const SwarmState&, std::span<const double> m, std::size_t i, long) {
            const double th = m[i];
            if (!descending) {
                if (th < e2 - noise_bound || th >= pi - e2) return ControlDecision{e2, noise_bound - e2};
            } else {
                if (th > noise_bound - e2 || th <= -(pi - e2)) return ControlDecision{e2, -(noise_bound - e2)};
            }
            return ControlDecision{e2, rules::clamp_drive(-th, noise_bound, e2)};
        };
    };
    plan.phases.push_back(std::move(recenter));
    return plan;
}

// ---------------------------------------------------------------------------
// Periodic-box admissibility thresholds (minimum side lengths).
// ---------------------------------------------------------------------------
inline double periodic_disorder_threshold(double noise_bound, double speed, double r_max, std::size_t n, double level) {
    const bool simple = (n % 2 == 0) || (level > 1.0 / static_cast<double>(n));
    if (simple) {
        const long m = detail::floor_long(pi / (2.0 * noise_bound) - 0.5);
        double sum = 0.0;
        for (long k = 0; k <= m; ++k) sum += std::sin(noise_bound / 2.0 + static_cast<double>(k) * noise_bound);
        return 2.0 * r_max + 2.0 * speed * sum;
    }
    const double cn = pi / 2.0 + std::asin(1.0 / (static_cast<double>(n) - 1.0));
    const long m = detail::floor_long(cn / noise_bound - 0.5);
    double sum = 0.0;
    for (long k = 0; k <= m; ++k) sum += std::sin(noise_bound / 2.0 + static_cast<double>(k) * noise_bound);
    return 3.0 * r_max + 2.0 * speed * sum;
}

inline double periodic_span_threshold(double noise_bound, double speed, double r_max) {
    const long m = detail::floor_long(pi / (2.0 * noise_bound) - 0.5);
    double sum = 0.0;
    for (long k = 0; k <= m; ++k) sum += std::sin(noise_bound / 2.0 + static_cast<double>(k) * noise_bound);
    return 2.0 * r_max + 2.0 * speed * sum;
}

namespace detail {

// Finite-discretization feasibility for the periodic maneuvers: the vertical
// excursion both groups may accumulate, measured from the gathering line.
struct PeriodicPlanGeometry {
    long gather = 0;
    long split = 0;
    long steer = 0;
    double excursion = 0.0;
};

inline PeriodicPlanGeometry periodic_geometry(double nbe, double speed, double r_max, double side, int K, bool three_sets,
                                              double steer_distance) {
    PeriodicPlanGeometry g;
    const double m = nbe / (2.0 * K);
    g.gather = ceil_long(side / (2.0 * speed * std::sin(nbe / static_cast<double>(K))));
    if (three_sets) {
        const double rate = speed * (std::sin(nbe / 2.0 - nbe / K) - std::sin(m));
        g.split = floor_long(r_max / rate) + 1;
        g.steer = std::max<long>(ceil_long(((steer_distance - nbe / 2.0) * K + nbe / 2.0) / ((K - 1.0) * nbe)), 1);
    } else {
        const double rate = 2.0 * speed * std::sin(nbe / 2.0 - nbe / K);
        g.split = floor_long(r_max / rate) + 1;
        g.steer = std::max<long>(ceil_long(((steer_distance * 2.0 - nbe) * K + nbe) / (2.0 * (K - 1.0) * nbe)), 1);
    }
    g.excursion = speed * std::sin(2.0 * nbe / K) + speed * static_cast<double>(g.split) * std::sin(nbe / 2.0) +
                  speed * climb_excursion_sum(nbe, g.steer, pi / 2.0);
    return g;
}

inline int choose_discretization(double nbe, double speed, double r_max, double side, bool three_sets,
                                 double steer_distance, double residual_budget, const char* what) {
    for (int K = 4; K <= 1000000; K = (K < 64 ? K + 1 : static_cast<int>(K * 1.3) + 1)) {
        const auto g = periodic_geometry(nbe, speed, r_max, side, K, three_sets, steer_distance);
        const bool geometry_ok = side > 1.01 * (r_max + 2.0 * g.excursion);
        const bool residual_ok =
            residual_budget <= 0.0 || 1.01 * 2.0 * std::sin(nbe / (4.0 * K)) <= residual_budget;
        if (geometry_ok && residual_ok) return K;
    }
    throw RegimeViolation(std::string(what) + ": no feasible discretization up to 1e6");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Disorder plan: from an aligned start, split the swarm vertically, break all
// cross-group communication, then steer the groups to cancelling directions.
// ---------------------------------------------------------------------------
inline ControlPlan plan_disorder(HeadingRule rule, double level, double noise_bound, const SimConfig& cfg) {
    if (!(level > 0 && level < 1)) throw std::invalid_argument("plan_disorder: level must lie in (0, 1)");
    if (!(noise_bound > 0)) throw std::invalid_argument("plan_disorder: noise_bound must be > 0");
    cfg.validate();

    const double nbe = detail::maneuver_bound(rule, noise_bound);
    const bool needs_prefix = nbe < noise_bound;
    const std::size_t n = cfg.n;
    const double v = cfg.speed;
    const double rmax = cfg.r_max();
    const double band = std::min(nbe / 2.0, 2.0 * std::asin(level / 2.0));

    ControlPlan core;
    core.rule = rule;
    core.noise_bound = noise_bound;
    core.target = TargetSet::disordered(level);
    core.precondition = TargetSet::order_box(nbe);

    if (cfg.boundary.is_periodic()) {
        const double L = cfg.boundary.side;
        const double thr = periodic_disorder_threshold(nbe, v, rmax, n, level);
        if (!(L > thr)) {
            std::ostringstream os;
            os << "plan_disorder: periodic side " << L << " below admissible threshold " << thr;
            throw RegimeViolation(os.str());
        }
        const bool simple = (n % 2 == 0) || (level > 1.0 / static_cast<double>(n));
        const double cn = simple ? pi / 2.0 : pi / 2.0 + std::asin(1.0 / (static_cast<double>(n) - 1.0));
        const double imbalance = simple ? static_cast<double>(n % 2) / static_cast<double>(n) : 0.0;
        const int K = detail::choose_discretization(nbe, v, rmax, L, !simple, cn, level - imbalance, "plan_disorder");
        const auto geo = detail::periodic_geometry(nbe, v, rmax, L, K, !simple, cn);
        const double m = nbe / (2.0 * K);

        core.phases.push_back(detail::static_phase(
            "gather", geo.gather,
            [nbe, m, L](const SwarmState& s, std::span<const double> means, std::size_t i, long) {
                return rules::line_toggle(means[i], s.positions[i].y, L / 2.0, nbe, m);
            },
            {{"discretization", static_cast<double>(K)}, {"line", L / 2.0}}));

        std::vector<std::size_t> sizes =
            simple ? std::vector<std::size_t>{(n + 1) / 2, n / 2}
                   : std::vector<std::size_t>{(n - 1) / 2, 1, (n - 1) / 2};
        const int down_group = simple ? 1 : 2;

        PlanPhase split;
        split.name = "split";
        split.duration = geo.split;
        split.constants = {{"target_up", nbe / 2.0 - m}, {"margin", m}};
        split.enter = [sizes, nbe, m, down_group](const PhaseContext& ctx) -> AgentRule {
            auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
            return [part, nbe, m, down_group](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                const int g = part->group_of[i];
                if (g == 0) return ControlDecision{m, rules::clamp_drive((nbe / 2.0 - m) - means[i], nbe, m)};
                if (g == down_group)
                    return ControlDecision{m, rules::clamp_drive(-(nbe / 2.0 - m) - means[i], nbe, m)};
                return ControlDecision{m, rules::clamp_drive(-means[i], nbe, m)};
            };
        };
        core.phases.push_back(std::move(split));

        PlanPhase steer;
        steer.name = "steer";
        steer.duration = geo.steer;
        steer.constants = {{"target", cn}, {"margin", m}};
        steer.enter = [sizes, nbe, m, cn, down_group](const PhaseContext& ctx) -> AgentRule {
            auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
            return [part, nbe, m, cn, down_group](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                const int g = part->group_of[i];
                if (g == 0) return rules::pull_full(means[i], nbe, cn, m);
                if (g == down_group) return rules::pull_full(means[i], nbe, -cn, m);
                return ControlDecision{m, rules::clamp_drive(-means[i], nbe, m)};
            };
        };
        core.phases.push_back(std::move(steer));
    } else if (n % 2 == 0) {
        const long t_split = detail::floor_long(rmax / (2.0 * v * std::sin(nbe / 4.0))) + 1;
        const long t_steer = std::max<long>(detail::ceil_long((pi - 2.0 * band) / nbe - 0.5), 1);
        const std::vector<std::size_t> sizes{n / 2, n / 2};

        PlanPhase split;
        split.name = "split";
        split.duration = t_split;
        split.constants = {{"target_up", 3.0 * nbe / 8.0}, {"margin", nbe / 8.0}};
        split.enter = [sizes, nbe](const PhaseContext& ctx) -> AgentRule {
            auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
            return [part, nbe](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                const double target = part->group_of[i] == 0 ? 3.0 * nbe / 8.0 : -3.0 * nbe / 8.0;
                return ControlDecision{nbe / 8.0, rules::clamp_drive(target - means[i], nbe, nbe / 8.0)};
            };
        };
        core.phases.push_back(std::move(split));

        PlanPhase steer;
        steer.name = "steer";
        steer.duration = t_steer;
        steer.constants = {{"band", band}};
        steer.enter = [sizes, nbe, band](const PhaseContext& ctx) -> AgentRule {
            auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
            return [part, nbe, band](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                const double target = part->group_of[i] == 0 ? pi / 2.0 : -pi / 2.0;
                return rules::pull_banded(means[i], nbe, target, band);
            };
        };
        core.phases.push_back(std::move(steer));
    } else {
        const long t_split = detail::floor_long(rmax / (v * (std::sin(nbe / 4.0) - std::sin(nbe / 8.0)))) + 1;
        const double cn = pi / 2.0 + std::asin(1.0 / (static_cast<double>(n) - 1.0));
        const long t_steer = std::max<long>(detail::ceil_long((2.0 * cn - 2.0 * band) / nbe - 0.5), 1);
        const std::vector<std::size_t> sizes{(n - 1) / 2, 1, (n - 1) / 2};

        PlanPhase split;
        split.name = "split";
        split.duration = t_split;
        split.constants = {{"target_up", 3.0 * nbe / 8.0}, {"margin", nbe / 8.0}};
        split.enter = [sizes, nbe](const PhaseContext& ctx) -> AgentRule {
            auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
            return [part, nbe](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                const int g = part->group_of[i];
                if (g == 1) return ControlDecision{nbe / 8.0, rules::clamp_drive(-means[i], nbe, nbe / 8.0)};
                const double target = g == 0 ? 3.0 * nbe / 8.0 : -3.0 * nbe / 8.0;
                return ControlDecision{nbe / 8.0, rules::clamp_drive(target - means[i], nbe, nbe / 8.0)};
            };
        };
        core.phases.push_back(std::move(split));

        PlanPhase steer;
        steer.name = "steer";
        steer.duration = t_steer;
        steer.constants = {{"target", cn}, {"band", band}};
        steer.enter = [sizes, nbe, band, cn](const PhaseContext& ctx) -> AgentRule {
            auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
            return [part, nbe, band, cn](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                const int g = part->group_of[i];
                if (g == 1) return ControlDecision{band, rules::clamp_drive(-means[i], nbe, band)};
                return rules::pull_banded(means[i], nbe, g == 0 ? cn : -cn, band);
            };
        };
        core.phases.push_back(std::move(steer));
    }

    if (needs_prefix) {
        ControlPlan full = compose(plan_order(rule, nbe, noise_bound, cfg), core);
        full.precondition.reset();
        return full;
    }
    return core;
}

// ---------------------------------------------------------------------------
// Span plan: guarantee a heading span of at least pi at the horizon.
// ---------------------------------------------------------------------------
inline ControlPlan plan_span_at_least_pi(HeadingRule rule, double noise_bound, const SimConfig& cfg) {
    if (!(noise_bound > 0)) throw std::invalid_argument("plan_span_at_least_pi: noise_bound must be > 0");
    cfg.validate();
    // Two headings cover an arc of at most pi, with equality only when exactly
    // antipodal; the target has no interior to reach robustly.
    if (cfg.n < 3) throw RegimeViolation("plan_span_at_least_pi: needs at least 3 agents");
    const double nbe = detail::maneuver_bound(rule, noise_bound);
    const std::size_t n = cfg.n;
    const double v = cfg.speed;
    const double rmax = cfg.r_max();

    ControlPlan core;
    core.rule = rule;
    core.noise_bound = noise_bound;
    core.target = TargetSet::span_at_least(pi);

    if (cfg.boundary.is_periodic()) {
        const double L = cfg.boundary.side;
        const double thr = periodic_span_threshold(nbe, v, rmax);
        if (!(L > thr)) {
            std::ostringstream os;
            os << "plan_span_at_least_pi: periodic side " << L << " below admissible threshold " << thr;
            throw RegimeViolation(os.str());
        }
        const int K = detail::choose_discretization(nbe, v, rmax, L, false, pi / 2.0, 0.0, "plan_span_at_least_pi");
        const auto geo = detail::periodic_geometry(nbe, v, rmax, L, K, false, pi / 2.0);
        const long t_steer = std::max<long>(
            detail::ceil_long(((pi - nbe) * K + 2.0 * nbe) / (2.0 * (K - 1.0) * nbe)), 1);
        const double m = nbe / (2.0 * K);

        core.phases.push_back(detail::static_phase(
            "gather", geo.gather,
            [nbe, m, L](const SwarmState& s, std::span<const double> means, std::size_t i, long) {
                return rules::line_toggle(means[i], s.positions[i].y, L / 2.0, nbe, m);
            },
            {{"discretization", static_cast<double>(K)}, {"line", L / 2.0}}));

        const std::size_t up = (n + 1) / 2;
        const std::size_t down = n - up;
        const std::vector<std::size_t> sizes{(up + 1) / 2, up - (up + 1) / 2, down - (down + 1) / 2, (down + 1) / 2};

        PlanPhase split;
        split.name = "split";
        split.duration = geo.split;
        split.constants = {{"margin", m}};
        split.enter = [sizes, nbe, m](const PhaseContext& ctx) -> AgentRule {
            auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
            return [part, nbe, m](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                const bool upward = part->group_of[i] <= 1;
                const double target = upward ? nbe / 2.0 - m : -(nbe / 2.0 - m);
                return ControlDecision{m, rules::clamp_drive(target - means[i], nbe, m)};
            };
        };
        core.phases.push_back(std::move(split));

        PlanPhase steer;
        steer.name = "steer";
        steer.duration = t_steer;
        steer.constants = {{"margin", m}};
        steer.enter = [sizes, nbe, m](const PhaseContext& ctx) -> AgentRule {
            auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
            return [part, nbe, m](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                static constexpr double half = pi / 2.0;
                switch (part->group_of[i]) {
                case 0:
                    return rules::pull_full(means[i], nbe, half + m, m);
                case 1:
                    return rules::pull_full(means[i], nbe, half - m, m);
                case 2:
                    return rules::pull_full(means[i], nbe, -half + m, m);
                default:
                    return rules::pull_full(means[i], nbe, -half - m, m);
                }
            };
        };
        core.phases.push_back(std::move(steer));
    } else {
        const std::vector<std::size_t> sizes{n / 2, 1, n - 1 - n / 2};
        const long t_split = detail::floor_long(rmax / (v * (std::sin(nbe / 4.0) - std::sin(nbe / 8.0)))) + 1;
        const long t_steer = std::max<long>(detail::ceil_long(6.0 * pi / (5.0 * nbe)) - 1, 1);
        const int bottom = 2;

        PlanPhase split;
        split.name = "split";
        split.duration = t_split;
        split.constants = {{"margin", nbe / 8.0}};
        split.enter = [sizes, nbe, bottom](const PhaseContext& ctx) -> AgentRule {
            auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
            return [part, nbe, bottom](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                const int g = part->group_of[i];
                if (g == 0) return ControlDecision{nbe / 8.0, rules::clamp_drive(3.0 * nbe / 8.0 - means[i], nbe, nbe / 8.0)};
                if (g == bottom)
                    return ControlDecision{nbe / 8.0, rules::clamp_drive(-3.0 * nbe / 8.0 - means[i], nbe, nbe / 8.0)};
                return ControlDecision{nbe / 8.0, rules::clamp_drive(-means[i], nbe, nbe / 8.0)};
            };
        };
        core.phases.push_back(std::move(split));

        PlanPhase steer;
        steer.name = "steer";
        steer.duration = t_steer;
        steer.constants = {{"target", 3.0 * pi / 4.0}, {"margin", nbe / 8.0}};
        steer.enter = [sizes, nbe, bottom](const PhaseContext& ctx) -> AgentRule {
            auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
            return [part, nbe, bottom](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                static constexpr double target = 3.0 * pi / 4.0;
                const int g = part->group_of[i];
                if (g == 0) {
                    if (means[i] < target - 3.0 * nbe / 4.0) return ControlDecision{nbe / 8.0, 3.0 * nbe / 4.0};
                    if (means[i] > target + 3.0 * nbe / 4.0) return ControlDecision{nbe / 8.0, -3.0 * nbe / 4.0};
                    return ControlDecision{nbe / 8.0, target - means[i]};
                }
                if (g == bottom) {
                    if (means[i] > -target + 3.0 * nbe / 4.0) return ControlDecision{nbe / 8.0, -3.0 * nbe / 4.0};
                    if (means[i] < -target - 3.0 * nbe / 4.0) return ControlDecision{nbe / 8.0, 3.0 * nbe / 4.0};
                    return ControlDecision{nbe / 8.0, -target - means[i]};
                }
                return ControlDecision{nbe / 8.0, rules::clamp_drive(-means[i], nbe, nbe / 8.0)};
            };
        };
        core.phases.push_back(std::move(steer));
    }

    ControlPlan prefix = plan_order(rule, nbe, noise_bound, cfg);
    ControlPlan full = compose(prefix, core);
    full.precondition.reset();
    return full;
}

// ---------------------------------------------------------------------------
// Connectivity-break plan: align, split into two groups that keep a vertical
// gap above every interaction radius for the whole requested window.
// ---------------------------------------------------------------------------
inline ControlPlan plan_break_connectivity(HeadingRule rule, double noise_bound, const SimConfig& cfg, long window) {
    if (window < 0) throw std::invalid_argument("plan_break_connectivity: window must be >= 0");
    if (!(noise_bound > 0)) throw std::invalid_argument("plan_break_connectivity: noise_bound must be > 0");
    cfg.validate();
    const double nbe = detail::maneuver_bound(rule, noise_bound);
    const std::size_t n = cfg.n;
    const double v = cfg.speed;
    const double rmax = cfg.r_max();
    const std::vector<std::size_t> sizes{(n + 1) / 2, n / 2};

    ControlPlan prefix = plan_order(rule, nbe / 2.0, noise_bound, cfg);

    ControlPlan core;
    core.rule = rule;
    core.noise_bound = noise_bound;

    if (cfg.boundary.is_periodic()) {
        const double L = cfg.boundary.side;
        if (!(L > 2.0 * rmax)) {
            std::ostringstream os;
            os << "plan_break_connectivity: need side > 2*r_max, got " << L << " vs " << 2.0 * rmax;
            throw RegimeViolation(os.str());
        }
        int K = 4;
        while (K <= 1000000 && !(L > 1.01 * (2.0 * rmax + 4.0 * v * std::sin(2.0 * nbe / K)))) ++K;
        if (K > 1000000) throw RegimeViolation("plan_break_connectivity: no feasible discretization");
        const double m = nbe / (2.0 * K);
        const long t_gather = detail::ceil_long((3.0 * L / 4.0) / (v * std::sin(nbe / static_cast<double>(K)))) + 1;

        PlanPhase hold;
        hold.name = "gather_hold";
        hold.duration = t_gather + window;
        hold.constants = {{"discretization", static_cast<double>(K)}, {"line_up", 3.0 * L / 4.0}, {"line_down", L / 4.0}};
        hold.enter = [sizes, nbe, m, L](const PhaseContext& ctx) -> AgentRule {
            auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
            return [part, nbe, m, L](const SwarmState& s, std::span<const double> means, std::size_t i, long) {
                const double line = part->group_of[i] == 0 ? 3.0 * L / 4.0 : L / 4.0;
                return rules::line_toggle(means[i], s.positions[i].y, line, nbe, m);
            };
        };
        core.phases.push_back(std::move(hold));
        core.disconnect_window = StepWindow{t_gather, t_gather + window};
    } else {
        const long t_sep = detail::floor_long(rmax / (2.0 * v * std::sin(nbe / 4.0))) + 1;

        PlanPhase hold;
        hold.name = "split_hold";
        hold.duration = t_sep + window;
        hold.constants = {{"separation_steps", static_cast<double>(t_sep)}, {"margin", nbe / 8.0}};
        hold.enter = [sizes, nbe](const PhaseContext& ctx) -> AgentRule {
            auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
            return [part, nbe](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                const double target = part->group_of[i] == 0 ? 3.0 * nbe / 8.0 : -3.0 * nbe / 8.0;
                return ControlDecision{nbe / 8.0, rules::clamp_drive(target - means[i], nbe, nbe / 8.0)};
            };
        };
        core.phases.push_back(std::move(hold));
        core.disconnect_window = StepWindow{t_sep, t_sep + window};
    }

    ControlPlan full = compose(prefix, core);
    full.precondition.reset();
    full.target.reset(); // the claim is about the graph window, not a state set
    return full;
}

// ---------------------------------------------------------------------------
// Choreographies: synchronized turns, vortices, bifurcate-then-merge.
// ---------------------------------------------------------------------------
struct Turn {
    double target = pi / 2.0;
};
struct Vortex {
    double total = 2.0 * two_pi;
};
struct BifurcateThenMerge {};
using Choreography = std::variant<Turn, Vortex, BifurcateThenMerge>;

inline ControlPlan plan_choreography(HeadingRule rule, const Choreography& what, double noise_bound, int discretization,
                                     const SimConfig& cfg, double initial_width = 0.1) {
    if (discretization < 2) throw std::invalid_argument("plan_choreography: discretization must be >= 2");
    if (!(noise_bound > 0)) throw std::invalid_argument("plan_choreography: noise_bound must be > 0");
    if (!(initial_width > 0)) throw std::invalid_argument("plan_choreography: initial_width must be > 0");
    cfg.validate();
    const double nbe = detail::maneuver_bound(rule, noise_bound);
    const int K = discretization;
    const double m = nbe / (2.0 * K);

    ControlPlan plan;
    plan.rule = rule;
    plan.noise_bound = noise_bound;
    plan.precondition = TargetSet::order_box(initial_width);

    const auto turn_steps = [&](double distance, double start_width) {
        const long T =
            detail::ceil_long(((2.0 * distance - start_width) * K + nbe) / (2.0 * (K - 1.0) * nbe));
        return std::max<long>(T, 0);
    };

    if (const Turn* turn = std::get_if<Turn>(&what)) {
        const double target = turn->target;
        const long T = turn_steps(std::abs(target), initial_width);
        plan.target = TargetSet::span_below(std::min(2.0 * nbe / K + initial_width, two_pi * 0.999));
        if (T > 0) {
            plan.phases.push_back(detail::static_phase(
                "turn", T,
                [nbe, m, target](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                    return rules::pull_full(means[i], nbe, target, m);
                },
                {{"target", target}, {"margin", m}}));
        }
        return plan;
    }

    if (const Vortex* vortex = std::get_if<Vortex>(&what)) {
        if (!(vortex->total > 0)) throw std::invalid_argument("plan_choreography: vortex total must be > 0");
        if (rule == HeadingRule::arithmetic) {
            plan.regime.proven = false;
            plan.regime.note = "vortex requires the circular rule's rotational symmetry";
        }
        const double quarter = pi / 2.0;
        const long legs = detail::ceil_long(vortex->total / quarter) + 1;
        plan.target = TargetSet::span_below(std::min(2.0 * nbe / K + initial_width, two_pi * 0.999));
        for (long leg = 0; leg < legs; ++leg) {
            const double center = wrap_heading(static_cast<double>(leg + 1) * quarter);
            const double start_width = leg == 0 ? initial_width : 2.0 * m;
            const long T = std::max<long>(turn_steps(quarter, start_width), 1);
            plan.phases.push_back(detail::static_phase(
                "vortex_leg", T,
                [nbe, m, center](const SwarmState&, std::span<const double> means, std::size_t i, long) {
                    return rules::pull_full_circular(means[i], nbe, center, m);
                },
                {{"center", center}, {"margin", m}}));
        }
        return plan;
    }

    // Bifurcate then merge: vertical split into two synchronized subgroups,
    // then a full realignment.
    const std::size_t n = cfg.n;
    const double v = cfg.speed;
    const double rmax = cfg.r_max();
    const double w0 = std::min(initial_width, nbe);
    const double band = nbe / 8.0;
    const std::vector<std::size_t> sizes{(n + 1) / 2, n / 2};
    const long t_split = detail::floor_long(rmax / (2.0 * v * std::sin(nbe / 4.0))) + 1;
    const long t_steer = std::max<long>(detail::ceil_long((pi - 2.0 * band) / nbe - 0.5), 1);

    ControlPlan split_part;
    split_part.rule = rule;
    split_part.noise_bound = noise_bound;
    split_part.precondition = TargetSet::order_box(w0);

    PlanPhase split;
    split.name = "bifurcate_split";
    split.duration = t_split;
    split.constants = {{"margin", nbe / 8.0}};
    split.enter = [sizes, nbe](const PhaseContext& ctx) -> AgentRule {
        auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
        return [part, nbe](const SwarmState&, std::span<const double> means, std::size_t i, long) {
            const double target = part->group_of[i] == 0 ? 3.0 * nbe / 8.0 : -3.0 * nbe / 8.0;
            return ControlDecision{nbe / 8.0, rules::clamp_drive(target - means[i], nbe, nbe / 8.0)};
        };
    };
    split_part.phases.push_back(std::move(split));

    PlanPhase steer;
    steer.name = "bifurcate_steer";
    steer.duration = t_steer;
    steer.constants = {{"band", band}};
    steer.enter = [sizes, nbe, band](const PhaseContext& ctx) -> AgentRule {
        auto part = std::make_shared<Partition>(partition_by_ordinate(*ctx.entry, sizes));
        return [part, nbe, band](const SwarmState&, std::span<const double> means, std::size_t i, long) {
            const double target = part->group_of[i] == 0 ? pi / 2.0 : -pi / 2.0;
            return rules::pull_banded(means[i], nbe, target, band);
        };
    };
    split_part.phases.push_back(std::move(steer));

    ControlPlan merged = compose(split_part, plan_order(rule, w0, noise_bound, cfg));
    merged.target = TargetSet::order_box(w0);
    merged.precondition = TargetSet::order_box(w0);
    return merged;
}

// Chains an order plan in front of a plan that declares an aligned-start
// precondition.
inline ControlPlan with_order_prefix(const ControlPlan& plan, const SimConfig& cfg) {
    if (!plan.precondition || plan.precondition->kind() != TargetSet::Kind::order_box) return plan;
    ControlPlan prefix = plan_order(plan.rule, plan.precondition->param(), plan.noise_bound, cfg);
    ControlPlan full = compose(prefix, plan);
    full.precondition.reset();
    return full;
}

} // namespace sppkit
