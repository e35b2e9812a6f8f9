#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "adversary.hpp"
#include "angles.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "plans.hpp"
#include "replay.hpp"

namespace sppkit {

// ---------------------------------------------------------------------------
// Reachability replay harness.
// ---------------------------------------------------------------------------
struct ReachabilityReport {
    long trials = 0;
    long failures = 0;
    long horizon = 0;
    std::string adversary;
    std::vector<double> measures; // target statistic at the horizon, per trial
    std::vector<char> reached;

    std::string summary() const {
        std::ostringstream os;
        os << "reachability: trials=" << trials << " failures=" << failures << " horizon=" << horizon
           << " adversary=" << adversary;
        return os.str();
    }

    std::string to_csv() const {
        std::ostringstream os;
        os << "trial,reached,measure_at_horizon\n";
        for (std::size_t k = 0; k < measures.size(); ++k)
            os << k << "," << static_cast<int>(reached[k]) << "," << measures[k] << "\n";
        return os.str();
    }
};

using InitialSampler = std::function<SwarmState(std::uint64_t trial)>;

enum class AdversaryKind { zero, endpoint, uniform };

namespace detail {

inline std::unique_ptr<Adversary> make_adversary(AdversaryKind kind, std::uint64_t seed) {
    switch (kind) {
    case AdversaryKind::zero:
        return std::make_unique<ZeroAdversary>();
    case AdversaryKind::endpoint:
        return std::make_unique<EndpointAdversary>(seed);
    case AdversaryKind::uniform:
        return std::make_unique<UniformAdversary>(seed);
    }
    return std::make_unique<ZeroAdversary>();
}

inline std::optional<long> exhaustive_pattern_count(std::size_t n, long horizon, long cap) {
    double count = 1.0;
    for (long k = 0; k < horizon * static_cast<long>(n); ++k) {
        count *= 3.0;
        if (count > static_cast<double>(cap)) return std::nullopt;
    }
    return static_cast<long>(count);
}

} // namespace detail

// Replays the plan from sampled initial states and counts target misses. When
// the {-margin, 0, +margin}^(n * horizon) grid is small enough (<= 1e5
// patterns) every disturbance pattern is enumerated; otherwise the requested
// adversary drives each trial.
inline ReachabilityReport check_robust_reachability(const SimConfig& cfg, const ControlPlan& plan,
                                                    const InitialSampler& sample_initial, AdversaryKind kind,
                                                    long trials, std::uint64_t seed = 1) {
    if (!plan.target) throw ConfigError("check_robust_reachability: plan declares no target set");
    ReachabilityReport rep;
    rep.horizon = plan.horizon();

    const auto patterns = detail::exhaustive_pattern_count(cfg.n, rep.horizon, 100000);
    ReplayOptions opt;
    opt.check_target = true;

    if (patterns) {
        rep.adversary = "exhaustive{-margin,0,+margin} (" + std::to_string(*patterns) + " patterns)";
        for (long trial = 0; trial < trials; ++trial) {
            const SwarmState init = sample_initial(static_cast<std::uint64_t>(trial));
            std::vector<int> signs(static_cast<std::size_t>(rep.horizon) * cfg.n, -1);
            for (long p = 0; p < *patterns; ++p) {
                ScriptedAdversary adv(signs, cfg.n, init.t);
                const ReplayResult r = replay_plan(cfg, plan, init, adv, opt);
                rep.trials += 1;
                rep.measures.push_back(r.measure_at_horizon);
                rep.reached.push_back(r.reached() ? 1 : 0);
                if (!r.reached()) rep.failures += 1;
                // odometer over {-1, 0, +1}
                for (std::size_t d = 0; d < signs.size(); ++d) {
                    if (signs[d] < 1) {
                        ++signs[d];
                        break;
                    }
                    signs[d] = -1;
                }
            }
        }
        return rep;
    }

    for (long trial = 0; trial < trials; ++trial) {
        const SwarmState init = sample_initial(static_cast<std::uint64_t>(trial));
        auto adv = detail::make_adversary(kind, seed + static_cast<std::uint64_t>(trial) * 0x9e3779b9ULL);
        if (rep.adversary.empty()) rep.adversary = adv->describe();
        const ReplayResult r = replay_plan(cfg, plan, init, *adv, opt);
        rep.trials += 1;
        rep.measures.push_back(r.measure_at_horizon);
        rep.reached.push_back(r.reached() ? 1 : 0);
        if (!r.reached()) rep.failures += 1;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Span / order-parameter analytics.
// ---------------------------------------------------------------------------

// Span threshold below which the order parameter is guaranteed >= 1 - level.
inline double span_order_bound(double level) {
    if (!(level > 0 && level < 1)) throw std::invalid_argument("span_order_bound: level must lie in (0, 1)");
    return std::acos((1.0 - level) * (1.0 - level));
}

// The implication itself, evaluated on one heading vector.
inline bool span_order_check(std::span<const double> headings, double level) {
    const double bound = span_order_bound(level);
    if (heading_span(headings) > bound) return true; // premise false
    return order_parameter(headings) >= 1.0 - level - 1e-12;
}

// Grid upper bound for the heading span: scans interval starts over a uniform
// grid of candidate anchors; overestimates the exact span by at most
// 2*pi/grid.
inline double span_grid_oracle(std::span<const double> headings, std::size_t grid) {
    if (grid < 2) throw std::invalid_argument("span_grid_oracle: grid must be >= 2");
    if (headings.empty()) throw std::invalid_argument("span_grid_oracle: empty input");
    std::vector<double> h(headings.begin(), headings.end());
    for (double& x : h) x = wrap_heading(x);
    double best = two_pi;
    for (std::size_t k = 0; k < grid; ++k) {
        const double c = -pi + two_pi * static_cast<double>(k) / static_cast<double>(grid);
        double cover = 0.0;
        for (double x : h) {
            double off = x - c;
            if (off < 0) off += two_pi;
            cover = std::max(cover, off);
            if (cover >= best) break;
        }
        best = std::min(best, cover);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Switching statistics.
// ---------------------------------------------------------------------------

// Alternating first-passage times: entries at even positions (0-based) hit the
// upper threshold, odd positions the lower one.
struct SwitchRecord {
    double hi = 0.0;
    double lo = 0.0;
    std::vector<long> times;

    long ordered_hits() const { return static_cast<long>((times.size() + 1) / 2); }
    long disordered_hits() const { return static_cast<long>(times.size() / 2); }

    // Durations of completed order->disorder cycles (tau_{2k+2} - tau_{2k}
    // with tau_0 = 0).
    std::vector<long> cycle_gaps() const {
        std::vector<long> gaps;
        long prev = 0;
        for (std::size_t k = 1; k < times.size(); k += 2) {
            gaps.push_back(times[k] - prev);
            prev = times[k];
        }
        return gaps;
    }
};

inline SwitchRecord extract_passages(std::span<const double> series, double hi, double lo) {
    if (series.empty()) throw InsufficientData("extract_passages: empty series");
    SwitchRecord rec;
    rec.hi = hi;
    rec.lo = lo;
    bool seeking_hi = true;
    long from = 0; // first admissible index for the next passage
    for (long t = 0; t < static_cast<long>(series.size()); ++t) {
        if (t < from) continue;
        const double x = series[static_cast<std::size_t>(t)];
        if (seeking_hi ? (x >= hi) : (x <= lo)) {
            rec.times.push_back(t);
            seeking_hi = !seeking_hi;
            from = t + 1;
        }
    }
    return rec;
}

inline SwitchRecord extract_switches(std::span<const double> phi, double level) {
    if (!(level > 0 && level < 0.5)) throw std::invalid_argument("extract_switches: level must lie in (0, 1/2)");
    return extract_passages(phi, 1.0 - level, level);
}

// ---------------------------------------------------------------------------
// Gap-tail diagnostics.
// ---------------------------------------------------------------------------
struct TailReport {
    std::size_t gap_count = 0;
    double log_survival_slope = 0.0; // least squares of ln S(t) against t
    bool envelope_found = false;
    double envelope_base = 1.0;   // c in c^floor(t / T)
    double envelope_period = 0.0; // T
    std::vector<std::pair<long, double>> survival;

    std::string summary() const {
        std::ostringstream os;
        os << "gaps=" << gap_count << " slope=" << log_survival_slope << " envelope="
           << (envelope_found ? "yes" : "no");
        if (envelope_found) os << " (base=" << envelope_base << ", period=" << envelope_period << ")";
        return os.str();
    }

    std::string to_csv() const {
        std::ostringstream os;
        os << "t,survival\n";
        for (const auto& [t, s] : survival) os << t << "," << s << "\n";
        return os.str();
    }
};

// Empirical survival of the switch gaps plus a geometric-envelope search: the
// bound's constants are existential, so the report states whether any
// (base, period) pair dominates the data rather than fitting specific values.
inline TailReport tail_report(std::span<const long> gaps) {
    if (gaps.size() < 20) throw InsufficientData("tail_report: need at least 20 gaps");
    TailReport rep;
    rep.gap_count = gaps.size();

    std::vector<long> sorted(gaps.begin(), gaps.end());
    std::sort(sorted.begin(), sorted.end());
    const double total = static_cast<double>(sorted.size());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        if (k + 1 < sorted.size() && sorted[k + 1] == sorted[k]) continue;
        const double surviving = total - static_cast<double>(k + 1);
        rep.survival.emplace_back(sorted[k], surviving / total);
    }

    // Least-squares slope of ln S(t) over points with S > 0.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t pts = 0;
    for (const auto& [t, s] : rep.survival) {
        if (s <= 0) continue;
        const double x = static_cast<double>(t);
        const double y = std::log(s);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++pts;
    }
    if (pts >= 2) {
        const double denom = static_cast<double>(pts) * sxx - sx * sx;
        rep.log_survival_slope = denom != 0 ? (static_cast<double>(pts) * sxy - sx * sy) / denom : 0.0;
    }

    // Envelope search over candidate periods.
    const long max_gap = sorted.back();
    double best_base = 2.0;
    double best_period = 0.0;
    for (long period = std::max<long>(max_gap / 64, 1); period <= max_gap + 1; period = std::max(period + 1, period * 5 / 4)) {
        double base = 0.0;
        for (const auto& [t, s] : rep.survival) {
            const long k = t / period;
            if (k < 1) continue;
            if (s <= 0) continue;
            base = std::max(base, std::pow(s, 1.0 / static_cast<double>(k)));
        }
        if (base == 0.0) base = 0.5; // everything below the first period
        if (base < best_base) {
            best_base = base;
            best_period = static_cast<double>(period);
        }
    }
    rep.envelope_base = best_base;
    rep.envelope_period = best_period;
    rep.envelope_found = best_base < 1.0 - 1e-9;
    return rep;
}

} // namespace sppkit
