#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "adversary.hpp"
#include "angles.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "plans.hpp"
#include "state.hpp"

namespace sppkit {

struct ReplayOptions {
    long metrics_stride = 0;   // 0 = no metric series
    bool record_states = false;
    bool track_turning = false;
    bool check_target = true;
};

struct PhaseBoundary {
    long step = 0;
    std::string name;
};

struct ReplayResult {
    MetricSeries metrics;
    std::vector<SwarmState> states; // entry state plus one per step when recorded
    std::vector<DegenerateMeanEvent> degenerate_events;
    std::vector<PhaseBoundary> phase_log;
    std::optional<long> first_hit; // step (from replay start) at which the target was first met
    double measure_at_horizon = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> turning; // per-agent cumulative signed heading change
    SwarmState final_state;

    bool reached() const { return first_hit.has_value(); }
};

// Executes a plan from the given state. Every control decision is validated
// against Definition-4 admissibility; the adversary fills in the disturbance.
inline ReplayResult replay_plan(const SimConfig& cfg, const ControlPlan& plan, const SwarmState& init, Adversary& adv,
                                const ReplayOptions& opt = {}) {
    cfg.validate();
    validate_state(cfg, init);
    const std::size_t n = cfg.n;

    ReplayResult res;
    res.turning.assign(opt.track_turning ? n : 0, 0.0);

    SwarmState state = init;
    long step = 0; // steps completed since replay start

    const auto sample_metrics = [&](const SwarmState& s) {
        if (opt.metrics_stride > 0 && step % opt.metrics_stride == 0) res.metrics.push(measure(cfg, s));
    };
    const auto check_target = [&](const SwarmState& s) {
        if (opt.check_target && plan.target && !res.first_hit && plan.target->contains(s)) res.first_hit = step;
    };

    if (opt.metrics_stride > 0) res.metrics.stride = opt.metrics_stride;
    if (opt.record_states) res.states.push_back(state);
    sample_metrics(state);
    check_target(state);

    std::vector<double> drive(n), margin(n), disturbance(n), previous(n);
    for (const PlanPhase& phase : plan.phases) {
        res.phase_log.push_back({step, phase.name});
        PhaseContext ctx{&cfg, &state, step};
        AgentRule rule = phase.enter(ctx);
        for (long k = 0; k < phase.duration; ++k) {
            const auto means = mean_headings(cfg, state, plan.rule, &res.degenerate_events);
            for (std::size_t i = 0; i < n; ++i) {
                const ControlDecision d = rule(state, means, i, k);
                drive[i] = d.drive;
                margin[i] = d.margin;
                disturbance[i] = adv.draw(i, step, d.margin);
            }
            const StepInput input = StepInput::control(drive, margin, disturbance, plan.noise_bound);
            if (opt.track_turning) previous = state.headings;
            state = advance(cfg, state, means, input.values());
            ++step;
            if (opt.track_turning)
                for (std::size_t i = 0; i < n; ++i) res.turning[i] += circular_diff(state.headings[i], previous[i]);
            if (opt.record_states) res.states.push_back(state);
            sample_metrics(state);
            check_target(state);
        }
    }

    if (plan.target) res.measure_at_horizon = plan.target->measure(state);
    res.final_state = std::move(state);
    return res;
}

} // namespace sppkit
