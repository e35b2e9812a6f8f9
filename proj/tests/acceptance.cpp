// Acceptance suite: one deterministic or statistical check per shipped
// guarantee, each printed as a single pass/fail line. Run via ctest or
// directly; exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <sppkit/sppkit.hpp>

using namespace sppkit;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimConfig desk_open(std::size_t n) { return make_config(n, 0.01, 1.0, Boundary::open()); }

// 1. Alignment plan: horizon 10 exactly, 200 random starts, endpoint
//    disturbances, zero misses, under one second.
Outcome criterion_order_plan() {
    const auto t0 = std::chrono::steady_clock::now();
    const SimConfig cfg = desk_open(10);
    const ControlPlan plan = plan_order(HeadingRule::arithmetic, 0.6, 0.6, cfg);
    if (plan.horizon() != 10) return {false, "horizon != 10"};
    long failures = 0;
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        EndpointAdversary adv(5000 + trial);
        const auto r = replay_plan(cfg, plan, uniform_random_state(cfg, trial), adv);
        if (!r.reached() || *r.first_hit > 10) ++failures;
    }
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "failures=" << failures << "/200, " << dt << " s";
    return {failures == 0 && dt < 1.0, os.str()};
}

// 2. Composed alignment + disorder plan: horizon 350 = 10 + 335 + 5, 100
//    trials with random admissible disturbances, order parameter <= 0.1.
Outcome criterion_disorder_plan() {
    const auto t0 = std::chrono::steady_clock::now();
    const SimConfig cfg = desk_open(10);
    const ControlPlan disorder = plan_disorder(HeadingRule::arithmetic, 0.1, 0.6, cfg);
    const ControlPlan plan = with_order_prefix(disorder, cfg);
    if (plan.horizon() != 350) return {false, "composed horizon != 350"};
    if (disorder.phases.size() != 2 || disorder.phases[0].duration != 335 || disorder.phases[1].duration != 5)
        return {false, "disorder phases != 335 + 5"};
    long failures = 0;
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        UniformAdversary adv(81000 + trial);
        const auto r = replay_plan(cfg, plan, uniform_random_state(cfg, 300 + trial), adv);
        worst = std::max(worst, r.measure_at_horizon);
        if (!(r.measure_at_horizon <= 0.1 + 1e-9)) ++failures;
    }
    const double dt = seconds_since(t0);
    std::ostringstream os;
    os << "failures=" << failures << "/100, worst phi=" << worst << ", " << dt << " s";
    return {failures == 0 && dt < 5.0, os.str()};
}

// 3. Periodic regime gate: threshold value, side 5 admissible, side 2 not.
Outcome criterion_periodic_gate() {
    const double thr = periodic_disorder_threshold(0.6, 0.01, 1.0, 10, 0.1);
    const double expected = 2.0 + 0.02 * (std::sin(0.3) + std::sin(0.9) + std::sin(1.5));
    if (std::abs(thr - expected) > 1e-12) return {false, "threshold mismatch"};

    bool ok_large = false, rejected_small = false;
    try {
        (void)plan_disorder(HeadingRule::arithmetic, 0.1, 0.6, make_config(10, 0.01, 1.0, Boundary::periodic(5.0)));
        ok_large = true;
    } catch (const RegimeViolation&) {
    }
    try {
        (void)plan_disorder(HeadingRule::arithmetic, 0.1, 0.6, make_config(10, 0.01, 1.0, Boundary::periodic(2.0)));
    } catch (const RegimeViolation&) {
        rejected_small = true;
    }
    std::ostringstream os;
    os << "threshold=" << thr << ", L=5 ok=" << ok_large << ", L=2 rejected=" << rejected_small;
    return {ok_large && rejected_small, os.str()};
}

// 4. Span bound forces order: 1e5 confined vectors per level.
Outcome criterion_span_order_property() {
    SequentialRng rng(4000);
    long violations = 0;
    for (double level : {0.1, 0.3, 0.5}) {
        const double bound = span_order_bound(level);
        for (int k = 0; k < 100000; ++k) {
            const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform(0.0, 38.999));
            const double center = rng.uniform(-pi, pi);
            std::vector<double> h(n);
            for (double& x : h) x = wrap_heading(center + rng.uniform(0.0, bound));
            if (heading_span(h) > bound + 1e-12) continue; // construction guarantees the premise
            if (!(order_parameter(h) >= 1.0 - level - 1e-12)) ++violations;
        }
    }
    std::ostringstream os;
    os << "violations=" << violations << "/300000";
    return {violations == 0, os.str()};
}

// 5. Exact span against the grid oracle.
Outcome criterion_span_oracle() {
    SequentialRng rng(4500);
    long misses = 0;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform(0.0, 38.999));
        std::vector<double> h(n);
        for (double& x : h) x = wrap_heading(rng.uniform(-pi, pi));
        const double exact = heading_span(h);
        const double grid = span_grid_oracle(h, 10000);
        const double err = std::abs(grid - exact);
        worst = std::max(worst, err);
        if (err > two_pi / 10000.0 + 1e-12 || grid < exact - 1e-12) ++misses;
    }
    std::ostringstream os;
    os << "misses=" << misses << "/1000, worst err=" << worst;
    return {misses == 0, os.str()};
}

// 6. Connectivity-break witness over a 1000-step window.
Outcome criterion_connectivity_break() {
    const auto t0 = std::chrono::steady_clock::now();
    const SimConfig cfg = desk_open(10);
    const long window = 1000;
    const ControlPlan plan = plan_break_connectivity(HeadingRule::arithmetic, 0.6, cfg, window);
    long failures = 0;
    ReplayOptions opt;
    opt.record_states = true;
    opt.check_target = false;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        UniformAdversary adv(90000 + trial);
        const auto r = replay_plan(cfg, plan, uniform_random_state(cfg, 700 + trial), adv, opt);
        if (window_union_connected(cfg, r.states, static_cast<std::size_t>(plan.disconnect_window->first),
                                   static_cast<std::size_t>(window)))
            ++failures;
    }
    std::ostringstream os;
    os << "failures=" << failures << "/100, window=[" << plan.disconnect_window->first << ", "
       << plan.disconnect_window->last << "], " << seconds_since(t0) << " s";
    return {failures == 0, os.str()};
}

struct FreeRunStats {
    long hi_hits = 0;
    long lo_hits = 0;
    double max_span = 0.0;
    double seconds = 0.0;
};

// Shared traces for criteria 7 and 8: the documented simulation setup
// (n=10, v=0.01, L=5, r=1, uniform noise on [-0.6, 0.6]), 1e6 steps.
std::vector<FreeRunStats> free_run_stats() {
    std::vector<FreeRunStats> out;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto t0 = std::chrono::steady_clock::now();
        const SimConfig cfg = make_config(10, 0.01, 1.0, Boundary::periodic(5.0), NoiseSpec::uniform(0.6), seed);
        const TraceRecord rec = run_free(cfg, HeadingRule::arithmetic, 1000000, 1, seed);
        FreeRunStats st;
        const auto passages = extract_passages(rec.metrics.phi, 0.85, 0.4);
        st.hi_hits = passages.ordered_hits();
        st.lo_hits = passages.disordered_hits();
        for (double s : rec.metrics.span) st.max_span = std::max(st.max_span, s);
        st.seconds = seconds_since(t0);
        out.push_back(st);
    }
    return out;
}

// 7. Switching recurrence: both thresholds crossed at least three times each
//    for at least 8 of 10 seeds, within the runtime budget.
Outcome criterion_switching(const std::vector<FreeRunStats>& stats) {
    int good = 0;
    double slowest = 0.0;
    for (const auto& st : stats) {
        if (st.hi_hits >= 3 && st.lo_hits >= 3) ++good;
        slowest = std::max(slowest, st.seconds);
    }
    std::ostringstream os;
    os << "seeds passing=" << good << "/10, slowest seed " << slowest << " s";
    return {good >= 8 && slowest <= 300.0, os.str()};
}

// 8. Span excursions: heading span reaches pi at least once per seed for at
//    least 8 of 10 seeds.
Outcome criterion_span_excursion(const std::vector<FreeRunStats>& stats) {
    int good = 0;
    for (const auto& st : stats)
        if (st.max_span >= pi) ++good;
    std::ostringstream os;
    os << "seeds with span >= pi: " << good << "/10";
    return {good >= 8, os.str()};
}

// 9. Quarter turn: synchronization band throughout, final headings within
//    0.06 of the target, 100 of 100 trials.
Outcome criterion_turn() {
    const SimConfig cfg = desk_open(10);
    const ControlPlan plan = plan_choreography(HeadingRule::arithmetic, Turn{pi / 2.0}, 0.6, 10, cfg, 0.1);
    long failures = 0;
    ReplayOptions opt;
    opt.record_states = true;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        EndpointAdversary adv(61000 + trial);
        const auto r = replay_plan(cfg, plan, aligned_random_state(cfg, 900 + trial, 0.1), adv, opt);
        bool ok = true;
        for (const SwarmState& s : r.states) {
            double lo = 1e9, hi = -1e9;
            for (double h : s.headings) {
                lo = std::min(lo, h);
                hi = std::max(hi, h);
            }
            if (hi - lo > 2.0 * 0.6 / 10.0 + 0.2 + 1e-12) ok = false;
        }
        for (double h : r.final_state.headings)
            if (std::abs(h - pi / 2.0) > 0.06 + 1e-12) ok = false;
        if (!ok) ++failures;
    }
    std::ostringstream os;
    os << "failures=" << failures << "/100, horizon=" << plan.horizon();
    return {failures == 0, os.str()};
}

// 10. Noise certificate: exact uniform bound plus the empirical check.
Outcome criterion_noise_certificate() {
    const NoiseSpec spec = NoiseSpec::uniform(0.6);
    const auto cert = certificate(spec, 0.6, 1);
    if (cert.rho_lower != 1.0 / 1.2) return {false, "rho != 1/1.2 exactly"};
    const auto rep = empirical_density_check(spec, cert, 1000000, 60);
    std::ostringstream os;
    os << "rho=" << cert.rho_lower << ", density check " << rep.summary();
    return {rep.pass, os.str()};
}

} // namespace

int main() {
    const auto stats = free_run_stats();

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"order-plan exactness (horizon 10, endpoint adversary)", criterion_order_plan},
        {"disorder-plan exactness (composed horizon 350)", criterion_disorder_plan},
        {"periodic regime gate (threshold 2.0415)", criterion_periodic_gate},
        {"span bound forces order parameter (3 x 1e5 vectors)", criterion_span_order_property},
        {"heading span matches the grid oracle (1e3 vectors)", criterion_span_oracle},
        {"connectivity-break witness (1000-step window)", criterion_connectivity_break},
        {"switching recurrence (1e6 steps, 10 seeds)", [&] { return criterion_switching(stats); }},
        {"span excursions reach pi (same traces)", [&] { return criterion_span_excursion(stats); }},
        {"quarter-turn choreography (band + landing)", criterion_turn},
        {"noise certificate exactness (uniform, 1e6 samples)", criterion_noise_certificate},
    };

    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome out;
        try {
            out = criteria[k].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        if (!out.pass) ++failed;
        std::printf("[%s] %zu. %s — %s\n", out.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    out.detail.c_str());
        std::fflush(stdout);
    }
    if (failed) std::printf("%d criterion(s) failed\n", failed);
    return failed == 0 ? 0 : 1;
}
