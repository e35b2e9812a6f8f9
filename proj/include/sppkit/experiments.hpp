#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "adversary.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "noise.hpp"
#include "plans.hpp"
#include "replay.hpp"
#include "rng.hpp"
#include "state.hpp"

namespace sppkit {

enum class RunMode { free, steered, verify };

struct PlanSpec {
    std::string kind = "order"; // order | disorder | span | break | turn | vortex | bifurcate_merge
    double width = 0.6;
    double level = 0.1;
    double noise_bound = std::numeric_limits<double>::quiet_NaN(); // defaults to uniform half width
    long window = 1000;
    int discretization = 10;
    double turn_target = pi / 2.0;
    double vortex_total = 2.0 * two_pi;
    double initial_width = 0.1;
    bool order_prefix = true;
};

struct RadiusSpec {
    enum class Kind { homogeneous, list, random_uniform };
    Kind kind = Kind::homogeneous;
    double value = 1.0;
    std::vector<double> list;
    double lo = 0.0, hi = 2.0;

    std::vector<double> resolve(std::size_t n, std::uint64_t seed) const {
        switch (kind) {
        case Kind::homogeneous:
            return std::vector<double>(n, value);
        case Kind::list:
            if (list.size() != n) throw ConfigError("radius.list length must equal n");
            return list;
        case Kind::random_uniform: {
            std::vector<double> out(n);
            for (std::size_t i = 0; i < n; ++i) {
                RandomStream s(seed, stream_tag::radius, i);
                out[i] = s.uniform(0, lo, hi);
            }
            return out;
        }
        }
        return {};
    }
};

struct ExperimentConfig {
    HeadingRule rule = HeadingRule::arithmetic;
    std::size_t n = 10;
    double speed = 0.01;
    Boundary boundary = Boundary::periodic(5.0);
    RadiusSpec radius;
    NoiseSpec noise = NoiseSpec::uniform(0.6);
    NeighborSearch search = NeighborSearch::naive;
    std::vector<std::uint64_t> seeds{1};
    long steps = 1000;
    long stride = 1;
    RunMode mode = RunMode::free;
    std::string out = "out/run";
    bool dump_states = false;
    double open_extent = 5.0;
    std::string adversary = "uniform"; // zero | endpoint | uniform
    long trials = 100;
    PlanSpec plan;

    SimConfig sim_config(std::uint64_t seed) const {
        SimConfig cfg;
        cfg.n = n;
        cfg.speed = speed;
        cfg.radii = radius.resolve(n, seed);
        cfg.boundary = boundary;
        cfg.noise = noise;
        cfg.search = search;
        cfg.seed = seed;
        cfg.validate();
        return cfg;
    }

    double plan_noise_bound() const {
        if (!std::isnan(plan.noise_bound)) return plan.noise_bound;
        if (noise.kind == NoiseSpec::Kind::uniform) return noise.half_width;
        throw ConfigError("plan.noise_bound is required for non-uniform noise");
    }
};

// ---------------------------------------------------------------------------
// Config text format: `key = value` lines with dotted keys, '#' comments and
// comma-separated lists. Grammar documented in the README.
// ---------------------------------------------------------------------------
namespace detail {

inline std::string trim(std::string s) {
    const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && issp(s.front())) s.erase(s.begin());
    while (!s.empty() && issp(s.back())) s.pop_back();
    return s;
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for '" + key + "': " + v);
    }
}

inline long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for '" + key + "': " + v);
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: bad boolean for '" + key + "': " + v);
}

inline std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(v);
    while (std::getline(is, cur, ',')) out.push_back(trim(cur));
    return out;
}

} // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig exp;
    bool saw_boundary_open = false;
    std::optional<double> side;

    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config: expected 'key = value': " + line);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ConfigError("config: empty key or value: " + line);

        if (key == "rule") {
            if (value == "circular")
                exp.rule = HeadingRule::circular;
            else if (value == "arithmetic")
                exp.rule = HeadingRule::arithmetic;
            else
                throw ConfigError("config: rule must be circular or arithmetic");
        } else if (key == "n") {
            exp.n = static_cast<std::size_t>(detail::parse_long(key, value));
        } else if (key == "speed") {
            exp.speed = detail::parse_double(key, value);
        } else if (key == "boundary") {
            if (value == "open")
                saw_boundary_open = true;
            else if (value == "periodic")
                saw_boundary_open = false;
            else
                throw ConfigError("config: boundary must be open or periodic");
        } else if (key == "side") {
            side = detail::parse_double(key, value);
        } else if (key == "radius") {
            exp.radius.kind = RadiusSpec::Kind::homogeneous;
            exp.radius.value = detail::parse_double(key, value);
        } else if (key == "radius.list") {
            exp.radius.kind = RadiusSpec::Kind::list;
            exp.radius.list.clear();
            for (const auto& item : detail::split_list(value)) exp.radius.list.push_back(detail::parse_double(key, item));
        } else if (key == "radius.uniform") {
            const auto items = detail::split_list(value);
            if (items.size() != 2) throw ConfigError("config: radius.uniform expects 'lo, hi'");
            exp.radius.kind = RadiusSpec::Kind::random_uniform;
            exp.radius.lo = detail::parse_double(key, items[0]);
            exp.radius.hi = detail::parse_double(key, items[1]);
        } else if (key == "noise.kind") {
            if (value == "uniform")
                exp.noise.kind = NoiseSpec::Kind::uniform;
            else if (value == "gaussian")
                exp.noise.kind = NoiseSpec::Kind::gaussian;
            else if (value == "truncated_gaussian")
                exp.noise.kind = NoiseSpec::Kind::truncated_gaussian;
            else
                throw ConfigError("config: unknown noise.kind: " + value);
        } else if (key == "noise.half_width") {
            exp.noise.half_width = detail::parse_double(key, value);
        } else if (key == "noise.sigma") {
            exp.noise.sigma = detail::parse_double(key, value);
        } else if (key == "noise.cut") {
            exp.noise.cut = detail::parse_double(key, value);
        } else if (key == "seeds" || key == "seed") {
            exp.seeds.clear();
            for (const auto& item : detail::split_list(value))
                exp.seeds.push_back(static_cast<std::uint64_t>(detail::parse_long(key, item)));
            if (exp.seeds.empty()) throw ConfigError("config: seeds must be nonempty");
        } else if (key == "steps") {
            exp.steps = detail::parse_long(key, value);
        } else if (key == "stride") {
            exp.stride = detail::parse_long(key, value);
        } else if (key == "mode") {
            if (value == "free")
                exp.mode = RunMode::free;
            else if (value == "steered")
                exp.mode = RunMode::steered;
            else if (value == "verify")
                exp.mode = RunMode::verify;
            else
                throw ConfigError("config: mode must be free, steered or verify");
        } else if (key == "out") {
            exp.out = value;
        } else if (key == "states") {
            exp.dump_states = detail::parse_bool(key, value);
        } else if (key == "open_extent") {
            exp.open_extent = detail::parse_double(key, value);
        } else if (key == "adversary") {
            if (value != "zero" && value != "endpoint" && value != "uniform")
                throw ConfigError("config: adversary must be zero, endpoint or uniform");
            exp.adversary = value;
        } else if (key == "trials") {
            exp.trials = detail::parse_long(key, value);
        } else if (key == "search") {
            if (value == "naive")
                exp.search = NeighborSearch::naive;
            else if (value == "grid")
                exp.search = NeighborSearch::grid;
            else
                throw ConfigError("config: search must be naive or grid");
        } else if (key == "plan.kind") {
            exp.plan.kind = value;
        } else if (key == "plan.width") {
            exp.plan.width = detail::parse_double(key, value);
        } else if (key == "plan.level") {
            exp.plan.level = detail::parse_double(key, value);
        } else if (key == "plan.noise_bound") {
            exp.plan.noise_bound = detail::parse_double(key, value);
        } else if (key == "plan.window") {
            exp.plan.window = detail::parse_long(key, value);
        } else if (key == "plan.discretization") {
            exp.plan.discretization = static_cast<int>(detail::parse_long(key, value));
        } else if (key == "plan.turn_target") {
            exp.plan.turn_target = detail::parse_double(key, value);
        } else if (key == "plan.vortex_total") {
            exp.plan.vortex_total = detail::parse_double(key, value);
        } else if (key == "plan.initial_width") {
            exp.plan.initial_width = detail::parse_double(key, value);
        } else if (key == "plan.order_prefix") {
            exp.plan.order_prefix = detail::parse_bool(key, value);
        } else {
            throw ConfigError("config: unknown key: " + key);
        }
    }

    if (saw_boundary_open)
        exp.boundary = Boundary::open();
    else
        exp.boundary = Boundary::periodic(side.value_or(exp.boundary.is_periodic() ? exp.boundary.side : 5.0));
    exp.noise.validate();
    if (exp.steps < 1) throw ConfigError("config: steps must be >= 1");
    if (exp.stride < 1) throw ConfigError("config: stride must be >= 1");
    return exp;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// Runs.
// ---------------------------------------------------------------------------
struct Event {
    long t = 0;
    std::string kind;
    std::string detail;
};

struct TraceRecord {
    MetricSeries metrics;
    std::vector<SwarmState> states; // empty unless state recording was requested
    std::vector<Event> events;
    SwarmState final_state;
};

inline TraceRecord run_free(const SimConfig& cfg, HeadingRule rule, long steps, long stride, std::uint64_t seed,
                            bool record_states = false, double open_extent = 5.0) {
    cfg.validate();
    if (steps < 1) throw ConfigError("run_free: steps must be >= 1");
    if (stride < 1) throw ConfigError("run_free: stride must be >= 1");

    TraceRecord rec;
    rec.metrics.stride = stride;
    SwarmState state = uniform_random_state(cfg, seed, open_extent);
    if (record_states) rec.states.push_back(state);
    rec.metrics.push(measure(cfg, state));

    std::vector<DegenerateMeanEvent> degenerate;
    for (long t = 0; t < steps; ++t) {
        const auto xi = sample(cfg.noise, cfg.n, seed, static_cast<std::uint64_t>(t));
        degenerate.clear();
        const auto means = mean_headings(cfg, state, rule, &degenerate);
        state = advance(cfg, state, means, xi);
        for (const auto& ev : degenerate)
            rec.events.push_back({ev.t, "degenerate_mean", "agent " + std::to_string(ev.agent)});
        if (record_states) rec.states.push_back(state);
        if (state.t % stride == 0) rec.metrics.push(measure(cfg, state));
    }
    rec.final_state = std::move(state);
    return rec;
}

inline TraceRecord run_free(const ExperimentConfig& exp, std::uint64_t seed) {
    return run_free(exp.sim_config(seed), exp.rule, exp.steps, exp.stride, seed, exp.dump_states, exp.open_extent);
}

inline ControlPlan build_plan(const PlanSpec& spec, HeadingRule rule, const SimConfig& cfg, double noise_bound) {
    ControlPlan plan;
    if (spec.kind == "order") {
        plan = plan_order(rule, spec.width, noise_bound, cfg);
    } else if (spec.kind == "disorder") {
        plan = plan_disorder(rule, spec.level, noise_bound, cfg);
    } else if (spec.kind == "span") {
        plan = plan_span_at_least_pi(rule, noise_bound, cfg);
    } else if (spec.kind == "break") {
        plan = plan_break_connectivity(rule, noise_bound, cfg, spec.window);
    } else if (spec.kind == "turn") {
        plan = plan_choreography(rule, Turn{spec.turn_target}, noise_bound, spec.discretization, cfg, spec.initial_width);
    } else if (spec.kind == "vortex") {
        plan = plan_choreography(rule, Vortex{spec.vortex_total}, noise_bound, spec.discretization, cfg, spec.initial_width);
    } else if (spec.kind == "bifurcate_merge") {
        plan = plan_choreography(rule, BifurcateThenMerge{}, noise_bound, spec.discretization, cfg, spec.initial_width);
    } else {
        throw ConfigError("unknown plan.kind: " + spec.kind);
    }
    if (spec.order_prefix) plan = with_order_prefix(plan, cfg);
    return plan;
}

inline std::unique_ptr<Adversary> make_adversary(const std::string& name, std::uint64_t seed) {
    if (name == "zero") return std::make_unique<ZeroAdversary>();
    if (name == "endpoint") return std::make_unique<EndpointAdversary>(seed);
    if (name == "uniform") return std::make_unique<UniformAdversary>(seed);
    throw ConfigError("unknown adversary: " + name);
}

inline TraceRecord run_steered(const SimConfig& cfg, const ControlPlan& plan, Adversary& adv, long stride,
                               std::uint64_t seed, bool record_states = false, double open_extent = 5.0) {
    ReplayOptions opt;
    opt.metrics_stride = stride;
    opt.record_states = record_states;
    const SwarmState init = uniform_random_state(cfg, seed, open_extent);
    ReplayResult r = replay_plan(cfg, plan, init, adv, opt);

    TraceRecord rec;
    rec.metrics = std::move(r.metrics);
    rec.states = std::move(r.states);
    for (const auto& pb : r.phase_log) rec.events.push_back({pb.step, "phase", pb.name});
    for (const auto& ev : r.degenerate_events)
        rec.events.push_back({ev.t, "degenerate_mean", "agent " + std::to_string(ev.agent)});
    if (r.first_hit) rec.events.push_back({*r.first_hit, "target_reached", plan.target ? plan.target->describe() : ""});
    rec.events.push_back(
        {plan.horizon(), "horizon", plan.target ? "measure=" + std::to_string(r.measure_at_horizon) : "end"});
    rec.final_state = std::move(r.final_state);
    return rec;
}

inline TraceRecord run_steered(const ExperimentConfig& exp, std::uint64_t seed) {
    const SimConfig cfg = exp.sim_config(seed);
    const ControlPlan plan = build_plan(exp.plan, exp.rule, cfg, exp.plan_noise_bound());
    auto adv = make_adversary(exp.adversary, seed ^ 0x5bd1e995ULL);
    return run_steered(cfg, plan, *adv, exp.stride, seed, exp.dump_states, exp.open_extent);
}

// ---------------------------------------------------------------------------
// Figure presets: periodic box of side 5, speed 0.01, uniform noise on
// [-0.6, 0.6], indicator weights, three population sizes.
// ---------------------------------------------------------------------------
struct FigureResult {
    int id = 0;
    std::vector<std::pair<std::size_t, TraceRecord>> series; // one per population size
    std::vector<SimConfig> configs;                          // matching configurations
};

inline FigureResult reproduce_figure(int id, std::uint64_t seed, long steps = 1000000, long stride = 100) {
    if (id < 1 || id > 4) throw ConfigError("figure id must be 1..4");
    const HeadingRule rule = (id == 1 || id == 3) ? HeadingRule::arithmetic : HeadingRule::circular;
    const bool homogeneous = id <= 2;

    FigureResult fig;
    fig.id = id;
    for (std::size_t n : {std::size_t{10}, std::size_t{25}, std::size_t{40}}) {
        SimConfig cfg;
        cfg.n = n;
        cfg.speed = 0.01;
        cfg.boundary = Boundary::periodic(5.0);
        cfg.noise = NoiseSpec::uniform(0.6);
        cfg.seed = seed;
        if (homogeneous) {
            cfg.radii.assign(n, 1.0);
        } else {
            RadiusSpec rs;
            rs.kind = RadiusSpec::Kind::random_uniform;
            rs.lo = 0.0;
            rs.hi = 2.0;
            cfg.radii = rs.resolve(n, seed);
        }
        cfg.validate();
        fig.series.emplace_back(n, run_free(cfg, rule, steps, stride, seed));
        fig.configs.push_back(cfg);
    }
    return fig;
}

// ---------------------------------------------------------------------------
// CSV persistence: decimal text with 17 significant digits.
// ---------------------------------------------------------------------------
namespace detail {

inline void write_g17(std::ostream& os, double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    os << buf;
}

} // namespace detail

inline void export_metrics_csv(const MetricSeries& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write metrics file: " + path);
    out << "t,phi,d_theta,weak_connected\n";
    for (std::size_t k = 0; k < m.size(); ++k) {
        out << m.t[k] << ",";
        detail::write_g17(out, m.phi[k]);
        out << ",";
        detail::write_g17(out, m.span[k]);
        out << "," << static_cast<int>(m.weak_connected[k]) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

inline void export_states_csv(std::span<const SwarmState> states, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write state file: " + path);
    out << "t,agent,x1,x2,theta\n";
    for (const SwarmState& s : states) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            out << s.t << "," << i << ",";
            detail::write_g17(out, s.positions[i].x);
            out << ",";
            detail::write_g17(out, s.positions[i].y);
            out << ",";
            detail::write_g17(out, s.headings[i]);
            out << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

inline MetricSeries import_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read metrics file: " + path);
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != "t,phi,d_theta,weak_connected")
        throw IoError("bad metrics header in " + path);
    MetricSeries m;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto cells = detail::split_list(line);
        if (cells.size() != 4) throw IoError("bad metrics row in " + path + ": " + line);
        m.t.push_back(detail::parse_long("t", cells[0]));
        m.phi.push_back(detail::parse_double("phi", cells[1]));
        m.span.push_back(detail::parse_double("d_theta", cells[2]));
        m.weak_connected.push_back(static_cast<char>(detail::parse_long("weak_connected", cells[3])));
    }
    if (m.size() >= 2) m.stride = m.t[1] - m.t[0];
    return m;
}

} // namespace sppkit
