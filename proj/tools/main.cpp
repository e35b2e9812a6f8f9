// Command-line front end: free runs, steered replays, reachability reports,
// figure presets and switching statistics over exported metrics.
//
// Exit codes: 0 success, 1 regime/precondition violation, 2 I/O error,
// 3 verification failures.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <sppkit/sppkit.hpp>

using namespace sppkit;

namespace {

void ensure_parent_dir(const std::string& path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
        if (ec) throw IoError("cannot create directory " + parent.string());
    }
}

void write_text(const std::string& path, const std::string& body) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << body;
    if (!out) throw IoError("write failed: " + path);
}

struct SeedArtifacts {
    std::uint64_t seed = 0;
    std::vector<std::string> files;
    std::string note;
};

void write_index(const std::string& out, const std::vector<SeedArtifacts>& artifacts) {
    std::ostringstream os;
    os << "seed,file\n";
    for (const auto& a : artifacts)
        for (const auto& f : a.files) os << a.seed << "," << f << "\n";
    write_text(out + "_index.csv", os.str());
}

SeedArtifacts emit_trace(const ExperimentConfig& exp, std::uint64_t seed, const TraceRecord& rec) {
    SeedArtifacts art;
    art.seed = seed;
    const std::string metrics_path = exp.out + "_seed" + std::to_string(seed) + "_metrics.csv";
    ensure_parent_dir(metrics_path);
    export_metrics_csv(rec.metrics, metrics_path);
    art.files.push_back(metrics_path);
    if (exp.dump_states && !rec.states.empty()) {
        const std::string states_path = exp.out + "_seed" + std::to_string(seed) + "_states.csv";
        export_states_csv(rec.states, states_path);
        art.files.push_back(states_path);
    }
    return art;
}

ExperimentConfig load_with_overrides(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
                                     const std::string& out, long steps) {
    ExperimentConfig exp = load_config(config_path);
    if (!seeds.empty()) exp.seeds = seeds;
    if (!out.empty()) exp.out = out;
    if (steps > 0) exp.steps = steps;
    return exp;
}

int cmd_run(const ExperimentConfig& exp) {
    std::vector<std::future<SeedArtifacts>> jobs;
    for (std::uint64_t seed : exp.seeds)
        jobs.push_back(std::async(std::launch::async, [&exp, seed] { return emit_trace(exp, seed, run_free(exp, seed)); }));
    std::vector<SeedArtifacts> artifacts;
    for (auto& j : jobs) artifacts.push_back(j.get());
    write_index(exp.out, artifacts);
    for (const auto& a : artifacts)
        for (const auto& f : a.files) std::printf("wrote %s\n", f.c_str());
    return 0;
}

int cmd_steer(const ExperimentConfig& exp) {
    const SimConfig cfg0 = exp.sim_config(exp.seeds.front());
    const ControlPlan plan = build_plan(exp.plan, exp.rule, cfg0, exp.plan_noise_bound());
    std::printf("%s", plan.describe().c_str());
    write_text(exp.out + "_plan.txt", plan.describe());

    std::vector<SeedArtifacts> artifacts;
    for (std::uint64_t seed : exp.seeds) {
        const TraceRecord rec = run_steered(exp, seed);
        SeedArtifacts art = emit_trace(exp, seed, rec);
        for (const Event& ev : rec.events)
            if (ev.kind == "target_reached") art.note = "target reached at step " + std::to_string(ev.t);
        std::printf("seed %llu: %s\n", static_cast<unsigned long long>(seed),
                    art.note.empty() ? "target not reached within the horizon" : art.note.c_str());
        artifacts.push_back(std::move(art));
    }
    write_index(exp.out, artifacts);
    return 0;
}

int cmd_verify(const ExperimentConfig& exp, long trials_override) {
    const std::uint64_t seed = exp.seeds.front();
    const SimConfig cfg = exp.sim_config(seed);
    const ControlPlan plan = build_plan(exp.plan, exp.rule, cfg, exp.plan_noise_bound());
    const long trials = trials_override > 0 ? trials_override : exp.trials;

    AdversaryKind kind = AdversaryKind::uniform;
    if (exp.adversary == "zero") kind = AdversaryKind::zero;
    if (exp.adversary == "endpoint") kind = AdversaryKind::endpoint;

    const double extent = exp.open_extent;
    const auto sampler = [&cfg, seed, extent](std::uint64_t trial) {
        return uniform_random_state(cfg, seed + 0x1000 * (trial + 1), extent);
    };
    const ReachabilityReport rep = check_robust_reachability(cfg, plan, sampler, kind, trials, seed);
    std::printf("%s\n", rep.summary().c_str());
    write_text(exp.out + "_report.csv", rep.to_csv());
    write_text(exp.out + "_report.txt", rep.summary() + "\n" + plan.describe());
    std::printf("wrote %s_report.csv\n", exp.out.c_str());
    return rep.failures > 0 ? 3 : 0;
}

int cmd_figure(int id, std::uint64_t seed, const std::string& out, long steps, long stride) {
    const FigureResult fig = reproduce_figure(id, seed, steps, stride);
    std::vector<SeedArtifacts> artifacts;
    SeedArtifacts art;
    art.seed = seed;
    for (const auto& [n, rec] : fig.series) {
        const std::string path = out + "_fig" + std::to_string(id) + "_n" + std::to_string(n) + "_metrics.csv";
        ensure_parent_dir(path);
        export_metrics_csv(rec.metrics, path);
        art.files.push_back(path);
        std::printf("wrote %s\n", path.c_str());
    }
    artifacts.push_back(std::move(art));
    write_index(out + "_fig" + std::to_string(id), artifacts);
    return 0;
}

int cmd_switches(const std::string& in, double level, std::optional<double> hi, std::optional<double> lo,
                 const std::string& out) {
    const MetricSeries m = import_metrics_csv(in);
    const SwitchRecord rec = (hi && lo) ? extract_passages(m.phi, *hi, *lo) : extract_switches(m.phi, level);
    std::printf("passages: %zu (ordered hits %ld, disordered hits %ld)\n", rec.times.size(), rec.ordered_hits(),
                rec.disordered_hits());
    const auto gaps = rec.cycle_gaps();
    if (m.stride > 1) std::printf("note: metrics stride is %ld; passage times are in sampled rows\n", m.stride);
    if (gaps.size() >= 20) {
        const TailReport tail = tail_report(gaps);
        std::printf("tail: %s\n", tail.summary().c_str());
        if (!out.empty()) {
            write_text(out + "_survival.csv", tail.to_csv());
            std::printf("wrote %s_survival.csv\n", out.c_str());
        }
    } else {
        std::printf("tail: insufficient cycles (%zu) for diagnostics\n", gaps.size());
    }
    if (!out.empty()) {
        std::ostringstream os;
        os << "index,time\n";
        for (std::size_t k = 0; k < rec.times.size(); ++k) os << k + 1 << "," << rec.times[k] << "\n";
        write_text(out + "_switches.csv", os.str());
        std::printf("wrote %s_switches.csv\n", out.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sppkit: noisy self-propelled swarm simulation, steering and verification"};
    app.require_subcommand(1);

    std::string config_path, out_override, switches_in, switches_out;
    std::vector<std::uint64_t> seed_override;
    long steps_override = 0, trials_override = 0, fig_steps = 1000000, fig_stride = 100;
    int figure_id = 1;
    std::uint64_t fig_seed = 1;
    double level = 0.1;
    std::optional<double> hi, lo;
    std::string fig_out = "out/figure";

    auto* run = app.add_subcommand("run", "free (noise-driven) simulation runs");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--seed", seed_override, "override the config seed list");
    run->add_option("--out", out_override, "output path prefix");
    run->add_option("--steps", steps_override, "override the step count");

    auto* steer = app.add_subcommand("steer", "replay a control plan against an adversary");
    steer->add_option("--config", config_path, "experiment config file")->required();
    steer->add_option("--seed", seed_override, "override the config seed list");
    steer->add_option("--out", out_override, "output path prefix");
    steer->add_option("--steps", steps_override, "override the step count");

    auto* verify = app.add_subcommand("verify", "reachability report for a plan");
    verify->add_option("--config", config_path, "experiment config file")->required();
    verify->add_option("--seed", seed_override, "override the config seed list");
    verify->add_option("--out", out_override, "output path prefix");
    verify->add_option("--trials", trials_override, "override the trial count");

    auto* figure = app.add_subcommand("figure", "canonical periodic-box presets (1-4)");
    figure->add_option("--figure", figure_id, "preset id")->required()->check(CLI::Range(1, 4));
    figure->add_option("--seed", fig_seed, "seed");
    figure->add_option("--out", fig_out, "output path prefix");
    figure->add_option("--steps", fig_steps, "steps per series");
    figure->add_option("--stride", fig_stride, "metric sampling stride");

    auto* switches = app.add_subcommand("switches", "switching statistics from a metrics CSV");
    switches->add_option("--in", switches_in, "metrics CSV")->required();
    switches->add_option("--level", level, "threshold level (hi = 1-level, lo = level)");
    switches->add_option("--hi", hi, "explicit upper threshold");
    switches->add_option("--lo", lo, "explicit lower threshold");
    switches->add_option("--out", switches_out, "output path prefix for switch/survival tables");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(load_with_overrides(config_path, seed_override, out_override, steps_override));
        if (steer->parsed())
            return cmd_steer(load_with_overrides(config_path, seed_override, out_override, steps_override));
        if (verify->parsed())
            return cmd_verify(load_with_overrides(config_path, seed_override, out_override, 0), trials_override);
        if (figure->parsed()) return cmd_figure(figure_id, fig_seed, fig_out, fig_steps, fig_stride);
        if (switches->parsed()) return cmd_switches(switches_in, level, hi, lo, switches_out);
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const RegimeViolation& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const InadmissibleControl& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
