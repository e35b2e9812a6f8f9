#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <sppkit/config.hpp>
#include <sppkit/dynamics.hpp>
#include <sppkit/rng.hpp>

using namespace sppkit;

namespace {

SimConfig open_pair(double r0 = 1.0, double r1 = 1.0) {
    SimConfig cfg;
    cfg.n = 2;
    cfg.speed = 0.01;
    cfg.radii = {r0, r1};
    cfg.boundary = Boundary::open();
    return cfg;
}

SwarmState two_agents(Vec2 a, Vec2 b, double ha, double hb) {
    SwarmState s;
    s.positions = {a, b};
    s.headings = {ha, hb};
    return s;
}

} // namespace

TEST_CASE("wrap_heading maps onto [-pi, pi)") {
    CHECK(wrap_heading(3.0 * pi / 2.0) == doctest::Approx(-pi / 2.0));
    CHECK(wrap_heading(pi) == doctest::Approx(-pi));
    CHECK(wrap_heading(0.0) == 0.0);
    CHECK(wrap_heading(-pi) == doctest::Approx(-pi));
    CHECK_THROWS_AS(wrap_heading(std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(wrap_heading(std::numeric_limits<double>::infinity()), std::invalid_argument);

    SequentialRng rng(11);
    for (int k = 0; k < 2000; ++k) {
        const double x = rng.uniform(-50.0, 50.0);
        const double w = wrap_heading(x);
        CHECK(w >= -pi);
        CHECK(w < pi);
        CHECK(std::abs(std::remainder(w - x, two_pi)) < 1e-9);
    }
}

TEST_CASE("pair_distance: open vs minimum image") {
    SimConfig open_cfg = open_pair();
    CHECK(pair_distance(open_cfg, {0.1, 0.1}, {0.1, 0.1}) == 0.0);
    CHECK(pair_distance(open_cfg, {0.1, 0.1}, {4.9, 4.9}) == doctest::Approx(6.788225099390856).epsilon(1e-12));

    SimConfig per = open_cfg;
    per.boundary = Boundary::periodic(5.0);
    CHECK(pair_distance(per, {0.1, 0.1}, {4.9, 4.9}) == doctest::Approx(0.2828427124746190).epsilon(1e-12));

    SequentialRng rng(3);
    for (int k = 0; k < 500; ++k) {
        const Vec2 a{rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)};
        const Vec2 b{rng.uniform(0.0, 5.0), rng.uniform(0.0, 5.0)};
        CHECK(pair_distance(per, a, b) == pair_distance(per, b, a));
        CHECK(pair_distance(per, a, b) <= 5.0 * std::numbers::sqrt2 / 2.0 + 1e-12);
        CHECK(pair_distance(open_cfg, a, b) == pair_distance(open_cfg, b, a));
    }
}

TEST_CASE("neighbor_set is inclusive and directed") {
    SimConfig cfg = open_pair(1.0, 2.0);
    SwarmState s = two_agents({0, 0}, {1, 0}, 0, 0);
    CHECK(neighbor_set(cfg, s, 0) == std::vector<std::uint32_t>{0, 1}); // distance exactly r_0

    s.positions[1] = {1.5, 0};
    CHECK(neighbor_set(cfg, s, 0) == std::vector<std::uint32_t>{0});    // 1.5 > r_0
    CHECK(neighbor_set(cfg, s, 1) == std::vector<std::uint32_t>{0, 1}); // 1.5 <= r_1

    s.positions[1] = {10, 10};
    CHECK(neighbor_set(cfg, s, 0) == std::vector<std::uint32_t>{0}); // isolated agent keeps itself
}

TEST_CASE("local_mean_heading matches both update rules") {
    SimConfig cfg = open_pair();
    SwarmState s = two_agents({0, 0}, {0.5, 0}, 0.0, pi / 2.0);
    CHECK(local_mean_heading(cfg, s, 0, HeadingRule::circular) == doctest::Approx(pi / 4.0));
    CHECK(local_mean_heading(cfg, s, 0, HeadingRule::arithmetic) == doctest::Approx(pi / 4.0));

    // across the cut the two rules diverge
    s.headings = {-3.0, 3.0};
    CHECK(local_mean_heading(cfg, s, 0, HeadingRule::arithmetic) == doctest::Approx(0.0));
    CHECK(local_mean_heading(cfg, s, 0, HeadingRule::circular) == doctest::Approx(-pi));

    // isolated agent keeps its own heading under both rules
    s.positions[1] = {40, 40};
    s.headings = {1.2, -2.0};
    CHECK(local_mean_heading(cfg, s, 0, HeadingRule::circular) == doctest::Approx(1.2));
    CHECK(local_mean_heading(cfg, s, 0, HeadingRule::arithmetic) == doctest::Approx(1.2));
}

TEST_CASE("degenerate circular mean: throwing call vs in-step fallback") {
    SimConfig cfg = open_pair();
    // weighted sums cancelling exactly requires degenerate weights; real trig
    // values of wrapped headings never cancel bit-exactly
    cfg.weight_rule = [](const SwarmState&, std::size_t, std::size_t, double, double) { return 0.0; };
    SwarmState s = two_agents({0, 0}, {0.5, 0}, 1.25, -2.0);
    CHECK_THROWS_AS(local_mean_heading(cfg, s, 0, HeadingRule::circular), DegenerateMeanError);
    CHECK_THROWS_AS(local_mean_heading(cfg, s, 0, HeadingRule::arithmetic), DegenerateMeanError);

    std::vector<DegenerateMeanEvent> events;
    const auto means = mean_headings(cfg, s, HeadingRule::circular, &events);
    CHECK(events.size() == 2);
    CHECK(means[0] == doctest::Approx(1.25)); // falls back to the agent's own heading
    CHECK(means[1] == doctest::Approx(-2.0));

    SwarmState after = step(cfg, s, HeadingRule::circular, StepInput::noise({0.0, 0.0}), &events);
    CHECK(after.headings[0] == doctest::Approx(1.25));
}

TEST_CASE("step: straight motion, consensus, periodic wrap") {
    SimConfig cfg = open_pair();
    SwarmState s = two_agents({0, 0}, {30, 30}, 0.0, 0.0);
    const StepInput zero = StepInput::noise({0.0, 0.0});
    SwarmState next = step(cfg, s, HeadingRule::arithmetic, zero);
    CHECK(next.t == 1);
    CHECK(next.headings[0] == 0.0);
    CHECK(next.positions[0].x == doctest::Approx(0.01));
    CHECK(next.positions[0].y == 0.0);

    s = two_agents({0, 0}, {0.5, 0}, 0.0, pi / 2.0);
    next = step(cfg, s, HeadingRule::arithmetic, zero);
    CHECK(next.headings[0] == doctest::Approx(pi / 4.0));
    CHECK(next.headings[1] == doctest::Approx(pi / 4.0));

    SimConfig per = cfg;
    per.boundary = Boundary::periodic(5.0);
    s = two_agents({4.999, 0}, {4.999, 3}, 0.0, 0.0);
    next = step(per, s, HeadingRule::arithmetic, zero);
    CHECK(next.positions[0].x == doctest::Approx(0.009).epsilon(1e-9));
    CHECK(next.positions[0].x >= 0.0);
    CHECK(next.positions[0].x < 5.0);
}

TEST_CASE("heading range and periodic coordinates hold after noisy steps") {
    SimConfig cfg = make_config(8, 0.05, 1.0, Boundary::periodic(3.0), NoiseSpec::uniform(1.5), 5);
    SwarmState s = uniform_random_state(cfg, 5);
    for (long t = 0; t < 200; ++t) {
        const auto xi = sample(cfg.noise, cfg.n, 5, static_cast<std::uint64_t>(t));
        s = step(cfg, s, t % 2 == 0 ? HeadingRule::circular : HeadingRule::arithmetic, StepInput::noise(xi));
        for (double h : s.headings) {
            CHECK(h >= -pi);
            CHECK(h < pi);
        }
        for (const Vec2& p : s.positions) {
            CHECK(p.x >= 0.0);
            CHECK(p.x < 3.0);
            CHECK(p.y >= 0.0);
            CHECK(p.y < 3.0);
        }
    }
}

TEST_CASE("synchronous update commutes with relabeling") {
    SimConfig cfg;
    cfg.n = 6;
    cfg.speed = 0.1;
    cfg.radii = {0.5, 1.0, 1.5, 0.7, 2.0, 0.9};
    cfg.boundary = Boundary::open();

    SwarmState s;
    SequentialRng rng(17);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        s.positions.push_back({rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)});
        s.headings.push_back(wrap_heading(rng.uniform(-pi, pi)));
    }
    std::vector<double> input(cfg.n);
    for (double& x : input) x = rng.uniform(-0.3, 0.3);

    std::vector<std::size_t> perm(cfg.n);
    std::iota(perm.begin(), perm.end(), 0u);
    std::swap(perm[0], perm[3]);
    std::swap(perm[1], perm[5]);
    std::swap(perm[2], perm[4]);

    SimConfig pcfg = cfg;
    SwarmState ps = s;
    std::vector<double> pinput(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        pcfg.radii[i] = cfg.radii[perm[i]];
        ps.positions[i] = s.positions[perm[i]];
        ps.headings[i] = s.headings[perm[i]];
        pinput[i] = input[perm[i]];
    }

    for (HeadingRule rule : {HeadingRule::circular, HeadingRule::arithmetic}) {
        const SwarmState a = step(cfg, s, rule, StepInput::noise(input));
        const SwarmState b = step(pcfg, ps, rule, StepInput::noise(pinput));
        for (std::size_t i = 0; i < cfg.n; ++i) {
            CHECK(b.headings[i] == doctest::Approx(a.headings[perm[i]]).epsilon(1e-14));
            CHECK(b.positions[i].x == doctest::Approx(a.positions[perm[i]].x).epsilon(1e-14));
        }
    }
}

TEST_CASE("circular mean of a confined arc stays within the arc") {
    SequentialRng rng(23);
    SimConfig cfg;
    cfg.n = 5;
    cfg.speed = 0.01;
    cfg.radii.assign(5, 10.0); // everyone sees everyone
    cfg.boundary = Boundary::open();
    for (int trial = 0; trial < 300; ++trial) {
        const double lo = rng.uniform(-pi + 0.1, -0.5);
        const double len = rng.uniform(0.01, std::min(pi - 0.02, pi - 0.1 - lo) - 0.0);
        SwarmState s;
        double mn = pi, mx = -pi;
        for (std::size_t i = 0; i < cfg.n; ++i) {
            const double h = lo + rng.uniform(0.0, len);
            s.positions.push_back({rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)});
            s.headings.push_back(h);
            mn = std::min(mn, h);
            mx = std::max(mx, h);
        }
        const double m = local_mean_heading(cfg, s, 0, HeadingRule::circular);
        CHECK(m >= mn - 1e-12);
        CHECK(m <= mx + 1e-12);
    }
}

TEST_CASE("isolated agent repeats its heading under zero input") {
    SimConfig cfg = open_pair(0.5, 0.5);
    SwarmState s = two_agents({0, 0}, {100, 100}, 1.234, -2.5);
    for (int k = 0; k < 5; ++k) {
        s = step(cfg, s, HeadingRule::circular, StepInput::noise({0.0, 0.0}));
        CHECK(s.headings[0] == doctest::Approx(1.234));
        CHECK(s.headings[1] == doctest::Approx(-2.5));
    }
}

TEST_CASE("grid neighbor search is bit-identical to the naive scan") {
    SimConfig naive = make_config(24, 0.03, 0.8, Boundary::periodic(4.0), NoiseSpec::uniform(0.6), 9);
    naive.radii[3] = 0.0;
    naive.radii[7] = 1.9;
    SimConfig grid = naive;
    grid.search = NeighborSearch::grid;

    SwarmState a = uniform_random_state(naive, 9);
    SwarmState b = a;
    for (long t = 0; t < 60; ++t) {
        const auto xi = sample(naive.noise, naive.n, 9, static_cast<std::uint64_t>(t));
        a = step(naive, a, HeadingRule::circular, StepInput::noise(xi));
        b = step(grid, b, HeadingRule::circular, StepInput::noise(xi));
        for (std::size_t i = 0; i < naive.n; ++i) {
            CHECK(a.headings[i] == b.headings[i]);
            CHECK(a.positions[i].x == b.positions[i].x);
            CHECK(a.positions[i].y == b.positions[i].y);
        }
    }

    SimConfig open_grid = make_config(16, 0.05, 1.2, Boundary::open(), NoiseSpec::uniform(0.6), 4);
    open_grid.search = NeighborSearch::grid;
    SimConfig open_naive = open_grid;
    open_naive.search = NeighborSearch::naive;
    SwarmState c = uniform_random_state(open_naive, 4);
    SwarmState d = c;
    for (long t = 0; t < 40; ++t) {
        const auto xi = sample(open_grid.noise, open_grid.n, 4, static_cast<std::uint64_t>(t));
        c = step(open_naive, c, HeadingRule::arithmetic, StepInput::noise(xi));
        d = step(open_grid, d, HeadingRule::arithmetic, StepInput::noise(xi));
        for (std::size_t i = 0; i < open_grid.n; ++i) CHECK(c.headings[i] == d.headings[i]);
    }
}

TEST_CASE("weight rule probing accepts the default and rejects violations") {
    SimConfig cfg = make_config(6, 0.01, 1.0, Boundary::periodic(5.0));
    CHECK(probe_weight_rule(cfg));

    SimConfig bad = cfg;
    bad.weight_rule = [](const SwarmState&, std::size_t, std::size_t, double, double) { return 1.0; }; // ignores radius
    CHECK_FALSE(probe_weight_rule(bad));

    SimConfig no_inertia = cfg;
    no_inertia.weight_rule = [](const SwarmState&, std::size_t i, std::size_t j, double dist, double ri) {
        if (i == j) return 0.0;
        return dist <= ri ? 1.0 : 0.0;
    };
    CHECK_FALSE(probe_weight_rule(no_inertia));
}

TEST_CASE("control inputs enforce the admissibility box") {
    const std::vector<double> drive{0.5, -0.5};
    const std::vector<double> margin{0.1, 0.1};
    const std::vector<double> dist{0.05, -0.1};
    CHECK_NOTHROW(StepInput::control(drive, margin, dist, 0.6));

    CHECK_THROWS_AS(StepInput::control(std::vector<double>{0.55, 0.0}, margin, dist, 0.6), InadmissibleControl);
    CHECK_THROWS_AS(StepInput::control(drive, std::vector<double>{0.0, 0.1}, dist, 0.6), InadmissibleControl);
    CHECK_THROWS_AS(StepInput::control(drive, std::vector<double>{0.7, 0.1}, dist, 0.6), InadmissibleControl);
    CHECK_THROWS_AS(StepInput::control(drive, margin, std::vector<double>{0.2, 0.0}, 0.6), InadmissibleControl);
}
