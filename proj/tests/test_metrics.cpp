#include <doctest.h>

#include <cmath>
#include <vector>

#include <sppkit/config.hpp>
#include <sppkit/metrics.hpp>
#include <sppkit/rng.hpp>
#include <sppkit/verify.hpp>

using namespace sppkit;

namespace {

SwarmState state_with(std::vector<Vec2> pos, std::vector<double> head) {
    SwarmState s;
    s.positions = std::move(pos);
    s.headings = std::move(head);
    return s;
}

} // namespace

TEST_CASE("order parameter") {
    CHECK(order_parameter(std::vector<double>{0.7, 0.7, 0.7}) == doctest::Approx(1.0));
    CHECK(order_parameter(std::vector<double>{0.0, -pi}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(order_parameter(std::vector<double>{0.0, pi / 2.0}) == doctest::Approx(std::numbers::sqrt2 / 2.0));

    // invariant under a common rotation
    SequentialRng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> h(6), r(6);
        const double shift = rng.uniform(-pi, pi);
        for (std::size_t i = 0; i < h.size(); ++i) {
            h[i] = wrap_heading(rng.uniform(-pi, pi));
            r[i] = wrap_heading(h[i] + shift);
        }
        CHECK(order_parameter(h) == doctest::Approx(order_parameter(r)).epsilon(1e-12));
    }
}

TEST_CASE("heading span: exact values and oracle agreement") {
    CHECK(heading_span(std::vector<double>{1.1, 1.1, 1.1}) == doctest::Approx(0.0));
    CHECK(heading_span(std::vector<double>{-3.0, 3.0}) == doctest::Approx(two_pi - 6.0));
    CHECK(heading_span(std::vector<double>{0.0, pi / 2.0, -pi / 2.0}) == doctest::Approx(pi));

    SequentialRng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform(0.0, 9.0));
        std::vector<double> h(n);
        for (double& x : h) x = wrap_heading(rng.uniform(-pi, pi));
        const double exact = heading_span(h);
        const double grid = span_grid_oracle(h, 10000);
        CHECK(grid >= exact - 1e-12);
        CHECK(grid <= exact + two_pi / 10000.0 + 1e-12);
    }
}

TEST_CASE("interaction graph edges follow the receiver's radius") {
    SimConfig cfg;
    cfg.n = 2;
    cfg.speed = 0.01;
    cfg.boundary = Boundary::open();

    cfg.radii = {1.0, 1.0};
    auto g = interaction_graph(cfg, state_with({{0, 0}, {3, 0}}, {0, 0}));
    CHECK(g.has_edge(0, 0));
    CHECK(g.has_edge(1, 1));
    CHECK_FALSE(g.has_edge(0, 1));
    CHECK_FALSE(g.has_edge(1, 0));

    g = interaction_graph(cfg, state_with({{0, 0}, {0.5, 0}}, {0, 0}));
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));

    cfg.radii = {1.0, 2.0};
    g = interaction_graph(cfg, state_with({{0, 0}, {1.5, 0}}, {0, 0}));
    CHECK(g.has_edge(0, 1));       // source 0 within receiver 1's radius 2
    CHECK_FALSE(g.has_edge(1, 0)); // source 1 outside receiver 0's radius 1
}

TEST_CASE("connectivity: weak vs strong") {
    DirectedGraphSnapshot g;
    g.n = 1;
    g.out = {{0}};
    CHECK(connected(g, Connectivity::weak));
    CHECK(connected(g, Connectivity::strong));

    g.n = 2;
    g.out = {{0, 1}, {1}}; // single directed edge 0 -> 1 plus self loops
    CHECK(connected(g, Connectivity::weak));
    CHECK_FALSE(connected(g, Connectivity::strong));

    g.n = 3;
    g.out = {{0, 1}, {1, 2}, {0, 2}}; // directed 3-cycle
    CHECK(connected(g, Connectivity::strong));

    g.out = {{0}, {1}, {2}};
    CHECK_FALSE(connected(g, Connectivity::weak));

    // strong implies weak on random graphs
    SequentialRng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        DirectedGraphSnapshot r;
        r.n = 5;
        r.out.assign(5, {});
        for (std::uint32_t j = 0; j < 5; ++j) {
            r.out[j].push_back(j);
            for (std::uint32_t i = 0; i < 5; ++i)
                if (i != j && rng.uniform01() < 0.3) r.out[j].push_back(i);
            std::sort(r.out[j].begin(), r.out[j].end());
        }
        if (connected(r, Connectivity::strong)) CHECK(connected(r, Connectivity::weak));
    }
}

TEST_CASE("homogeneous radii make the graph symmetric: weak equals strong") {
    SimConfig cfg = make_config(8, 0.01, 1.2, Boundary::periodic(4.0));
    SequentialRng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        SwarmState s;
        for (std::size_t i = 0; i < cfg.n; ++i) {
            s.positions.push_back({rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0)});
            s.headings.push_back(0.0);
        }
        const auto g = interaction_graph(cfg, s);
        CHECK(connected(g, Connectivity::weak) == connected(g, Connectivity::strong));
    }
}

TEST_CASE("window union connectivity") {
    DirectedGraphSnapshot isolated;
    isolated.n = 2;
    isolated.out = {{0}, {1}};
    DirectedGraphSnapshot linked;
    linked.n = 2;
    linked.out = {{0, 1}, {1}};

    std::vector<DirectedGraphSnapshot> graphs{isolated, isolated, isolated, isolated};
    CHECK_FALSE(window_union_connected(graphs, 0, 3));

    graphs[2] = linked; // connected at one step inside the window
    CHECK(window_union_connected(graphs, 0, 3));
    CHECK_FALSE(window_union_connected(graphs, 0, 1));

    CHECK_THROWS_AS(window_union_connected(graphs, 2, 5), std::out_of_range);
}

TEST_CASE("span-order implication holds on confined random vectors") {
    SequentialRng rng(13);
    for (double level : {0.1, 0.3, 0.5}) {
        const double bound = span_order_bound(level);
        for (int trial = 0; trial < 2000; ++trial) {
            const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform(0.0, 38.0));
            const double center = rng.uniform(-pi, pi);
            std::vector<double> h(n);
            for (double& x : h) x = wrap_heading(center + rng.uniform(0.0, bound));
            CHECK(heading_span(h) <= bound + 1e-9);
            CHECK(order_parameter(h) >= 1.0 - level - 1e-12);
            CHECK(span_order_check(h, level));
        }
    }
    CHECK(span_order_bound(0.3) == doctest::Approx(1.05870).epsilon(1e-4));
}
