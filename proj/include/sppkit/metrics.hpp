#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "angles.hpp"
#include "config.hpp"
#include "dynamics.hpp"
#include "state.hpp"

namespace sppkit {

// Normalized magnitude of the summed unit heading vectors, in [0, 1].
inline double order_parameter(std::span<const double> headings) {
    if (headings.empty()) throw std::invalid_argument("order_parameter: empty input");
    double sx = 0.0, sy = 0.0;
    for (double h : headings) {
        sx += std::cos(h);
        sy += std::sin(h);
    }
    return std::sqrt(sx * sx + sy * sy) / static_cast<double>(headings.size());
}

// Length of the shortest circular arc covering all headings.
inline double heading_span(std::span<const double> headings) { return circular_cover(headings).length; }

// Snapshot of the interaction graph: edge (j, i) present when j is within
// receiver i's radius. Self-loops always present.
struct DirectedGraphSnapshot {
    std::size_t n = 0;
    std::vector<std::vector<std::uint32_t>> out; // out[j] = receivers reachable from source j

    bool has_edge(std::size_t from, std::size_t to) const {
        const auto& row = out[from];
        return std::binary_search(row.begin(), row.end(), static_cast<std::uint32_t>(to));
    }
};

inline DirectedGraphSnapshot interaction_graph(const SimConfig& cfg, const SwarmState& s) {
    DirectedGraphSnapshot g;
    g.n = s.size();
    g.out.assign(g.n, {});
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::size_t j = 0; j < g.n; ++j) {
            if (pair_distance(cfg, s.positions[i], s.positions[j]) <= cfg.radii[i])
                g.out[j].push_back(static_cast<std::uint32_t>(i)); // source j -> receiver i
        }
    }
    for (auto& row : g.out) std::sort(row.begin(), row.end());
    return g;
}

namespace detail {

struct Dsu {
    std::vector<std::uint32_t> parent;
    explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(std::uint32_t a, std::uint32_t b) { parent[find(a)] = find(b); }
    bool all_connected() {
        if (parent.empty()) return true;
        const std::uint32_t root = find(0);
        for (std::uint32_t v = 1; v < parent.size(); ++v)
            if (find(v) != root) return false;
        return true;
    }
};

inline void dfs_order(const std::vector<std::vector<std::uint32_t>>& adj, std::uint32_t start, std::vector<char>& seen,
                      std::vector<std::uint32_t>* order) {
    seen[start] = 1;
    std::vector<std::pair<std::uint32_t, std::size_t>> frames{{start, 0}};
    while (!frames.empty()) {
        auto& [v, idx] = frames.back();
        if (idx < adj[v].size()) {
            const std::uint32_t w = adj[v][idx++];
            if (!seen[w]) {
                seen[w] = 1;
                frames.emplace_back(w, 0);
            }
        } else {
            if (order) order->push_back(v);
            frames.pop_back();
        }
    }
}

} // namespace detail

enum class Connectivity { weak, strong };

inline bool connected(const DirectedGraphSnapshot& g, Connectivity mode) {
    if (g.n <= 1) return true;
    if (mode == Connectivity::weak) {
        detail::Dsu dsu(g.n);
        for (std::size_t j = 0; j < g.n; ++j)
            for (std::uint32_t i : g.out[j])
                dsu.unite(static_cast<std::uint32_t>(j), i);
        return dsu.all_connected();
    }
    // Kosaraju: one SCC containing every vertex.
    std::vector<char> seen(g.n, 0);
    std::vector<std::uint32_t> order;
    for (std::uint32_t v = 0; v < g.n; ++v)
        if (!seen[v]) detail::dfs_order(g.out, v, seen, &order);
    std::vector<std::vector<std::uint32_t>> rev(g.n);
    for (std::size_t j = 0; j < g.n; ++j)
        for (std::uint32_t i : g.out[j]) rev[i].push_back(static_cast<std::uint32_t>(j));
    std::fill(seen.begin(), seen.end(), 0);
    detail::dfs_order(rev, order.back(), seen, nullptr);
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

// Union of undirected views over the window [first, first + window_len] of a
// graph sequence indexed by absolute step.
inline bool window_union_connected(std::span<const DirectedGraphSnapshot> graphs, std::size_t first,
                                   std::size_t window_len) {
    if (first + window_len >= graphs.size()) throw std::out_of_range("window_union_connected: window out of range");
    const std::size_t n = graphs[first].n;
    detail::Dsu dsu(n);
    for (std::size_t k = first; k <= first + window_len; ++k) {
        for (std::size_t j = 0; j < n; ++j)
            for (std::uint32_t i : graphs[k].out[j]) dsu.unite(static_cast<std::uint32_t>(j), i);
    }
    return dsu.all_connected();
}

// Same over recorded states; graphs are built on the fly.
inline bool window_union_connected(const SimConfig& cfg, std::span<const SwarmState> states, std::size_t first,
                                   std::size_t window_len) {
    if (first + window_len >= states.size()) throw std::out_of_range("window_union_connected: window out of range");
    detail::Dsu dsu(cfg.n);
    for (std::size_t k = first; k <= first + window_len; ++k) {
        const SwarmState& s = states[k];
        for (std::size_t i = 0; i < cfg.n; ++i)
            for (std::size_t j = i + 1; j < cfg.n; ++j) {
                const double d = pair_distance(cfg, s.positions[i], s.positions[j]);
                if (d <= cfg.radii[i] || d <= cfg.radii[j])
                    dsu.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
            }
    }
    return dsu.all_connected();
}

struct MetricSample {
    long t = 0;
    double phi = 0.0;
    double span = 0.0;
    bool weak_connected = false;
};

// Order parameter, heading span and the weak-connectivity flag in one pass.
inline MetricSample measure(const SimConfig& cfg, const SwarmState& s) {
    MetricSample m;
    m.t = s.t;
    m.phi = order_parameter(s.headings);
    m.span = heading_span(s.headings);
    detail::Dsu dsu(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i)
        for (std::size_t j = i + 1; j < cfg.n; ++j) {
            const double d = pair_distance(cfg, s.positions[i], s.positions[j]);
            if (d <= cfg.radii[i] || d <= cfg.radii[j])
                dsu.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
        }
    m.weak_connected = dsu.all_connected();
    return m;
}

struct MetricSeries {
    long stride = 1;
    std::vector<long> t;
    std::vector<double> phi;
    std::vector<double> span;
    std::vector<char> weak_connected;

    std::size_t size() const { return t.size(); }
    void push(const MetricSample& m) {
        t.push_back(m.t);
        phi.push_back(m.phi);
        span.push_back(m.span);
        weak_connected.push_back(m.weak_connected ? 1 : 0);
    }
};

} // namespace sppkit
