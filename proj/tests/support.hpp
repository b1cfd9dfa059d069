#pragma once

#include <random>
#include <vector>

#include "tracelab/graphdomain.hpp"

namespace tracelab::testing {

// Graph from explicit classes; coordinates on a line unless given.
inline DomainGraph make_graph(Index n, const std::vector<Edge>& edges, const VertexSet& interior,
                              const VertexSet& boundary, const VertexSet& absorbing = {},
                              std::vector<Eigen::Vector2d> coords = {}) {
    if (coords.empty())
        for (Index i = 0; i < n; ++i) coords.emplace_back(static_cast<double>(i), 0.0);
    std::vector<VertexKind> kinds(static_cast<size_t>(n), VertexKind::interior);
    for (Index v : boundary) kinds[static_cast<size_t>(v)] = VertexKind::boundary;
    for (Index v : absorbing) kinds[static_cast<size_t>(v)] = VertexKind::absorbing;
    (void)interior;
    return DomainGraph(std::move(coords), edges, Eigen::VectorXd::Ones(n), std::move(kinds), 1.0);
}

// 0 - 1 - 2 with the ends on the boundary.
inline DomainGraph path3() { return make_graph(3, {{0, 1, 1}, {1, 2, 1}}, {1}, {0, 2}); }

// 0 - 1 - 2 - 3 - 4 with the ends on the boundary.
inline DomainGraph path5() {
    return make_graph(5, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}}, {1, 2, 3}, {0, 4});
}

// 4-cycle 0-1-2-3-0 with F = {0, 2}.
inline DomainGraph cycle4() {
    return make_graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, 1}}, {1, 3}, {0, 2}, {},
                      {{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
}

// Star with centre 0 and boundary leaves 1, 2, 3.
inline DomainGraph star3() {
    return make_graph(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}}, {0}, {1, 2, 3}, {},
                      {{0, 0}, {1, 0}, {-0.5, 0.8}, {-0.5, -0.8}});
}

// Connected random weighted graph: a random tree plus chords on the interior,
// boundary vertices hang off one to three interior vertices. With
// `adjacent_boundary` some boundary pairs also get a direct edge.
inline DomainGraph random_graph(std::uint64_t seed, bool adjacent_boundary = false, bool absorbing = false) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](double a, double b) { return a + (b - a) * static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    auto pick = [&](Index n) { return static_cast<Index>(rng() % static_cast<std::uint64_t>(n)); };
    const Index nu = 4 + pick(33), nf = 2 + pick(18), na = absorbing ? 1 + pick(4) : 0;
    const Index n = nu + nf + na;
    std::vector<Edge> edges;
    std::vector<std::vector<char>> has(static_cast<size_t>(n), std::vector<char>(static_cast<size_t>(n), 0));
    auto add = [&](Index a, Index b) {
        if (a == b || has[static_cast<size_t>(a)][static_cast<size_t>(b)]) return;
        has[static_cast<size_t>(a)][static_cast<size_t>(b)] = has[static_cast<size_t>(b)][static_cast<size_t>(a)] = 1;
        edges.push_back({a, b, uniform(0.25, 4.0)});
    };
    for (Index v = 1; v < nu; ++v) add(v, pick(v));
    for (Index k = 0; k < nu / 2; ++k) add(pick(nu), pick(nu));
    VertexSet interior, boundary, absorbing_set;
    for (Index v = 0; v < nu; ++v) interior.push_back(v);
    for (Index b = nu; b < nu + nf; ++b) {
        boundary.push_back(b);
        const Index links = 1 + pick(3);
        for (Index k = 0; k < links; ++k) add(b, pick(nu));
    }
    for (Index a = nu + nf; a < n; ++a) {
        absorbing_set.push_back(a);
        add(a, pick(nu));
    }
    if (adjacent_boundary)
        for (Index k = 0; k < nf / 2; ++k) add(nu + pick(nf), nu + pick(nf));
    std::vector<Eigen::Vector2d> coords;
    for (Index v = 0; v < n; ++v) coords.emplace_back(uniform(0, 10), uniform(0, 10));
    return make_graph(n, edges, interior, boundary, absorbing_set, coords);
}

inline DomainSpec lattice(Family f, int side, std::optional<double> truncation = {}, double alpha = 1.0) {
    DomainSpec s;
    s.family = f;
    s.side = side;
    s.alpha = alpha;
    s.truncation_radius = truncation;
    return s;
}

}  // namespace tracelab::testing
