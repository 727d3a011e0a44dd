#pragma once

// Reference implementations used only by tests. They are deliberately naive:
// brute force over explicit cluster memberships and explicit path lists.

#include "litscape/clustering.hpp"
#include "litscape/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

struct WardMerge {
    size_t left, right;
    double height;
};

// Each step: recompute centroids of every live cluster and pick the pair with
// the smallest increase in total within-cluster sum of squares,
//   delta = ni*nj/(ni+nj) * |ci - cj|^2,
// reported as height sqrt(2*delta). Ties go to the smallest (id, id) pair.
inline std::vector<WardMerge> ward(const std::vector<std::vector<double>>& pts) {
    const size_t n = pts.size();
    const size_t dim = n ? pts[0].size() : 0;
    struct Cl {
        size_t id;
        std::vector<size_t> members;
    };
    std::vector<Cl> live;
    for (size_t i = 0; i < n; ++i) live.push_back({i, {i}});
    auto centroid = [&](const Cl& c) {
        std::vector<double> m(dim, 0.0);
        for (size_t i : c.members)
            for (size_t k = 0; k < dim; ++k) m[k] += pts[i][k];
        for (auto& x : m) x /= static_cast<double>(c.members.size());
        return m;
    };
    std::vector<WardMerge> out;
    size_t next = n;
    while (live.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::pair<size_t, size_t> best_ids{SIZE_MAX, SIZE_MAX};
        size_t bi = 0, bj = 0;
        for (size_t i = 0; i < live.size(); ++i) {
            for (size_t j = i + 1; j < live.size(); ++j) {
                auto ci = centroid(live[i]), cj = centroid(live[j]);
                double sq = 0;
                for (size_t k = 0; k < dim; ++k) sq += (ci[k] - cj[k]) * (ci[k] - cj[k]);
                double ni = static_cast<double>(live[i].members.size());
                double nj = static_cast<double>(live[j].members.size());
                double delta = ni * nj / (ni + nj) * sq;
                std::pair<size_t, size_t> ids = std::minmax(live[i].id, live[j].id);
                if (delta < best || (delta == best && ids < best_ids)) {
                    best = delta;
                    best_ids = ids;
                    bi = i;
                    bj = j;
                }
            }
        }
        out.push_back({best_ids.first, best_ids.second, std::sqrt(2.0 * best)});
        Cl merged{next++, live[bi].members};
        merged.members.insert(merged.members.end(), live[bj].members.begin(),
                              live[bj].members.end());
        live.erase(live.begin() + static_cast<long>(bj));
        live.erase(live.begin() + static_cast<long>(bi));
        live.push_back(std::move(merged));
    }
    return out;
}

// Edge betweenness by listing every simple path between every node pair and
// keeping the shortest ones. `length(e)` gives the length of edge e.
inline std::vector<double> betweenness(const litscape::CooccurrenceGraph& g,
                                       const std::function<double(size_t)>& length) {
    const size_t n = g.nodes.size();
    std::vector<std::vector<std::pair<size_t, size_t>>> adj(n);  // (neighbor, edge)
    for (size_t e = 0; e < g.edges.size(); ++e) {
        adj[g.edges[e].a].push_back({g.edges[e].b, e});
        adj[g.edges[e].b].push_back({g.edges[e].a, e});
    }
    std::vector<double> out(g.edges.size(), 0.0);
    for (size_t s = 0; s < n; ++s) {
        for (size_t t = s + 1; t < n; ++t) {
            std::vector<std::pair<double, std::vector<size_t>>> paths;
            std::vector<size_t> stack_edges;
            std::vector<char> seen(n, 0);
            std::function<void(size_t, double)> dfs = [&](size_t u, double len) {
                if (u == t) {
                    paths.push_back({len, stack_edges});
                    return;
                }
                seen[u] = 1;
                for (auto [v, e] : adj[u]) {
                    if (seen[v]) continue;
                    stack_edges.push_back(e);
                    dfs(v, len + length(e));
                    stack_edges.pop_back();
                }
                seen[u] = 0;
            };
            dfs(s, 0.0);
            if (paths.empty()) continue;
            double shortest = std::numeric_limits<double>::infinity();
            for (const auto& p : paths) shortest = std::min(shortest, p.first);
            std::vector<const std::vector<size_t>*> best;
            for (const auto& p : paths)
                if (std::abs(p.first - shortest) <= 1e-12 * std::max(1.0, shortest))
                    best.push_back(&p.second);
            for (const auto* p : best)
                for (size_t e : *p) out[e] += 1.0 / static_cast<double>(best.size());
        }
    }
    return out;
}

// For a tree: removing edge e splits the nodes into n1 and n2 = n - n1.
inline std::vector<double> tree_split_products(const litscape::CooccurrenceGraph& g) {
    const size_t n = g.nodes.size();
    std::vector<double> out;
    for (size_t skip = 0; skip < g.edges.size(); ++skip) {
        std::vector<size_t> parent(n);
        for (size_t i = 0; i < n; ++i) parent[i] = i;
        std::function<size_t(size_t)> find = [&](size_t x) {
            return parent[x] == x ? x : parent[x] = find(parent[x]);
        };
        for (size_t e = 0; e < g.edges.size(); ++e)
            if (e != skip) parent[find(g.edges[e].a)] = find(g.edges[e].b);
        size_t root = find(g.edges[skip].a), n1 = 0;
        for (size_t i = 0; i < n; ++i) n1 += find(i) == root;
        out.push_back(static_cast<double>(n1 * (n - n1)));
    }
    return out;
}

// Graph helpers -------------------------------------------------------------

inline litscape::CooccurrenceGraph make_graph(size_t n,
                                              std::vector<std::pair<size_t, size_t>> edges,
                                              std::vector<size_t> weights = {}) {
    litscape::CooccurrenceGraph g;
    for (size_t i = 0; i < n; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "n%03zu", i);
        g.nodes.push_back({buf, litscape::Category::Objective, buf, 1});
    }
    for (size_t i = 0; i < edges.size(); ++i) {
        auto [a, b] = std::minmax(edges[i].first, edges[i].second);
        g.edges.push_back({a, b, weights.empty() ? size_t{1} : weights[i]});
    }
    std::sort(g.edges.begin(), g.edges.end(),
              [](const auto& x, const auto& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
    return g;
}

inline std::vector<std::pair<size_t, size_t>> clique(size_t first, size_t count) {
    std::vector<std::pair<size_t, size_t>> e;
    for (size_t i = first; i < first + count; ++i)
        for (size_t j = i + 1; j < first + count; ++j) e.push_back({i, j});
    return e;
}

// Two 5-cliques {0..4} and {5..9} joined by the bridge 4-5.
inline litscape::CooccurrenceGraph two_cliques_bridge() {
    auto e = clique(0, 5);
    auto f = clique(5, 5);
    e.insert(e.end(), f.begin(), f.end());
    e.push_back({4, 5});
    return make_graph(10, e);
}

inline litscape::CooccurrenceGraph random_tree(size_t n, std::mt19937_64& rng) {
    std::vector<std::pair<size_t, size_t>> e;
    for (size_t i = 1; i < n; ++i) e.push_back({std::uniform_int_distribution<size_t>(0, i - 1)(rng), i});
    return make_graph(n, e);
}

// Random spanning tree plus extra edges with probability p; weights 1..3.
inline litscape::CooccurrenceGraph random_connected(size_t n, double p, std::mt19937_64& rng) {
    std::set<std::pair<size_t, size_t>> es;
    for (size_t i = 1; i < n; ++i)
        es.insert({std::uniform_int_distribution<size_t>(0, i - 1)(rng), i});
    std::bernoulli_distribution coin(p);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (coin(rng)) es.insert({i, j});
    std::vector<std::pair<size_t, size_t>> e(es.begin(), es.end());
    std::vector<size_t> w;
    std::uniform_int_distribution<size_t> wd(1, 3);
    for (size_t i = 0; i < e.size(); ++i) w.push_back(wd(rng));
    return make_graph(n, e, w);
}

}  // namespace oracle
