#include "litscape/community.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <set>
#include <tuple>

namespace litscape {

using nlohmann::json;

namespace {

struct Adjacent {
    size_t node;
    size_t edge;
};

using Adjacency = std::vector<std::vector<Adjacent>>;

Adjacency adjacency(const CooccurrenceGraph& g, const std::vector<char>& active) {
    Adjacency adj(g.nodes.size());
    for (size_t e = 0; e < g.edges.size(); ++e) {
        if (!active[e]) continue;
        adj[g.edges[e].a].push_back({g.edges[e].b, e});
        adj[g.edges[e].b].push_back({g.edges[e].a, e});
    }
    return adj;
}

// Brandes single-source accumulation over the active edges.
std::vector<double> betweenness_on(const CooccurrenceGraph& g, const std::vector<char>& active,
                                   PathMetric metric) {
    const size_t n = g.nodes.size();
    auto adj = adjacency(g, active);
    std::vector<double> score(g.edges.size(), 0.0);

    std::vector<double> sigma(n), delta(n), dist(n);
    std::vector<std::vector<Adjacent>> preds(n);
    std::vector<size_t> order;
    order.reserve(n);
    constexpr double inf = std::numeric_limits<double>::infinity();

    for (size_t s = 0; s < n; ++s) {
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        std::fill(dist.begin(), dist.end(), inf);
        for (auto& p : preds) p.clear();
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0.0;

        if (metric == PathMetric::Hops) {
            std::deque<size_t> queue{s};
            while (!queue.empty()) {
                size_t v = queue.front();
                queue.pop_front();
                order.push_back(v);
                for (auto [w, e] : adj[v]) {
                    if (dist[w] == inf) {
                        dist[w] = dist[v] + 1.0;
                        queue.push_back(w);
                    }
                    if (dist[w] == dist[v] + 1.0) {
                        sigma[w] += sigma[v];
                        preds[w].push_back({v, e});
                    }
                }
            }
        } else {
            using Item = std::pair<double, size_t>;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
            std::vector<char> settled(n, 0);
            heap.push({0.0, s});
            while (!heap.empty()) {
                auto [d, v] = heap.top();
                heap.pop();
                if (settled[v]) continue;
                settled[v] = 1;
                order.push_back(v);
                for (auto [w, e] : adj[v]) {
                    double nd = d + 1.0 / static_cast<double>(g.edges[e].weight);
                    // Path lengths are sums of reciprocals; compare with a tolerance.
                    double eps = 1e-12 * std::max(1.0, nd);
                    if (nd < dist[w] - eps) {
                        dist[w] = nd;
                        sigma[w] = sigma[v];
                        preds[w].assign(1, {v, e});
                        heap.push({nd, w});
                    } else if (std::abs(nd - dist[w]) <= eps && !settled[w]) {
                        sigma[w] += sigma[v];
                        preds[w].push_back({v, e});
                    }
                }
            }
        }

        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            size_t w = *it;
            for (auto [v, e] : preds[w]) {
                double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                score[e] += c;
                delta[v] += c;
            }
        }
    }
    // Every pair was counted once from each endpoint.
    for (auto& x : score) x /= 2.0;
    return score;
}

std::vector<size_t> components(const CooccurrenceGraph& g, const std::vector<char>& active,
                               size_t& count) {
    auto adj = adjacency(g, active);
    const size_t n = g.nodes.size();
    std::vector<size_t> comp(n, SIZE_MAX);
    count = 0;
    for (size_t s = 0; s < n; ++s) {
        if (comp[s] != SIZE_MAX) continue;
        std::deque<size_t> queue{s};
        comp[s] = count;
        while (!queue.empty()) {
            size_t v = queue.front();
            queue.pop_front();
            for (auto [w, e] : adj[v]) {
                if (comp[w] == SIZE_MAX) {
                    comp[w] = count;
                    queue.push_back(w);
                }
            }
        }
        ++count;
    }
    return comp;
}

// Sorted endpoint labels, then sorted endpoint ids.
auto edge_tie_key(const CooccurrenceGraph& g, size_t e) {
    const auto& na = g.nodes[g.edges[e].a];
    const auto& nb = g.nodes[g.edges[e].b];
    auto labels = std::minmax(na.label, nb.label);
    auto ids = std::minmax(na.cluster_id, nb.cluster_id);
    return std::make_tuple(labels.first, labels.second, ids.first, ids.second);
}

bool nearly_equal(double x, double y) {
    return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace

std::vector<double> edge_betweenness(const CooccurrenceGraph& g, PathMetric metric) {
    return betweenness_on(g, std::vector<char>(g.edges.size(), 1), metric);
}

double modularity(const CooccurrenceGraph& g, const std::vector<size_t>& assignment,
                  bool weighted) {
    if (assignment.size() != g.nodes.size())
        throw Error(ErrorKind::InvalidArgument, "partition does not assign every node");
    size_t communities = 0;
    for (size_t c : assignment) communities = std::max(communities, c + 1);
    std::vector<double> intra(communities, 0.0), degree(communities, 0.0);
    double m = 0.0;
    for (const auto& e : g.edges) {
        double w = weighted ? static_cast<double>(e.weight) : 1.0;
        m += w;
        size_t ca = assignment[e.a], cb = assignment[e.b];
        if (ca == cb) intra[ca] += w;
        degree[ca] += w;
        degree[cb] += w;
    }
    if (m == 0.0) return 0.0;
    double q = 0.0;
    for (size_t c = 0; c < communities; ++c) {
        double share = degree[c] / (2.0 * m);
        q += intra[c] / m - share * share;
    }
    return q;
}

GNTrace girvan_newman(const CooccurrenceGraph& g, const CommunityOptions& options) {
    std::vector<char> active(g.edges.size(), 1);
    size_t remaining = g.edges.size();
    GNTrace trace;

    auto snapshot = [&] {
        CommunityPartition p;
        p.assignment = components(g, active, p.community_count);
        p.modularity = modularity(g, p.assignment, options.weighted_modularity);
        trace.partitions.push_back(std::move(p));
        trace.removals_before.push_back(trace.removal_order.size());
    };
    snapshot();

    while (remaining > 0 &&
           (!options.max_removals || trace.removal_order.size() < *options.max_removals)) {
        auto score = betweenness_on(g, active, options.metric);
        size_t best = SIZE_MAX;
        for (size_t e = 0; e < g.edges.size(); ++e) {
            if (!active[e]) continue;
            if (best == SIZE_MAX || score[e] > score[best] + 1e-9 * std::max(1.0, score[best])) {
                best = e;
            } else if (nearly_equal(score[e], score[best]) &&
                       edge_tie_key(g, e) < edge_tie_key(g, best)) {
                best = e;
            }
        }
        active[best] = 0;
        --remaining;
        trace.removal_order.push_back(best);

        size_t count = 0;
        components(g, active, count);
        if (count > trace.partitions.back().community_count) snapshot();
    }
    return trace;
}

size_t best_partition_index(const GNTrace& trace) {
    size_t best = 0;
    for (size_t i = 1; i < trace.partitions.size(); ++i) {
        const auto& cand = trace.partitions[i];
        const auto& cur = trace.partitions[best];
        if (cand.modularity > cur.modularity + 1e-12) {
            best = i;
        } else if (std::abs(cand.modularity - cur.modularity) <= 1e-12 &&
                   cand.community_count < cur.community_count) {
            best = i;
        }
    }
    return best;
}

CommunityPartition best_partition(const CooccurrenceGraph& g, const CommunityOptions& options) {
    auto trace = girvan_newman(g, options);
    return trace.partitions[best_partition_index(trace)];
}

std::string communities_to_json(const CooccurrenceGraph& g, const GNTrace& trace) {
    auto edge_labels = [&](size_t e) {
        return json::array({g.nodes[g.edges[e].a].label, g.nodes[g.edges[e].b].label});
    };
    json snapshots = json::array();
    for (size_t i = 0; i < trace.partitions.size(); ++i) {
        const auto& p = trace.partitions[i];
        json removed = json::array();
        size_t from = i == 0 ? 0 : trace.removals_before[i - 1];
        for (size_t r = from; r < trace.removals_before[i]; ++r)
            removed.push_back(edge_labels(trace.removal_order[r]));
        std::vector<std::vector<std::string>> groups(p.community_count);
        for (size_t n = 0; n < p.assignment.size(); ++n)
            groups[p.assignment[n]].push_back(g.nodes[n].label);
        for (auto& grp : groups) std::sort(grp.begin(), grp.end());
        snapshots.push_back(
            {{"removed_edges", removed}, {"communities", groups}, {"modularity", p.modularity}});
    }
    return json{{"view", to_string(g.view)},
                {"snapshots", snapshots},
                {"best_index", best_partition_index(trace)}}
               .dump(2) +
           "\n";
}

}  // namespace litscape
