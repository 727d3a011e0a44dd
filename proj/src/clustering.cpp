#include "litscape/clustering.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace litscape {

using nlohmann::json;

Dendrogram ward_cluster(std::span<const Point> points) {
    const size_t n = points.size();
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "ward_cluster needs at least one point");
    const size_t dim = points[0].size();
    for (const auto& p : points)
        if (p.size() != dim) throw Error(ErrorKind::InvalidArgument, "point dimension mismatch");

    // Squared distances between active slots; slot a holds node id[a].
    std::vector<double> dist(n * n, 0.0);
    auto at = [&](size_t a, size_t b) -> double& { return dist[a * n + b]; };
    for (size_t a = 0; a < n; ++a) {
        for (size_t b = a + 1; b < n; ++b) {
            double sq = 0.0;
            for (size_t k = 0; k < dim; ++k) {
                double d = points[a][k] - points[b][k];
                sq += d * d;
            }
            at(a, b) = at(b, a) = sq;
        }
    }
    std::vector<size_t> id(n), size(n, 1);
    std::iota(id.begin(), id.end(), size_t{0});
    std::vector<char> active(n, 1);

    Dendrogram out;
    out.leaf_count = n;
    out.steps.reserve(n - 1);
    for (size_t step = 0; step + 1 < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        size_t best_a = 0, best_b = 0;
        std::pair<size_t, size_t> best_ids{SIZE_MAX, SIZE_MAX};
        for (size_t a = 0; a < n; ++a) {
            if (!active[a]) continue;
            for (size_t b = a + 1; b < n; ++b) {
                if (!active[b]) continue;
                double d = at(a, b);
                std::pair<size_t, size_t> ids = std::minmax(id[a], id[b]);
                if (d < best || (d == best && ids < best_ids)) {
                    best = d;
                    best_a = a;
                    best_b = b;
                    best_ids = ids;
                }
            }
        }
        const double na = static_cast<double>(size[best_a]);
        const double nb = static_cast<double>(size[best_b]);
        const double dab = at(best_a, best_b);
        for (size_t k = 0; k < n; ++k) {
            if (!active[k] || k == best_a || k == best_b) continue;
            const double nk = static_cast<double>(size[k]);
            double updated =
                ((na + nk) * at(best_a, k) + (nb + nk) * at(best_b, k) - nk * dab) / (na + nb + nk);
            at(best_a, k) = at(k, best_a) = std::max(updated, 0.0);
        }
        MergeStep s;
        s.left = best_ids.first;
        s.right = best_ids.second;
        s.merged = n + step;
        s.height = std::sqrt(std::max(dab, 0.0));
        s.size = size[best_a] + size[best_b];
        out.steps.push_back(s);

        id[best_a] = s.merged;
        size[best_a] = s.size;
        active[best_b] = 0;
    }
    return out;
}

Dendrogram ward_cluster(std::span<const EmbeddingVector> vectors) {
    std::vector<Point> points;
    points.reserve(vectors.size());
    for (const auto& v : vectors) points.emplace_back(v.values().begin(), v.values().end());
    return ward_cluster(std::span<const Point>(points));
}

std::vector<std::vector<size_t>> cut_dendrogram(const Dendrogram& d, double threshold) {
    if (!(threshold > 0.0))
        throw Error(ErrorKind::InvalidArgument, "cut threshold must be positive");
    const size_t nodes = d.leaf_count + d.steps.size();
    std::vector<size_t> parent(nodes);
    std::iota(parent.begin(), parent.end(), size_t{0});
    auto find = [&](size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& s : d.steps) {
        if (s.height < threshold) {
            parent[find(s.left)] = s.merged;
            parent[find(s.right)] = s.merged;
        }
    }
    std::map<size_t, std::vector<size_t>> by_root;
    for (size_t leaf = 0; leaf < d.leaf_count; ++leaf) by_root[find(leaf)].push_back(leaf);
    std::vector<std::vector<size_t>> groups;
    for (auto& [root, leaves] : by_root) groups.push_back(std::move(leaves));
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return groups;
}

std::vector<SynonymCluster> make_clusters(const std::vector<Mention>& mentions,
                                          const std::map<std::string, EmbeddingVector>& vectors,
                                          double threshold) {
    std::vector<SynonymCluster> out;
    for (auto category : kAllCategories) {
        std::set<std::string> distinct;
        for (const auto& m : mentions)
            if (m.category == category) distinct.insert(m.normalized);
        if (distinct.empty()) continue;

        std::vector<std::string> leaves(distinct.begin(), distinct.end());
        std::vector<EmbeddingVector> leaf_vectors;
        leaf_vectors.reserve(leaves.size());
        for (const auto& s : leaves) {
            auto it = vectors.find(s);
            if (it == vectors.end())
                throw Error(ErrorKind::DataIntegrity, "no embedding for '" + s + "'");
            leaf_vectors.push_back(it->second);
        }
        auto groups = cut_dendrogram(ward_cluster(std::span<const EmbeddingVector>(leaf_vectors)),
                                     threshold);

        std::vector<SynonymCluster> clusters;
        for (const auto& group : groups) {
            SynonymCluster c;
            c.category = category;
            std::set<std::string> members;
            for (size_t leaf : group) members.insert(leaves[leaf]);
            c.members.assign(members.begin(), members.end());

            std::map<std::string, size_t> surface_counts;
            std::set<std::string> papers;
            for (const auto& m : mentions) {
                if (m.category != category || !members.count(m.normalized)) continue;
                ++surface_counts[m.surface];
                papers.insert(m.paper_id);
            }
            // std::map iterates lexicographically, so strict > keeps the
            // smallest label among equal counts.
            size_t best = 0;
            for (const auto& [surface, count] : surface_counts) {
                if (count > best) {
                    best = count;
                    c.label = surface;
                }
            }
            c.paper_freq = papers.size();
            clusters.push_back(std::move(c));
        }
        std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
            return std::tie(a.label, a.members) < std::tie(b.label, b.members);
        });
        auto prefix = to_lower(to_string(category));
        for (size_t i = 0; i < clusters.size(); ++i) {
            clusters[i].id = prefix + "-" + std::to_string(i);
            out.push_back(std::move(clusters[i]));
        }
    }
    return out;
}

std::string write_clusters_jsonl(const std::vector<SynonymCluster>& clusters) {
    std::string out;
    for (const auto& c : clusters) {
        json j = {{"id", c.id},
                  {"category", to_string(c.category)},
                  {"label", c.label},
                  {"members", c.members},
                  {"paper_freq", c.paper_freq}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<SynonymCluster> read_clusters_jsonl(const std::string& text) {
    std::vector<SynonymCluster> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            SynonymCluster c;
            c.id = j.at("id").get<std::string>();
            c.category = category_from_string(j.at("category").get<std::string>());
            c.label = j.at("label").get<std::string>();
            c.members = j.at("members").get<std::vector<std::string>>();
            c.paper_freq = j.at("paper_freq").get<size_t>();
            if (c.members.empty())
                throw Error(ErrorKind::DataIntegrity, "cluster " + c.id + " has no members");
            out.push_back(std::move(c));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Parse, std::string("bad cluster record: ") + e.what());
        }
    }
    return out;
}

std::string dendrogram_to_json(const Dendrogram& d, const std::vector<std::string>& leaf_names) {
    json steps = json::array();
    for (const auto& s : d.steps)
        steps.push_back({{"left", s.left},
                         {"right", s.right},
                         {"merged", s.merged},
                         {"height", s.height},
                         {"size", s.size}});
    return json{{"leaf_count", d.leaf_count}, {"leaves", leaf_names}, {"steps", steps}}.dump(2) +
           "\n";
}

}  // namespace litscape
