#pragma once

// The bundled 12-paper synthetic corpus and what it is built to produce.

#include "litscape/pipeline.hpp"

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace fixture {

namespace fs = std::filesystem;

inline fs::path synthetic_dir() { return fs::path(LITSCAPE_FIXTURE_DIR) / "synthetic"; }
inline fs::path synthetic_config() { return synthetic_dir() / "config.json"; }

using ClusterKey = std::pair<litscape::Category, std::vector<std::string>>;

inline std::set<ClusterKey> planted_clusters() {
    using litscape::Category;
    return {
        {Category::Objective, {"stock price prediction"}},
        {Category::Objective, {"volatility forecasting"}},
        {Category::Objective, {"esg score estimation"}},
        {Category::Objective, {"investor sentiment analysis"}},
        {Category::Method, {"support vector machine", "svm"}},
        {Category::Method, {"lstm"}},
        {Category::Method, {"bert"}},
        {Category::Method, {"random forest"}},
        {Category::Dataset, {"s&p 500", "sp500"}},
        {Category::Dataset, {"nasdaq index"}},
        {Category::Dataset, {"stocktwits"}},
        {Category::Dataset, {"esg disclosure reports"}},
    };
}

// Objective-dataset communities, by cluster label.
inline std::set<std::set<std::string>> planted_communities() {
    return {
        {"stock price prediction", "volatility forecasting", "SP500", "NASDAQ index"},
        {"ESG score estimation", "investor sentiment analysis", "Stocktwits",
         "ESG disclosure reports"},
    };
}

inline std::set<ClusterKey> cluster_keys(const std::vector<litscape::SynonymCluster>& clusters) {
    std::set<ClusterKey> out;
    for (const auto& c : clusters) out.insert({c.category, c.members});
    return out;
}

inline std::set<std::set<std::string>> communities_by_label(const litscape::CooccurrenceGraph& g,
                                                            const litscape::CommunityPartition& p) {
    std::vector<std::set<std::string>> groups(p.community_count);
    for (size_t i = 0; i < g.nodes.size(); ++i) groups[p.assignment[i]].insert(g.nodes[i].label);
    return {groups.begin(), groups.end()};
}

// Fresh, empty scratch directory under the system temp dir.
inline fs::path scratch(const std::string& name) {
    static std::mt19937_64 rng(std::random_device{}());
    auto dir = fs::temp_directory_path() /
               ("litscape-" + name + "-" + std::to_string(rng() % 1000000000));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace fixture
