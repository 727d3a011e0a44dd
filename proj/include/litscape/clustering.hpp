#pragma once

#include "litscape/common.hpp"
#include "litscape/embedding.hpp"
#include "litscape/extraction.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace litscape {

struct MergeStep {
    size_t left = 0;
    size_t right = 0;
    size_t merged = 0;
    double height = 0.0;
    size_t size = 0;
};

struct Dendrogram {
    size_t leaf_count = 0;
    std::vector<MergeStep> steps;
};

using Point = std::vector<double>;

// Ward agglomeration with Lance-Williams updates on squared distances. Leaves
// are 0..n-1, merged nodes n, n+1, ... in step order. Heights are the square
// root of the Ward distance (scipy's convention: a pair of singletons merges
// at their Euclidean distance). Ties go to the lexicographically smallest
// (min id, max id) pair.
Dendrogram ward_cluster(std::span<const Point> points);
Dendrogram ward_cluster(std::span<const EmbeddingVector> vectors);

// Applies every merge with height < threshold. Groups are sorted by their
// smallest leaf; leaves within a group ascend.
std::vector<std::vector<size_t>> cut_dendrogram(const Dendrogram& d, double threshold);

inline constexpr double kDefaultClusterThreshold = 0.7;

struct SynonymCluster {
    std::string id;
    Category category = Category::Objective;
    std::string label;
    std::vector<std::string> members;  // distinct normalized surfaces, sorted
    size_t paper_freq = 0;

    bool operator==(const SynonymCluster&) const = default;
};

// Per category: one leaf per distinct normalized surface (sorted), Ward, cut,
// then label by the most frequent surface form. `vectors` is keyed by
// normalized surface.
std::vector<SynonymCluster> make_clusters(const std::vector<Mention>& mentions,
                                          const std::map<std::string, EmbeddingVector>& vectors,
                                          double threshold = kDefaultClusterThreshold);

std::string write_clusters_jsonl(const std::vector<SynonymCluster>& clusters);
std::vector<SynonymCluster> read_clusters_jsonl(const std::string& text);

// Inspection dump: {leaf_count, leaves:[...], steps:[{left,right,merged,height,size}]}.
std::string dendrogram_to_json(const Dendrogram& d, const std::vector<std::string>& leaf_names);

}  // namespace litscape
