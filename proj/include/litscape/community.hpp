#pragma once

#include "litscape/graph.hpp"

#include <optional>
#include <string>
#include <vector>

namespace litscape {

// Hops: classical unweighted shortest paths. InverseWeight: an edge of weight w
// has length 1/w, so strongly co-occurring pairs are "closer".
enum class PathMetric { Hops, InverseWeight };

// Exact edge betweenness, aligned with g.edges. Each unordered node pair
// contributes one unit split evenly across its shortest paths.
std::vector<double> edge_betweenness(const CooccurrenceGraph& g,
                                     PathMetric metric = PathMetric::Hops);

struct CommunityPartition {
    // Community id per node index; ids are 0..community_count-1, numbered in
    // order of each community's smallest node index.
    std::vector<size_t> assignment;
    size_t community_count = 0;
    double modularity = 0.0;
};

struct GNTrace {
    std::vector<size_t> removal_order;  // indices into g.edges
    // partitions[0] is the connected components of the input; later entries
    // are taken whenever a removal raises the component count.
    std::vector<CommunityPartition> partitions;
    // removals_before[i] = number of removed edges when partitions[i] was taken.
    std::vector<size_t> removals_before;
};

struct CommunityOptions {
    PathMetric metric = PathMetric::Hops;
    bool weighted_modularity = true;
    std::optional<size_t> max_removals;
};

GNTrace girvan_newman(const CooccurrenceGraph& g, const CommunityOptions& options = {});

// Q = sum_c (e_c/m - (d_c/2m)^2); 0 for a graph without edges.
double modularity(const CooccurrenceGraph& g, const std::vector<size_t>& assignment,
                  bool weighted = true);

// Highest modularity among the trace's partitions; ties prefer fewer
// communities, then the earlier snapshot.
size_t best_partition_index(const GNTrace& trace);
CommunityPartition best_partition(const CooccurrenceGraph& g, const CommunityOptions& options = {});

// communities.json
std::string communities_to_json(const CooccurrenceGraph& g, const GNTrace& trace);

}  // namespace litscape
