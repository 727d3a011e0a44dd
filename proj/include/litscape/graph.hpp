#pragma once

#include "litscape/clustering.hpp"
#include "litscape/common.hpp"
#include "litscape/extraction.hpp"

#include <string>
#include <utility>
#include <vector>

namespace litscape {

enum class GraphView { ThreeElement, ObjectiveDataset };

std::string_view to_string(GraphView v);
GraphView graph_view_from_string(std::string_view s);

struct GraphNode {
    std::string cluster_id;
    Category category = Category::Objective;
    std::string label;
    size_t paper_freq = 0;

    bool operator==(const GraphNode&) const = default;
};

// `a` and `b` index into CooccurrenceGraph::nodes with a < b.
struct GraphEdge {
    size_t a = 0;
    size_t b = 0;
    size_t weight = 0;

    bool operator==(const GraphEdge&) const = default;
};

// Nodes are sorted by (category, label, cluster_id); edges by (a, b).
struct CooccurrenceGraph {
    GraphView view = GraphView::ThreeElement;
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;

    bool operator==(const CooccurrenceGraph&) const = default;
};

// Paper-level co-occurrence between clusters of different categories.
CooccurrenceGraph build_cooccurrence(const std::vector<SynonymCluster>& clusters,
                                     const std::vector<Mention>& mentions, GraphView view);

std::vector<std::pair<std::string, size_t>> top_frequencies(
    const std::vector<SynonymCluster>& clusters, Category category, size_t k);

enum class ExportFormat { Dot, GraphML, StructuredText };

std::string export_graph(const CooccurrenceGraph& g, ExportFormat format);

// Inverse of the StructuredText export.
CooccurrenceGraph import_graph_json(const std::string& text);

}  // namespace litscape
