#include "litscape/graph.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace litscape {

using nlohmann::json;

std::string_view to_string(GraphView v) {
    return v == GraphView::ThreeElement ? "ThreeElement" : "ObjectiveDataset";
}

GraphView graph_view_from_string(std::string_view s) {
    auto l = to_lower(s);
    std::replace(l.begin(), l.end(), '-', '_');
    if (l == "threeelement" || l == "three_element") return GraphView::ThreeElement;
    if (l == "objectivedataset" || l == "objective_dataset") return GraphView::ObjectiveDataset;
    throw Error(ErrorKind::Config, "unknown graph view '" + std::string(s) + "'");
}

CooccurrenceGraph build_cooccurrence(const std::vector<SynonymCluster>& clusters,
                                     const std::vector<Mention>& mentions, GraphView view) {
    auto included = [view](Category c) {
        return view == GraphView::ThreeElement || c != Category::Method;
    };

    CooccurrenceGraph g;
    g.view = view;
    for (const auto& c : clusters)
        if (included(c.category)) g.nodes.push_back({c.id, c.category, c.label, c.paper_freq});
    std::sort(g.nodes.begin(), g.nodes.end(), [](const auto& x, const auto& y) {
        return std::tie(x.category, x.label, x.cluster_id) <
               std::tie(y.category, y.label, y.cluster_id);
    });
    std::map<std::string, size_t> node_index;
    for (size_t i = 0; i < g.nodes.size(); ++i) node_index[g.nodes[i].cluster_id] = i;

    // (category, normalized) -> cluster id, over every cluster regardless of view.
    std::map<std::pair<Category, std::string>, std::string> owner;
    for (const auto& c : clusters) {
        for (const auto& m : c.members) {
            auto [it, fresh] = owner.emplace(std::make_pair(c.category, m), c.id);
            if (!fresh)
                throw Error(ErrorKind::DataIntegrity, "surface '" + m + "' belongs to clusters " +
                                                          it->second + " and " + c.id);
        }
    }

    std::map<std::string, std::set<size_t>> per_paper;
    for (const auto& m : mentions) {
        auto it = owner.find({m.category, m.normalized});
        if (it == owner.end())
            throw Error(ErrorKind::DataIntegrity,
                        "mention '" + m.surface + "' (" + std::string(to_string(m.category)) +
                            ", paper " + m.paper_id + ") maps to no cluster");
        if (!included(m.category)) continue;
        per_paper[m.paper_id].insert(node_index.at(it->second));
    }

    std::map<std::pair<size_t, size_t>, size_t> weights;
    for (const auto& [paper, nodes] : per_paper) {
        for (auto i = nodes.begin(); i != nodes.end(); ++i) {
            for (auto j = std::next(i); j != nodes.end(); ++j) {
                if (g.nodes[*i].category == g.nodes[*j].category) continue;
                ++weights[{*i, *j}];
            }
        }
    }
    for (const auto& [ab, w] : weights) g.edges.push_back({ab.first, ab.second, w});
    return g;
}

std::vector<std::pair<std::string, size_t>> top_frequencies(
    const std::vector<SynonymCluster>& clusters, Category category, size_t k) {
    if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be positive");
    std::vector<std::pair<std::string, size_t>> ranked;
    for (const auto& c : clusters)
        if (c.category == category) ranked.emplace_back(c.label, c.paper_freq);
    std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

// ---------------------------------------------------------------------------
// Export

namespace {

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string to_dot(const CooccurrenceGraph& g) {
    std::ostringstream out;
    out << "graph G {\n";
    for (const auto& n : g.nodes) {
        out << "  " << dot_quote(n.cluster_id) << " [label=" << dot_quote(n.label)
            << ", category=" << dot_quote(to_string(n.category))
            << ", paper_freq=" << n.paper_freq << "];\n";
    }
    for (const auto& e : g.edges) {
        out << "  " << dot_quote(g.nodes[e.a].cluster_id) << " -- "
            << dot_quote(g.nodes[e.b].cluster_id) << " [weight=" << e.weight << "];\n";
    }
    out << "}\n";
    return out.str();
}

std::string to_graphml(const CooccurrenceGraph& g) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
        << "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
        << "  <key id=\"category\" for=\"node\" attr.name=\"category\" attr.type=\"string\"/>\n"
        << "  <key id=\"paper_freq\" for=\"node\" attr.name=\"paper_freq\" attr.type=\"int\"/>\n"
        << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n"
        << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
    for (const auto& n : g.nodes) {
        out << "    <node id=\"" << xml_escape(n.cluster_id) << "\">\n"
            << "      <data key=\"label\">" << xml_escape(n.label) << "</data>\n"
            << "      <data key=\"category\">" << to_string(n.category) << "</data>\n"
            << "      <data key=\"paper_freq\">" << n.paper_freq << "</data>\n"
            << "    </node>\n";
    }
    for (const auto& e : g.edges) {
        out << "    <edge source=\"" << xml_escape(g.nodes[e.a].cluster_id) << "\" target=\""
            << xml_escape(g.nodes[e.b].cluster_id) << "\">\n"
            << "      <data key=\"weight\">" << e.weight << "</data>\n"
            << "    </edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
    return out.str();
}

std::string to_json(const CooccurrenceGraph& g) {
    json nodes = json::array();
    for (const auto& n : g.nodes)
        nodes.push_back({{"cluster_id", n.cluster_id},
                         {"category", to_string(n.category)},
                         {"label", n.label},
                         {"paper_freq", n.paper_freq}});
    json edges = json::array();
    for (const auto& e : g.edges)
        edges.push_back({{"a", g.nodes[e.a].cluster_id},
                         {"b", g.nodes[e.b].cluster_id},
                         {"weight", e.weight}});
    return json{{"view", to_string(g.view)}, {"nodes", nodes}, {"edges", edges}}.dump(2) + "\n";
}

}  // namespace

std::string export_graph(const CooccurrenceGraph& g, ExportFormat format) {
    switch (format) {
    case ExportFormat::Dot: return to_dot(g);
    case ExportFormat::GraphML: return to_graphml(g);
    case ExportFormat::StructuredText: return to_json(g);
    }
    throw Error(ErrorKind::InvalidArgument, "unknown export format");
}

CooccurrenceGraph import_graph_json(const std::string& text) {
    try {
        auto j = json::parse(text);
        CooccurrenceGraph g;
        g.view = graph_view_from_string(j.at("view").get<std::string>());
        std::map<std::string, size_t> index;
        for (const auto& n : j.at("nodes")) {
            GraphNode node{n.at("cluster_id").get<std::string>(),
                           category_from_string(n.at("category").get<std::string>()),
                           n.at("label").get<std::string>(), n.at("paper_freq").get<size_t>()};
            if (!index.emplace(node.cluster_id, g.nodes.size()).second)
                throw Error(ErrorKind::DataIntegrity, "duplicate node " + node.cluster_id);
            g.nodes.push_back(std::move(node));
        }
        for (const auto& e : j.at("edges")) {
            auto a = index.at(e.at("a").get<std::string>());
            auto b = index.at(e.at("b").get<std::string>());
            if (a == b) throw Error(ErrorKind::DataIntegrity, "self-loop in graph file");
            g.edges.push_back({std::min(a, b), std::max(a, b), e.at("weight").get<size_t>()});
        }
        std::sort(g.edges.begin(), g.edges.end(), [](const auto& x, const auto& y) {
            return std::tie(x.a, x.b) < std::tie(y.a, y.b);
        });
        return g;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("bad graph file: ") + e.what());
    } catch (const std::out_of_range&) {
        throw Error(ErrorKind::DataIntegrity, "graph edge references an unknown node");
    }
}

}  // namespace litscape
