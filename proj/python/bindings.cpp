#include "litscape/pipeline.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace litscape;

namespace {

PipelineConfig config_for(const std::string& path, const std::optional<std::string>& out) {
    auto c = load_config(path);
    if (out) c.output_dir = *out;
    return c;
}

}  // namespace

PYBIND11_MODULE(_litscape, m) {
    m.doc() = "Objective/method/dataset mining: segmentation, Ward clustering, "
              "co-occurrence graphs and Girvan-Newman communities";

    py::register_exception<Error>(m, "LitscapeError");

    py::enum_<Category>(m, "Category")
        .value("Objective", Category::Objective)
        .value("Method", Category::Method)
        .value("Dataset", Category::Dataset);

    py::enum_<SectionKind>(m, "SectionKind")
        .value("Introduction", SectionKind::Introduction)
        .value("Methods", SectionKind::Methods)
        .value("Results", SectionKind::Results)
        .value("Data", SectionKind::Data)
        .value("Experiments", SectionKind::Experiments)
        .value("Conclusion", SectionKind::Conclusion)
        .value("Other", SectionKind::Other);

    py::enum_<GraphView>(m, "GraphView")
        .value("ThreeElement", GraphView::ThreeElement)
        .value("ObjectiveDataset", GraphView::ObjectiveDataset);

    py::enum_<ExportFormat>(m, "ExportFormat")
        .value("Dot", ExportFormat::Dot)
        .value("GraphML", ExportFormat::GraphML)
        .value("StructuredText", ExportFormat::StructuredText);

    py::enum_<MatchPolicy>(m, "MatchPolicy")
        .value("NormalizedExact", MatchPolicy::NormalizedExact)
        .value("ClusterAware", MatchPolicy::ClusterAware);

    py::enum_<PathMetric>(m, "PathMetric")
        .value("Hops", PathMetric::Hops)
        .value("InverseWeight", PathMetric::InverseWeight);

    py::class_<Section>(m, "Section")
        .def(py::init<>())
        .def(py::init([](SectionKind k, std::string heading, std::string body) {
                 return Section{k, std::move(heading), std::move(body)};
             }),
             py::arg("kind"), py::arg("heading"), py::arg("body"))
        .def_readwrite("kind", &Section::kind)
        .def_readwrite("heading", &Section::heading)
        .def_readwrite("body", &Section::body)
        .def("__repr__", [](const Section& s) {
            return "Section(" + std::string(to_string(s.kind)) + ", '" + s.heading + "')";
        });

    py::class_<Paper>(m, "Paper")
        .def(py::init<>())
        .def_readwrite("id", &Paper::id)
        .def_readwrite("title", &Paper::title)
        .def_readwrite("abstract", &Paper::abstract)
        .def_readwrite("sections", &Paper::sections)
        .def_readwrite("fetched_at", &Paper::fetched_at);

    py::class_<Mention>(m, "Mention")
        .def(py::init([](std::string paper_id, Category c, std::string surface,
                         SectionKind kind) {
                 auto normalized = normalize_surface(surface);
                 return Mention{std::move(paper_id), c, std::move(surface), kind,
                                std::move(normalized)};
             }),
             py::arg("paper_id"), py::arg("category"), py::arg("surface"),
             py::arg("section_kind") = SectionKind::Other)
        .def_readonly("paper_id", &Mention::paper_id)
        .def_readonly("category", &Mention::category)
        .def_readonly("surface", &Mention::surface)
        .def_readonly("section_kind", &Mention::section_kind)
        .def_readonly("normalized", &Mention::normalized);

    py::class_<MergeStep>(m, "MergeStep")
        .def_readonly("left", &MergeStep::left)
        .def_readonly("right", &MergeStep::right)
        .def_readonly("merged", &MergeStep::merged)
        .def_readonly("height", &MergeStep::height)
        .def_readonly("size", &MergeStep::size);

    py::class_<Dendrogram>(m, "Dendrogram")
        .def_readonly("leaf_count", &Dendrogram::leaf_count)
        .def_readonly("steps", &Dendrogram::steps);

    py::class_<SynonymCluster>(m, "SynonymCluster")
        .def_readonly("id", &SynonymCluster::id)
        .def_readonly("category", &SynonymCluster::category)
        .def_readonly("label", &SynonymCluster::label)
        .def_readonly("members", &SynonymCluster::members)
        .def_readonly("paper_freq", &SynonymCluster::paper_freq);

    py::class_<GraphNode>(m, "GraphNode")
        .def(py::init([](std::string id, Category c, std::string label, size_t freq) {
                 return GraphNode{std::move(id), c, std::move(label), freq};
             }),
             py::arg("cluster_id"), py::arg("category"), py::arg("label"),
             py::arg("paper_freq") = 1)
        .def_readwrite("cluster_id", &GraphNode::cluster_id)
        .def_readwrite("category", &GraphNode::category)
        .def_readwrite("label", &GraphNode::label)
        .def_readwrite("paper_freq", &GraphNode::paper_freq);

    py::class_<GraphEdge>(m, "GraphEdge")
        .def(py::init([](size_t a, size_t b, size_t w) {
                 return GraphEdge{std::min(a, b), std::max(a, b), w};
             }),
             py::arg("a"), py::arg("b"), py::arg("weight") = 1)
        .def_readonly("a", &GraphEdge::a)
        .def_readonly("b", &GraphEdge::b)
        .def_readonly("weight", &GraphEdge::weight);

    py::class_<CooccurrenceGraph>(m, "CooccurrenceGraph")
        .def(py::init<>())
        .def(py::init([](std::vector<GraphNode> nodes, std::vector<GraphEdge> edges,
                         GraphView view) {
                 return CooccurrenceGraph{view, std::move(nodes), std::move(edges)};
             }),
             py::arg("nodes"), py::arg("edges"), py::arg("view") = GraphView::ThreeElement)
        .def_readwrite("view", &CooccurrenceGraph::view)
        .def_readwrite("nodes", &CooccurrenceGraph::nodes)
        .def_readwrite("edges", &CooccurrenceGraph::edges)
        .def("__eq__", [](const CooccurrenceGraph& a, const CooccurrenceGraph& b) { return a == b; });

    py::class_<CommunityPartition>(m, "CommunityPartition")
        .def_readonly("assignment", &CommunityPartition::assignment)
        .def_readonly("community_count", &CommunityPartition::community_count)
        .def_readonly("modularity", &CommunityPartition::modularity);

    py::class_<GNTrace>(m, "GNTrace")
        .def_readonly("removal_order", &GNTrace::removal_order)
        .def_readonly("partitions", &GNTrace::partitions);

    py::class_<Scores>(m, "Scores")
        .def_readonly("precision", &Scores::precision)
        .def_readonly("recall", &Scores::recall)
        .def_readonly("f1", &Scores::f1);

    py::class_<MatchCounts>(m, "MatchCounts")
        .def_readonly("tp", &MatchCounts::tp)
        .def_readonly("fp", &MatchCounts::fp)
        .def_readonly("fn", &MatchCounts::fn);

    py::class_<GoldAnnotation>(m, "GoldAnnotation")
        .def(py::init([](std::string paper_id, Category c, std::vector<std::string> items) {
                 GoldAnnotation g{std::move(paper_id), c, {}};
                 for (const auto& i : items) g.items.push_back(normalize_surface(i));
                 return g;
             }),
             py::arg("paper_id"), py::arg("category"), py::arg("items"))
        .def_readonly("paper_id", &GoldAnnotation::paper_id)
        .def_readonly("category", &GoldAnnotation::category)
        .def_readonly("items", &GoldAnnotation::items);

    // corpus
    m.def("build_query", &build_query, py::arg("keywords"), py::arg("category_filter") = py::none());
    m.def("segment_sections", &segment_sections, py::arg("raw"));
    m.def("classify_heading", &classify_heading, py::arg("heading"));
    m.def("select_sections", &select_sections, py::arg("paper"), py::arg("category"));
    m.def("ingest_local", [](const std::string& dir) { return ingest_local(dir); }, py::arg("dir"));

    // extraction
    m.def("render_prompt",
          [](Category c, const std::string& text, size_t budget) {
              return render_prompt(default_template(c), text, budget);
          },
          py::arg("category"), py::arg("section_text"), py::arg("budget") = kDefaultPromptBudget);
    m.def("parse_response", &parse_response, py::arg("raw"));
    m.def("normalize_surface", &normalize_surface, py::arg("surface"));

    // embedding
    m.def("normalize_vector",
          [](const std::vector<double>& raw) {
              auto v = EmbeddingVector::from_raw(raw);
              return std::vector<double>(v.values().begin(), v.values().end());
          },
          py::arg("raw"));
    m.def("cosine_similarity",
          [](const std::vector<double>& u, const std::vector<double>& v) {
              return cosine_similarity(EmbeddingVector::from_raw(u), EmbeddingVector::from_raw(v));
          },
          py::arg("u"), py::arg("v"));

    // clustering
    m.def("ward_cluster",
          [](const std::vector<std::vector<double>>& points) {
              return ward_cluster(std::span<const Point>(points));
          },
          py::arg("points"));
    m.def("cut_dendrogram", &cut_dendrogram, py::arg("dendrogram"), py::arg("threshold"));
    m.def("make_clusters",
          [](const std::vector<Mention>& mentions,
             const std::map<std::string, std::vector<double>>& vectors, double threshold) {
              std::map<std::string, EmbeddingVector> vs;
              for (const auto& [k, v] : vectors) vs.emplace(k, EmbeddingVector::from_raw(v));
              return make_clusters(mentions, vs, threshold);
          },
          py::arg("mentions"), py::arg("vectors"), py::arg("threshold") = kDefaultClusterThreshold);

    // graph
    m.def("build_cooccurrence", &build_cooccurrence, py::arg("clusters"), py::arg("mentions"),
          py::arg("view") = GraphView::ThreeElement);
    m.def("top_frequencies", &top_frequencies, py::arg("clusters"), py::arg("category"),
          py::arg("k"));
    m.def("export_graph", &export_graph, py::arg("graph"), py::arg("format"));
    m.def("import_graph_json", &import_graph_json, py::arg("text"));

    // community
    m.def("edge_betweenness", &edge_betweenness, py::arg("graph"),
          py::arg("metric") = PathMetric::Hops);
    m.def("girvan_newman",
          [](const CooccurrenceGraph& g, std::optional<size_t> max_removals, PathMetric metric,
             bool weighted) {
              return girvan_newman(g, {metric, weighted, max_removals});
          },
          py::arg("graph"), py::arg("max_removals") = py::none(),
          py::arg("metric") = PathMetric::Hops, py::arg("weighted_modularity") = true);
    m.def("modularity", &modularity, py::arg("graph"), py::arg("assignment"),
          py::arg("weighted") = true);
    m.def("best_partition",
          [](const CooccurrenceGraph& g, PathMetric metric, bool weighted) {
              return best_partition(g, {metric, weighted, std::nullopt});
          },
          py::arg("graph"), py::arg("metric") = PathMetric::Hops,
          py::arg("weighted_modularity") = true);

    // eval
    m.def("f1_scores", &f1_scores, py::arg("tp"), py::arg("fp"), py::arg("fn"));
    m.def("match_mentions", &match_mentions, py::arg("predicted"), py::arg("gold"),
          py::arg("policy") = MatchPolicy::NormalizedExact,
          py::arg("clusters") = std::vector<SynonymCluster>{});

    // pipeline; returns the CLI exit status and the log text
    m.def("run_stage",
          [](const std::string& stage, const std::string& config,
             std::optional<std::string> out) {
              std::ostringstream log;
              int code = run_stage(stage_from_string(stage), config_for(config, out), log);
              return py::make_tuple(code, log.str());
          },
          py::arg("stage"), py::arg("config"), py::arg("out") = py::none());
    m.def("run_pipeline",
          [](const std::string& config, std::optional<std::string> out) {
              std::ostringstream log;
              int code = run_pipeline(config_for(config, out), log);
              return py::make_tuple(code, log.str());
          },
          py::arg("config"), py::arg("out") = py::none());

    m.attr("__version__") = std::string(kToolVersion);
}
