#pragma once

#include "litscape/community.hpp"
#include "litscape/embedding.hpp"
#include "litscape/eval.hpp"
#include "litscape/extraction.hpp"
#include "litscape/graph.hpp"

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace litscape {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Stage { Fetch, Ingest, Extract, Embed, Cluster, Graph, Communities, Report, Eval };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);

// Loaded from a flat JSON object whose keys are the dotted names below.
// Relative paths are resolved against the config file's directory.
struct PipelineConfig {
    // corpus.* ; exactly one of query / local_path is set.
    std::vector<std::string> query;
    std::optional<std::string> category_filter;
    int max_results = 100;
    int page_size = 50;
    std::chrono::milliseconds page_delay{3000};
    std::string arxiv_url = "http://export.arxiv.org/api/query";
    std::optional<std::filesystem::path> local_path;

    // extract.*
    std::string extract_backend = "mock";  // mock | http
    std::filesystem::path extract_rules;
    std::string extract_url;
    std::string extract_model;
    size_t prompt_budget = kDefaultPromptBudget;

    // embed.*
    std::string embed_backend = "lookup";  // lookup | hash | http
    std::filesystem::path embed_table;
    std::string embed_url;
    std::string embed_model;
    size_t embed_dim = 256;
    std::string embed_prefix;
    size_t embed_batch_size = 64;

    std::string api_key;

    double cluster_threshold = kDefaultClusterThreshold;
    bool dump_dendrograms = false;

    GraphView graph_view = GraphView::ThreeElement;

    std::optional<size_t> gn_max_removals;
    PathMetric gn_metric = PathMetric::Hops;
    bool gn_weighted_modularity = true;

    size_t report_top_k = 10;

    std::optional<std::filesystem::path> gold;
    MatchPolicy eval_policy = MatchPolicy::NormalizedExact;

    std::filesystem::path output_dir = "out";
    size_t concurrency = 4;
    bool verbose = false;

    // Snapshot for the run manifest.
    std::string raw_json;
};

// Applies LITSCAPE_EXTRACT_URL / LITSCAPE_EMBED_URL / LITSCAPE_API_KEY and
// validates. Throws Error{Config}.
PipelineConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);
void validate_config(const PipelineConfig& c);

std::unique_ptr<ExtractionBackend> make_extraction_backend(const PipelineConfig& c);
std::unique_ptr<EmbeddingBackend> make_embedding_backend(const PipelineConfig& c);

// Artifact names inside the output directory.
namespace artifacts {
inline constexpr std::string_view kCorpus = "corpus.jsonl";
inline constexpr std::string_view kMentions = "mentions.jsonl";
inline constexpr std::string_view kVectors = "vectors.cache";
inline constexpr std::string_view kClusters = "clusters.jsonl";
inline constexpr std::string_view kDendrograms = "dendrograms.json";
inline constexpr std::string_view kGraph = "graph.json";
inline constexpr std::string_view kGraphDot = "graph.dot";
inline constexpr std::string_view kGraphML = "graph.graphml";
inline constexpr std::string_view kCommunities = "communities.json";
inline constexpr std::string_view kReportText = "report.txt";
inline constexpr std::string_view kReportJson = "report.json";
inline constexpr std::string_view kEvalJson = "eval.json";
inline constexpr std::string_view kEvalText = "eval.txt";
inline constexpr std::string_view kManifest = "manifest.json";
}  // namespace artifacts

// Throws on failure. Takes the output directory lock.
void execute_stage(Stage stage, const PipelineConfig& config, std::ostream& log);

// Exit status: 0 ok, 2 config, 3 network, 4 backend, 5 data integrity, 1 other.
int run_stage(Stage stage, const PipelineConfig& config, std::ostream& log);

// corpus -> extract -> embed -> cluster -> graph -> communities -> report
// [-> eval when a gold file is configured]; stops at the first failure.
int run_pipeline(const PipelineConfig& config, std::ostream& log);

}  // namespace litscape
