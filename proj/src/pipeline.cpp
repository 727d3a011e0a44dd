#include "litscape/pipeline.hpp"

#include "litscape/corpus.hpp"
#include "litscape/io.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdlib>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace litscape {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Stage s) {
    switch (s) {
    case Stage::Fetch: return "fetch";
    case Stage::Ingest: return "ingest";
    case Stage::Extract: return "extract";
    case Stage::Embed: return "embed";
    case Stage::Cluster: return "cluster";
    case Stage::Graph: return "graph";
    case Stage::Communities: return "communities";
    case Stage::Report: return "report";
    case Stage::Eval: return "eval";
    }
    return "?";
}

Stage stage_from_string(std::string_view s) {
    for (auto st : {Stage::Fetch, Stage::Ingest, Stage::Extract, Stage::Embed, Stage::Cluster,
                    Stage::Graph, Stage::Communities, Stage::Report, Stage::Eval})
        if (to_string(st) == s) return st;
    throw Error(ErrorKind::Config, "unknown stage '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

template <typename T>
T get_as(const json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::Config, "config key '" + key + "' has the wrong type");
    }
}

}  // namespace

PipelineConfig config_from_json(const std::string& text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");

    PipelineConfig c;
    c.raw_json = j.dump();
    for (const auto& [key, v] : j.items()) {
        if (key == "corpus.query") {
            c.query = v.is_string() ? std::vector<std::string>{v.get<std::string>()}
                                    : get_as<std::vector<std::string>>(v, key);
        } else if (key == "corpus.category") {
            c.category_filter = get_as<std::string>(v, key);
        } else if (key == "corpus.max_results") {
            c.max_results = get_as<int>(v, key);
        } else if (key == "corpus.page_size") {
            c.page_size = get_as<int>(v, key);
        } else if (key == "corpus.page_delay_ms") {
            c.page_delay = std::chrono::milliseconds(get_as<long>(v, key));
        } else if (key == "corpus.arxiv_url") {
            c.arxiv_url = get_as<std::string>(v, key);
        } else if (key == "corpus.local_path") {
            c.local_path = resolve(base_dir, get_as<std::string>(v, key));
        } else if (key == "extract.backend") {
            c.extract_backend = get_as<std::string>(v, key);
        } else if (key == "extract.rules") {
            c.extract_rules = resolve(base_dir, get_as<std::string>(v, key));
        } else if (key == "extract.url") {
            c.extract_url = get_as<std::string>(v, key);
        } else if (key == "extract.model") {
            c.extract_model = get_as<std::string>(v, key);
        } else if (key == "extract.budget") {
            c.prompt_budget = get_as<size_t>(v, key);
        } else if (key == "embed.backend") {
            c.embed_backend = get_as<std::string>(v, key);
        } else if (key == "embed.table") {
            c.embed_table = resolve(base_dir, get_as<std::string>(v, key));
        } else if (key == "embed.url") {
            c.embed_url = get_as<std::string>(v, key);
        } else if (key == "embed.model") {
            c.embed_model = get_as<std::string>(v, key);
        } else if (key == "embed.dim") {
            c.embed_dim = get_as<size_t>(v, key);
        } else if (key == "embed.prefix") {
            c.embed_prefix = get_as<std::string>(v, key);
        } else if (key == "embed.batch_size") {
            c.embed_batch_size = get_as<size_t>(v, key);
        } else if (key == "cluster.threshold") {
            c.cluster_threshold = get_as<double>(v, key);
        } else if (key == "cluster.dump_dendrograms") {
            c.dump_dendrograms = get_as<bool>(v, key);
        } else if (key == "graph.view") {
            c.graph_view = graph_view_from_string(get_as<std::string>(v, key));
        } else if (key == "gn.max_removals") {
            c.gn_max_removals = get_as<size_t>(v, key);
        } else if (key == "gn.metric") {
            auto m = to_lower(get_as<std::string>(v, key));
            if (m == "hops") c.gn_metric = PathMetric::Hops;
            else if (m == "inverse_weight") c.gn_metric = PathMetric::InverseWeight;
            else throw Error(ErrorKind::Config, "gn.metric must be hops or inverse_weight");
        } else if (key == "gn.weighted_modularity") {
            c.gn_weighted_modularity = get_as<bool>(v, key);
        } else if (key == "report.top_k") {
            c.report_top_k = get_as<size_t>(v, key);
        } else if (key == "eval.gold") {
            c.gold = resolve(base_dir, get_as<std::string>(v, key));
        } else if (key == "eval.policy") {
            c.eval_policy = match_policy_from_string(get_as<std::string>(v, key));
        } else if (key == "output_dir") {
            c.output_dir = resolve(base_dir, get_as<std::string>(v, key));
        } else if (key == "concurrency") {
            c.concurrency = get_as<size_t>(v, key);
        } else {
            throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
        }
    }
    if (const char* url = std::getenv("LITSCAPE_EXTRACT_URL"); url && *url) c.extract_url = url;
    if (const char* url = std::getenv("LITSCAPE_EMBED_URL"); url && *url) c.embed_url = url;
    if (const char* key = std::getenv("LITSCAPE_API_KEY"); key && *key) c.api_key = key;
    validate_config(c);
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error&) {
        throw Error(ErrorKind::Config, "cannot read config file " + path.string());
    }
    return config_from_json(text, path.parent_path());
}

void validate_config(const PipelineConfig& c) {
    bool has_query = !c.query.empty();
    bool has_local = c.local_path.has_value();
    if (has_query == has_local)
        throw Error(ErrorKind::Config,
                    "exactly one of corpus.query and corpus.local_path must be set");
    if (has_query && (c.max_results <= 0 || c.page_size <= 0 || c.page_size > c.max_results))
        throw Error(ErrorKind::Config,
                    "corpus.page_size must be positive and at most corpus.max_results");
    if (!(c.cluster_threshold > 0.0))
        throw Error(ErrorKind::Config, "cluster.threshold must be positive");
    if (c.concurrency < 1) throw Error(ErrorKind::Config, "concurrency must be at least 1");
    if (c.report_top_k < 1) throw Error(ErrorKind::Config, "report.top_k must be at least 1");
    if (c.extract_backend != "mock" && c.extract_backend != "http")
        throw Error(ErrorKind::Config, "extract.backend must be mock or http");
    if (c.embed_backend != "lookup" && c.embed_backend != "hash" && c.embed_backend != "http")
        throw Error(ErrorKind::Config, "embed.backend must be lookup, hash or http");
}

std::unique_ptr<ExtractionBackend> make_extraction_backend(const PipelineConfig& c) {
    if (c.extract_backend == "mock") {
        if (c.extract_rules.empty())
            throw Error(ErrorKind::Config, "extract.rules is required for the mock backend");
        return std::make_unique<MockExtractionBackend>(
            MockExtractionBackend::from_file(c.extract_rules));
    }
    if (c.extract_url.empty() || c.extract_model.empty())
        throw Error(ErrorKind::Config, "extract.url and extract.model are required");
    return std::make_unique<HttpChatBackend>(c.extract_url, c.extract_model, c.api_key);
}

std::unique_ptr<EmbeddingBackend> make_embedding_backend(const PipelineConfig& c) {
    if (c.embed_backend == "lookup") {
        if (c.embed_table.empty())
            throw Error(ErrorKind::Config, "embed.table is required for the lookup backend");
        return std::make_unique<LookupEmbeddingBackend>(
            LookupEmbeddingBackend::from_file(c.embed_table));
    }
    if (c.embed_backend == "hash")
        return std::make_unique<LookupEmbeddingBackend>(
            std::map<std::string, std::vector<double>>{}, c.embed_dim, false,
            "trigram-hash-" + std::to_string(c.embed_dim));
    if (c.embed_url.empty() || c.embed_model.empty())
        throw Error(ErrorKind::Config, "embed.url and embed.model are required");
    return std::make_unique<HttpEmbeddingBackend>(c.embed_url, c.embed_model, c.embed_dim,
                                                  c.embed_prefix, c.api_key);
}

// ---------------------------------------------------------------------------
// Stage execution

namespace {

class DirectoryLock {
public:
    explicit DirectoryLock(const fs::path& dir) {
        fs::create_directories(dir);
        auto path = dir / ".lock";
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
        if (fd_ < 0) throw Error(ErrorKind::Config, "cannot open lock file " + path.string());
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            throw Error(ErrorKind::Config,
                        "output directory " + dir.string() + " is in use by another run");
        }
    }
    ~DirectoryLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    int fd_ = -1;
};

// Tracks what a stage reads and writes for the manifest.
class StageRun {
public:
    StageRun(const PipelineConfig& config, Stage stage, std::ostream& log)
        : config_(config), stage_(stage), log_(log), started_(utc_timestamp_now()) {}

    fs::path path(std::string_view name) const { return config_.output_dir / std::string(name); }

    // Reads an artifact produced by an earlier stage.
    std::string input(std::string_view name, std::string_view producer) {
        auto p = path(name);
        std::error_code ec;
        if (!fs::exists(p, ec))
            throw Error(ErrorKind::Config, "missing input " + std::string(name) +
                                               " (produced by stage " + std::string(producer) +
                                               ")");
        return external_input(p, std::string(name));
    }

    std::string external_input(const fs::path& p, const std::string& key) {
        auto bytes = read_file(p);
        inputs_[key] = sha256_hex(bytes);
        return bytes;
    }

    void output(std::string_view name, std::string_view bytes) {
        write_file_atomic(path(name), bytes);
        outputs_[std::string(name)] = sha256_hex(bytes);
        info("wrote " + std::string(name));
    }

    void info(const std::string& msg) const {
        if (config_.verbose) log_ << "[" << to_string(stage_) << "] " << msg << "\n";
    }
    void warn(const std::string& msg) const {
        log_ << "[" << to_string(stage_) << "] warning: " << msg << "\n";
    }

    void record() const {
        auto manifest_path = path(artifacts::kManifest);
        json manifest = json::object();
        std::error_code ec;
        if (fs::exists(manifest_path, ec)) {
            try {
                manifest = json::parse(read_file(manifest_path));
            } catch (const json::exception&) {
                warn("manifest unreadable, starting a new one");
            }
        }
        manifest["tool_version"] = kToolVersion;
        manifest["config"] = json::parse(config_.raw_json.empty() ? "{}" : config_.raw_json);
        manifest["stages"][std::string(to_string(stage_))] = {{"started_at", started_},
                                                               {"finished_at", utc_timestamp_now()},
                                                               {"inputs", inputs_},
                                                               {"outputs", outputs_}};
        write_file_atomic(manifest_path, manifest.dump(2) + "\n");
    }

private:
    const PipelineConfig& config_;
    Stage stage_;
    std::ostream& log_;
    std::string started_;
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
};

void write_corpus(StageRun& run, const std::vector<Paper>& papers) {
    run.output(artifacts::kCorpus, write_corpus_jsonl(papers));
    run.info(std::to_string(papers.size()) + " papers");
}

void stage_fetch(const PipelineConfig& c, StageRun& run) {
    if (c.query.empty())
        throw Error(ErrorKind::Config, "stage fetch requires corpus.query");
    ArxivClientOptions opts;
    opts.endpoint = c.arxiv_url;
    opts.page_delay = c.page_delay;
    auto query = build_query(c.query, c.category_filter);
    run.info("query: " + query);
    write_corpus(run, fetch_papers(query, c.max_results, c.page_size, opts));
}

void stage_ingest(const PipelineConfig& c, StageRun& run) {
    if (!c.local_path) throw Error(ErrorKind::Config, "stage ingest requires corpus.local_path");
    std::vector<std::string> warnings;
    auto papers = ingest_local(*c.local_path, &warnings);
    for (const auto& w : warnings) run.warn(w);
    write_corpus(run, papers);
}

const char* const kCorpusProducer = "fetch|ingest";

void stage_extract(const PipelineConfig& c, StageRun& run) {
    auto papers = read_corpus_jsonl(run.input(artifacts::kCorpus, kCorpusProducer));
    auto backend = make_extraction_backend(c);
    ExtractionOptions opts;
    opts.budget = c.prompt_budget;
    auto outcome = extract_corpus(papers, *backend, c.concurrency, opts);
    for (const auto& w : outcome.warnings) run.warn(w);
    run.output(artifacts::kMentions, write_mentions_jsonl(outcome.mentions));
    run.info(std::to_string(outcome.mentions.size()) + " mentions");
}

std::vector<std::string> distinct_normalized(const std::vector<Mention>& mentions) {
    std::set<std::string> s;
    for (const auto& m : mentions) s.insert(m.normalized);
    return {s.begin(), s.end()};
}

void stage_embed(const PipelineConfig& c, StageRun& run) {
    auto mentions = read_mentions_jsonl(run.input(artifacts::kMentions, "extract"));
    auto backend = make_embedding_backend(c);
    auto cache_path = run.path(artifacts::kVectors);
    std::error_code ec;
    if (fs::exists(cache_path, ec)) run.external_input(cache_path, std::string(artifacts::kVectors));
    auto cache = VectorCache::load(cache_path, backend->model_id(), backend->dim());
    auto surfaces = distinct_normalized(mentions);
    if (!surfaces.empty()) {
        EmbeddingOptions opts;
        opts.batch_size = c.embed_batch_size;
        opts.concurrency = c.concurrency;
        size_t before = cache.size();
        try {
            embed_mentions(surfaces, *backend, cache, opts);
        } catch (...) {
            // Keep whatever succeeded for the next attempt.
            if (cache.size() > before) cache.save(cache_path);
            throw;
        }
        run.info(std::to_string(cache.size() - before) + " new vectors, " +
                 std::to_string(surfaces.size()) + " surfaces");
    }
    run.output(artifacts::kVectors, cache.serialize());
}

void stage_cluster(const PipelineConfig& c, StageRun& run) {
    auto mentions = read_mentions_jsonl(run.input(artifacts::kMentions, "extract"));
    auto cache = VectorCache::deserialize(run.input(artifacts::kVectors, "embed"));
    std::map<std::string, EmbeddingVector> vectors;
    for (const auto& s : distinct_normalized(mentions)) {
        const auto* v = cache.find(s);
        if (!v)
            throw Error(ErrorKind::DataIntegrity,
                        "no vector for '" + s + "' in vectors.cache; rerun stage embed");
        vectors.emplace(s, *v);
    }
    auto clusters = make_clusters(mentions, vectors, c.cluster_threshold);
    run.output(artifacts::kClusters, write_clusters_jsonl(clusters));
    run.info(std::to_string(clusters.size()) + " clusters");

    if (c.dump_dendrograms) {
        json dump = json::object();
        for (auto cat : kAllCategories) {
            std::set<std::string> distinct;
            for (const auto& m : mentions)
                if (m.category == cat) distinct.insert(m.normalized);
            if (distinct.empty()) continue;
            std::vector<std::string> leaves(distinct.begin(), distinct.end());
            std::vector<EmbeddingVector> vs;
            for (const auto& s : leaves) vs.push_back(vectors.at(s));
            dump[std::string(to_string(cat))] = json::parse(
                dendrogram_to_json(ward_cluster(std::span<const EmbeddingVector>(vs)), leaves));
        }
        run.output(artifacts::kDendrograms, dump.dump(2) + "\n");
    }
}

void stage_graph(const PipelineConfig& c, StageRun& run) {
    auto clusters = read_clusters_jsonl(run.input(artifacts::kClusters, "cluster"));
    auto mentions = read_mentions_jsonl(run.input(artifacts::kMentions, "extract"));
    auto g = build_cooccurrence(clusters, mentions, c.graph_view);
    run.output(artifacts::kGraph, export_graph(g, ExportFormat::StructuredText));
    run.output(artifacts::kGraphDot, export_graph(g, ExportFormat::Dot));
    run.output(artifacts::kGraphML, export_graph(g, ExportFormat::GraphML));
    run.info(std::to_string(g.nodes.size()) + " nodes, " + std::to_string(g.edges.size()) +
             " edges");
}

CommunityOptions community_options(const PipelineConfig& c) {
    CommunityOptions o;
    o.metric = c.gn_metric;
    o.weighted_modularity = c.gn_weighted_modularity;
    o.max_removals = c.gn_max_removals;
    return o;
}

void stage_communities(const PipelineConfig& c, StageRun& run) {
    auto g = import_graph_json(run.input(artifacts::kGraph, "graph"));
    auto trace = girvan_newman(g, community_options(c));
    run.output(artifacts::kCommunities, communities_to_json(g, trace));
    const auto& best = trace.partitions[best_partition_index(trace)];
    run.info(std::to_string(best.community_count) + " communities, modularity " +
             std::to_string(best.modularity));
}

void stage_report(const PipelineConfig& c, StageRun& run) {
    auto clusters = read_clusters_jsonl(run.input(artifacts::kClusters, "cluster"));
    auto g = import_graph_json(run.input(artifacts::kGraph, "graph"));
    json communities;
    try {
        communities = json::parse(run.input(artifacts::kCommunities, "communities"));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("bad communities.json: ") + e.what());
    }

    std::ostringstream text;
    json top = json::object();
    for (auto cat : kAllCategories) {
        auto ranked = top_frequencies(clusters, cat, c.report_top_k);
        text << "Most frequent " << to_string(cat) << " clusters (papers)\n";
        json rows = json::array();
        for (size_t i = 0; i < ranked.size(); ++i) {
            text << "  " << (i + 1) << ". " << ranked[i].first << " (" << ranked[i].second
                 << ")\n";
            rows.push_back({{"label", ranked[i].first}, {"paper_freq", ranked[i].second}});
        }
        if (ranked.empty()) text << "  (none)\n";
        text << "\n";
        top[std::string(to_string(cat))] = rows;
    }
    text << "Co-occurrence graph (" << to_string(g.view) << "): " << g.nodes.size()
         << " nodes, " << g.edges.size() << " edges\n\n";

    json summary = json::object();
    try {
        size_t best = communities.at("best_index").get<size_t>();
        const auto& snap = communities.at("snapshots").at(best);
        auto groups = snap.at("communities");
        text << "Communities (snapshot " << best << ", modularity "
             << snap.at("modularity").get<double>() << ")\n";
        for (size_t i = 0; i < groups.size(); ++i) {
            text << "  [" << i << "]";
            const char* sep = " ";
            for (const auto& label : groups[i]) {
                text << sep << label.get<std::string>();
                sep = ", ";
            }
            text << "\n";
        }
        summary = {{"best_index", best},
                   {"modularity", snap.at("modularity")},
                   {"communities", groups}};
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("bad communities.json: ") + e.what());
    }

    json report = {{"top_frequencies", top},
                   {"graph", {{"view", to_string(g.view)},
                              {"nodes", g.nodes.size()},
                              {"edges", g.edges.size()}}},
                   {"communities", summary}};
    run.output(artifacts::kReportText, text.str());
    run.output(artifacts::kReportJson, report.dump(2) + "\n");
}

void stage_eval(const PipelineConfig& c, StageRun& run) {
    if (!c.gold) throw Error(ErrorKind::Config, "stage eval requires eval.gold");
    std::error_code ec;
    if (!fs::exists(*c.gold, ec))
        throw Error(ErrorKind::Config, "gold file not found: " + c.gold->string());
    auto gold = read_gold_jsonl(run.external_input(*c.gold, "gold:" + c.gold->filename().string()));
    auto mentions = read_mentions_jsonl(run.input(artifacts::kMentions, "extract"));
    std::vector<SynonymCluster> clusters;
    if (c.eval_policy == MatchPolicy::ClusterAware)
        clusters = read_clusters_jsonl(run.input(artifacts::kClusters, "cluster"));
    auto report = make_report(match_mentions(mentions, gold, c.eval_policy, clusters));
    run.output(artifacts::kEvalJson, report_to_json(report));
    run.output(artifacts::kEvalText, report_to_table(report));
}

void execute_unlocked(Stage stage, const PipelineConfig& config, std::ostream& log) {
    StageRun run(config, stage, log);
    switch (stage) {
    case Stage::Fetch: stage_fetch(config, run); break;
    case Stage::Ingest: stage_ingest(config, run); break;
    case Stage::Extract: stage_extract(config, run); break;
    case Stage::Embed: stage_embed(config, run); break;
    case Stage::Cluster: stage_cluster(config, run); break;
    case Stage::Graph: stage_graph(config, run); break;
    case Stage::Communities: stage_communities(config, run); break;
    case Stage::Report: stage_report(config, run); break;
    case Stage::Eval: stage_eval(config, run); break;
    }
    run.record();
}

int report_failure(Stage stage, const std::exception& e, std::ostream& log) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        log << "error [" << to_string(stage) << ", " << to_string(err->kind())
            << "]: " << err->what() << "\n";
        return exit_code(err->kind());
    }
    log << "error [" << to_string(stage) << "]: " << e.what() << "\n";
    return 1;
}

}  // namespace

void execute_stage(Stage stage, const PipelineConfig& config, std::ostream& log) {
    DirectoryLock lock(config.output_dir);
    execute_unlocked(stage, config, log);
}

int run_stage(Stage stage, const PipelineConfig& config, std::ostream& log) {
    try {
        execute_stage(stage, config, log);
        return 0;
    } catch (const std::exception& e) {
        return report_failure(stage, e, log);
    }
}

int run_pipeline(const PipelineConfig& config, std::ostream& log) {
    std::vector<Stage> stages = {config.local_path ? Stage::Ingest : Stage::Fetch,
                                 Stage::Extract,
                                 Stage::Embed,
                                 Stage::Cluster,
                                 Stage::Graph,
                                 Stage::Communities,
                                 Stage::Report};
    if (config.gold) stages.push_back(Stage::Eval);

    Stage current = stages.front();
    try {
        validate_config(config);
        DirectoryLock lock(config.output_dir);
        for (auto s : stages) {
            current = s;
            execute_unlocked(s, config, log);
        }
        return 0;
    } catch (const std::exception& e) {
        return report_failure(current, e, log);
    }
}

}  // namespace litscape
