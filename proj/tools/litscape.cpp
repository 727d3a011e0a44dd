#include "litscape/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"litscape: objective/method/dataset mining over paper corpora"};
    app.set_version_flag("--version", std::string(litscape::kToolVersion));

    std::string config_path;
    std::string out_dir;
    bool verbose = false;
    app.add_option("--config", config_path, "Pipeline config (flat JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
    app.add_flag("-v,--verbose", verbose, "Log stage progress to stderr");
    app.require_subcommand(1, 1);
    app.fallthrough();

    struct Entry {
        const char* name;
        const char* help;
    };
    const Entry stages[] = {
        {"fetch", "Harvest paper metadata from the arXiv API into corpus.jsonl"},
        {"ingest", "Read local .txt/.tex papers into corpus.jsonl"},
        {"extract", "Extract objective/method/dataset mentions into mentions.jsonl"},
        {"embed", "Embed distinct normalized mentions into vectors.cache"},
        {"cluster", "Ward-cluster mentions into clusters.jsonl"},
        {"graph", "Build the co-occurrence graph (graph.json, .dot, .graphml)"},
        {"communities", "Girvan-Newman communities into communities.json"},
        {"report", "Frequency tables and community summary"},
        {"eval", "Precision/recall/F1 against a gold file"},
    };
    for (const auto& s : stages) app.add_subcommand(s.name, s.help);
    app.add_subcommand("run", "Run every stage in order");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    litscape::PipelineConfig config;
    try {
        config = litscape::load_config(config_path);
    } catch (const litscape::Error& e) {
        std::cerr << "error [config]: " << e.what() << "\n";
        return litscape::exit_code(e.kind());
    }
    if (!out_dir.empty()) config.output_dir = out_dir;
    config.verbose = verbose;

    auto* sub = app.get_subcommands().front();
    if (sub->get_name() == "run") return litscape::run_pipeline(config, std::cerr);
    return litscape::run_stage(litscape::stage_from_string(sub->get_name()), config, std::cerr);
}
