#pragma once

#include "litscape/common.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace litscape {

struct Section {
    SectionKind kind = SectionKind::Other;
    std::string heading;
    std::string body;

    bool operator==(const Section&) const = default;
};

enum class PaperSource { ArxivApi, LocalFile };

std::string_view to_string(PaperSource s);
PaperSource paper_source_from_string(std::string_view s);

struct Paper {
    std::string id;
    std::string title;
    std::string abstract;
    std::vector<Section> sections;
    PaperSource source = PaperSource::LocalFile;
    std::string fetched_at;

    bool operator==(const Paper&) const = default;
};

// AND-combines quoted keyword phrases, optionally restricted to an arXiv
// category prefix (`cat:<filter>*`).
std::string build_query(const std::vector<std::string>& keywords,
                        const std::optional<std::string>& category_filter);

struct ArxivClientOptions {
    std::string endpoint = "http://export.arxiv.org/api/query";
    // Politeness gap between consecutive page requests.
    std::chrono::milliseconds page_delay{3000};
    int max_retries = 4;
    std::chrono::milliseconds initial_backoff{1000};
    std::chrono::milliseconds max_backoff{16000};
    std::chrono::milliseconds timeout{30000};
    // Injectable for tests; defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleep;
};

// Page-by-page harvesting of Atom entries; ids are deduplicated.
std::vector<Paper> fetch_papers(const std::string& query, int max_results, int page_size,
                                const ArxivClientOptions& options = {});

// Parses one Atom page. Throws Error{Parse} naming the offending entry index.
struct AtomPage {
    std::vector<Paper> entries;
    std::optional<long> total_results;
};
AtomPage parse_atom_feed(const std::string& xml);

// Reads every .txt / .tex file in `dir` (sorted by file name). Unreadable files
// are reported through `warnings` and skipped.
std::vector<Paper> ingest_local(const std::filesystem::path& dir,
                                std::vector<std::string>* warnings = nullptr);

// Drops `%` comments (respecting `\%`) and everything outside the document body.
std::string strip_latex(const std::string& tex);

SectionKind classify_heading(std::string_view heading);

std::vector<Section> segment_sections(const std::string& raw);

std::vector<Section> select_sections(const Paper& paper, Category category);

// corpus.jsonl: one JSON object per line.
std::string paper_to_json_line(const Paper& p);
Paper paper_from_json_line(const std::string& line);
std::string write_corpus_jsonl(const std::vector<Paper>& papers);
std::vector<Paper> read_corpus_jsonl(const std::string& text);

}  // namespace litscape
