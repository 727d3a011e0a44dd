#pragma once

#include "litscape/clustering.hpp"
#include "litscape/common.hpp"
#include "litscape/extraction.hpp"

#include <map>
#include <string>
#include <vector>

namespace litscape {

struct GoldAnnotation {
    std::string paper_id;
    Category category = Category::Objective;
    std::vector<std::string> items;  // normalized, deduplicated
};

// gold.jsonl: {paper_id, category, items:[text]}. Items are normalized like
// Mention::normalized; records for the same (paper, category) are merged.
std::vector<GoldAnnotation> read_gold_jsonl(const std::string& text);

struct MatchCounts {
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;

    MatchCounts& operator+=(const MatchCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    bool operator==(const MatchCounts&) const = default;
};

struct Scores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

Scores f1_scores(size_t tp, size_t fp, size_t fn);

enum class MatchPolicy { NormalizedExact, ClusterAware };

MatchPolicy match_policy_from_string(std::string_view s);

// Scores only papers that appear in the gold set. ClusterAware treats a
// prediction and a gold item as equal when both normalized forms belong to the
// same cluster of that category.
std::map<Category, MatchCounts> match_mentions(const std::vector<Mention>& predicted,
                                               const std::vector<GoldAnnotation>& gold,
                                               MatchPolicy policy,
                                               const std::vector<SynonymCluster>& clusters = {});

struct CategoryReport {
    MatchCounts counts;
    Scores scores;
};

struct EvalReport {
    std::map<Category, CategoryReport> per_category;
    CategoryReport micro;
};

EvalReport make_report(const std::map<Category, MatchCounts>& counts);

std::string report_to_json(const EvalReport& r);
std::string report_to_table(const EvalReport& r);

}  // namespace litscape
