#include "litscape/common.hpp"

#include <cctype>

namespace litscape {

std::string_view to_string(Category c) {
    switch (c) {
    case Category::Objective: return "Objective";
    case Category::Method: return "Method";
    case Category::Dataset: return "Dataset";
    }
    return "?";
}

std::string_view to_string(SectionKind k) {
    switch (k) {
    case SectionKind::Introduction: return "Introduction";
    case SectionKind::Methods: return "Methods";
    case SectionKind::Results: return "Results";
    case SectionKind::Data: return "Data";
    case SectionKind::Experiments: return "Experiments";
    case SectionKind::Conclusion: return "Conclusion";
    case SectionKind::Other: return "Other";
    }
    return "?";
}

Category category_from_string(std::string_view s) {
    auto l = to_lower(s);
    if (l == "objective") return Category::Objective;
    if (l == "method") return Category::Method;
    if (l == "dataset") return Category::Dataset;
    throw Error(ErrorKind::Parse, "unknown category '" + std::string(s) + "'");
}

SectionKind section_kind_from_string(std::string_view s) {
    auto l = to_lower(s);
    if (l == "introduction") return SectionKind::Introduction;
    if (l == "methods") return SectionKind::Methods;
    if (l == "results") return SectionKind::Results;
    if (l == "data") return SectionKind::Data;
    if (l == "experiments") return SectionKind::Experiments;
    if (l == "conclusion") return SectionKind::Conclusion;
    if (l == "other") return SectionKind::Other;
    throw Error(ErrorKind::Parse, "unknown section kind '" + std::string(s) + "'");
}

std::string_view to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Config: return "config";
    case ErrorKind::Network: return "network";
    case ErrorKind::Backend: return "backend";
    case ErrorKind::DataIntegrity: return "data-integrity";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::EmptyCorpus: return "empty-corpus";
    case ErrorKind::EmptyPaper: return "empty-paper";
    case ErrorKind::DegenerateEmbedding: return "degenerate-embedding";
    }
    return "?";
}

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Network: return 3;
    case ErrorKind::Backend:
    case ErrorKind::DegenerateEmbedding: return 4;
    case ErrorKind::DataIntegrity:
    case ErrorKind::Parse:
    case ErrorKind::EmptyCorpus:
    case ErrorKind::EmptyPaper: return 5;
    case ErrorKind::InvalidArgument: return 1;
    }
    return 1;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

std::string trim(std::string_view s) {
    auto is_ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    size_t b = 0, e = s.size();
    while (b < e && is_ws(s[b])) ++b;
    while (e > b && is_ws(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace litscape
