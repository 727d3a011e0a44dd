#include "litscape/extraction.hpp"

#include "litscape/http.hpp"
#include "litscape/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <regex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace litscape {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatRule =
    "Answer with one item per line and nothing else. Do not number or explain the items. "
    "If the text contains no such item, answer with the single word NONE.";

constexpr std::string_view kSystemPrompt =
    "You extract information from scientific papers. Follow the requested output format "
    "exactly.";

// Byte offset just past the first `limit` UTF-8 code points.
size_t utf8_prefix_bytes(std::string_view s, size_t limit) {
    size_t count = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        auto byte = static_cast<unsigned char>(s[i]);
        if ((byte & 0xC0) != 0x80) {
            if (count == limit) return i;
            ++count;
        }
    }
    return s.size();
}

}  // namespace

PromptTemplate default_template(Category c) {
    switch (c) {
    case Category::Objective:
        return {c,
                "Read the following part of a scientific paper and extract the research "
                "objectives it states, each as a short phrase.",
                "What is the purpose of this study?", std::string(kFormatRule)};
    case Category::Method:
        return {c,
                "Read the following part of a scientific paper and extract the names of the "
                "machine learning models and methods it uses.",
                "Which models are used in this study?", std::string(kFormatRule)};
    case Category::Dataset:
        return {c,
                "Read the following part of a scientific paper and extract the names of the "
                "datasets it uses.",
                "Which datasets are used?", std::string(kFormatRule)};
    }
    throw Error(ErrorKind::InvalidArgument, "unknown category");
}

std::string render_prompt(const PromptTemplate& tmpl, std::string_view section_text,
                          size_t budget) {
    auto text = section_text.substr(0, utf8_prefix_bytes(section_text, budget));
    std::string out;
    out.reserve(tmpl.instruction.size() + tmpl.question.size() + tmpl.format_rule.size() +
                text.size() + 3 * kPromptDelimiter.size());
    out += tmpl.instruction;
    out += kPromptDelimiter;
    out += tmpl.question;
    out += kPromptDelimiter;
    out += tmpl.format_rule;
    out += kPromptDelimiter;
    out += text;
    return out;
}

std::vector<std::string> parse_response(std::string_view raw) {
    static const std::regex bullet(R"(^(?:[-*+]\s+|\d+[.)]\s+|\(\d+\)\s+))");
    std::vector<std::string> items;
    std::set<std::string> seen;
    std::string text(raw);
    // Some models answer with a JSON array of strings instead of lines.
    if (auto t = trim(text); !t.empty() && t.front() == '[') {
        try {
            auto arr = nlohmann::json::parse(t);
            if (arr.is_array()) {
                std::string lines;
                for (const auto& v : arr)
                    if (v.is_string()) lines += v.get<std::string>() + "\n";
                text = lines;
            }
        } catch (const nlohmann::json::exception&) {
        }
    }
    std::istringstream in{text};
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.rfind("\xE2\x80\xA2", 0) == 0) t = trim(t.substr(3));  // U+2022 bullet
        t = trim(std::regex_replace(t, bullet, "", std::regex_constants::format_first_only));
        // Markdown emphasis and paired quotes around the whole item.
        while (t.size() >= 4 && t.rfind("**", 0) == 0 && t.substr(t.size() - 2) == "**")
            t = trim(t.substr(2, t.size() - 4));
        for (auto [open, close] : {std::pair<std::string_view, std::string_view>{"\"", "\""},
                                   {"'", "'"},
                                   {"`", "`"},
                                   {"\xE2\x80\x9C", "\xE2\x80\x9D"}}) {
            if (t.size() >= open.size() + close.size() && t.rfind(open, 0) == 0 &&
                t.compare(t.size() - close.size(), close.size(), close) == 0) {
                t = trim(t.substr(open.size(), t.size() - open.size() - close.size()));
                break;
            }
        }
        if (t.empty() || to_lower(t) == "none") continue;
        if (seen.insert(to_lower(t)).second) items.push_back(t);
    }
    return items;
}

std::string normalize_surface(std::string_view surface) {
    std::string stripped;
    int depth = 0;
    for (char c : surface) {
        if (c == '(') {
            ++depth;
            stripped.push_back(' ');
        } else if (c == ')') {
            if (depth > 0) --depth;
            stripped.push_back(' ');
        } else if (depth == 0) {
            stripped.push_back(c);
        }
    }
    auto out = collapse_whitespace(to_lower(stripped));
    if (!out.empty()) return out;
    // The whole surface was parenthesised; keep its contents instead.
    std::string inner;
    for (char c : surface)
        inner.push_back(c == '(' || c == ')' ? ' ' : c);
    return collapse_whitespace(to_lower(inner));
}

// ---------------------------------------------------------------------------
// Backends

MockExtractionBackend::MockExtractionBackend(std::vector<MockRule> rules)
    : rules_(std::move(rules)) {
    for (auto& r : rules_) r.contains = to_lower(r.contains);
}

MockExtractionBackend MockExtractionBackend::from_json(const std::string& text) {
    try {
        auto j = json::parse(text);
        const json& list = j.is_object() ? j.at("rules") : j;
        std::vector<MockRule> rules;
        for (const auto& r : list) {
            MockRule rule;
            rule.contains = r.at("contains").get<std::string>();
            rule.emit = r.at("emit").get<std::vector<std::string>>();
            if (r.contains("category"))
                rule.category = category_from_string(r.at("category").get<std::string>());
            rules.push_back(std::move(rule));
        }
        return MockExtractionBackend(std::move(rules));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, std::string("bad mock rule file: ") + e.what());
    }
}

MockExtractionBackend MockExtractionBackend::from_file(const std::filesystem::path& path) {
    return from_json(read_file(path));
}

std::string MockExtractionBackend::complete(const std::string& prompt) const {
    // Parts: instruction, question, format rule, section text.
    std::string_view view(prompt);
    std::vector<std::string_view> parts;
    for (int i = 0; i < 3; ++i) {
        auto pos = view.find(kPromptDelimiter);
        if (pos == std::string_view::npos) break;
        parts.push_back(view.substr(0, pos));
        view.remove_prefix(pos + kPromptDelimiter.size());
    }
    std::optional<Category> category;
    if (parts.size() == 3) {
        for (auto c : kAllCategories)
            if (parts[1] == default_template(c).question) category = c;
    }
    auto text = to_lower(parts.size() == 3 ? view : std::string_view(prompt));

    std::string out;
    for (const auto& rule : rules_) {
        if (rule.category && rule.category != category) continue;
        if (text.find(rule.contains) == std::string::npos) continue;
        for (const auto& item : rule.emit) out += "- " + item + "\n";
    }
    return out.empty() ? "NONE" : out;
}

HttpChatBackend::HttpChatBackend(std::string url, std::string model, std::string api_key,
                                 std::chrono::milliseconds timeout)
    : url_(std::move(url)), model_(std::move(model)), api_key_(std::move(api_key)),
      timeout_(timeout) {}

std::string HttpChatBackend::request_body(const std::string& model, const std::string& prompt) {
    json body = {{"model", model},
                 {"messages",
                  json::array({{{"role", "system"}, {"content", kSystemPrompt}},
                               {{"role", "user"}, {"content", prompt}}})},
                 {"temperature", 0}};
    return body.dump();
}

std::string HttpChatBackend::response_content(const std::string& body) {
    try {
        auto j = json::parse(body);
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Backend, std::string("unexpected chat response: ") + e.what());
    }
}

std::string HttpChatBackend::complete(const std::string& prompt) const {
    http::Headers headers;
    if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);
    http::Response res;
    try {
        res = http::post_json(url_, request_body(model_, prompt), headers, timeout_);
    } catch (const Error& e) {
        throw Error(ErrorKind::Backend, e.what());
    }
    if (res.status != 200)
        throw Error(ErrorKind::Backend,
                    "chat endpoint " + url_ + " returned HTTP " + std::to_string(res.status));
    return response_content(res.body);
}

// ---------------------------------------------------------------------------
// Extraction

ExtractionOutcome extract_mentions(const Paper& paper, Category category,
                                   const ExtractionBackend& backend,
                                   const ExtractionOptions& options) {
    auto tmpl = default_template(category);
    auto sections = select_sections(paper, category);

    ExtractionOutcome outcome;
    std::set<std::string> seen;
    size_t failed = 0;
    std::string last_error;
    for (const auto& section : sections) {
        auto prompt = render_prompt(tmpl, section.body, options.budget);
        std::optional<std::string> response;
        for (int attempt = 0; attempt <= options.max_retries && !response; ++attempt) {
            try {
                response = backend.complete(prompt);
            } catch (const std::exception& e) {
                last_error = e.what();
            }
        }
        if (!response) {
            ++failed;
            outcome.warnings.push_back("paper " + paper.id + ", section '" + section.heading +
                                       "' (" + std::string(to_string(category)) +
                                       "): extraction failed: " + last_error);
            continue;
        }
        for (auto& surface : parse_response(*response)) {
            auto normalized = normalize_surface(surface);
            if (normalized.empty() || !seen.insert(normalized).second) continue;
            outcome.mentions.push_back(
                {paper.id, category, trim(surface), section.kind, std::move(normalized)});
        }
    }
    if (failed == sections.size())
        throw Error(ErrorKind::Backend, "extraction failed for every section of paper " +
                                            paper.id + " (" + std::string(to_string(category)) +
                                            "): " + last_error);
    return outcome;
}

ExtractionOutcome extract_corpus(const std::vector<Paper>& papers,
                                 const ExtractionBackend& backend, size_t concurrency,
                                 const ExtractionOptions& options) {
    std::vector<ExtractionOutcome> per_paper(papers.size());
    std::vector<std::exception_ptr> errors(papers.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < papers.size(); i = next++) {
            try {
                for (auto c : kAllCategories) {
                    auto o = extract_mentions(papers[i], c, backend, options);
                    auto& dst = per_paper[i];
                    dst.mentions.insert(dst.mentions.end(), o.mentions.begin(), o.mentions.end());
                    dst.warnings.insert(dst.warnings.end(), o.warnings.begin(), o.warnings.end());
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    size_t threads = std::clamp<size_t>(concurrency, 1, std::max<size_t>(papers.size(), 1));
    {
        std::vector<std::jthread> pool;
        for (size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    ExtractionOutcome merged;
    for (auto& o : per_paper) {
        merged.mentions.insert(merged.mentions.end(), o.mentions.begin(), o.mentions.end());
        merged.warnings.insert(merged.warnings.end(), o.warnings.begin(), o.warnings.end());
    }
    std::sort(merged.mentions.begin(), merged.mentions.end(), [](const auto& a, const auto& b) {
        return std::tie(a.paper_id, a.category, a.normalized) <
               std::tie(b.paper_id, b.category, b.normalized);
    });
    return merged;
}

// ---------------------------------------------------------------------------
// Persistence

std::string mention_to_json_line(const Mention& m) {
    json j = {{"paper_id", m.paper_id},
              {"category", to_string(m.category)},
              {"surface", m.surface},
              {"normalized", m.normalized},
              {"section_kind", to_string(m.section_kind)}};
    return j.dump();
}

Mention mention_from_json_line(const std::string& line) {
    try {
        auto j = json::parse(line);
        Mention m;
        m.paper_id = j.at("paper_id").get<std::string>();
        m.category = category_from_string(j.at("category").get<std::string>());
        m.surface = j.at("surface").get<std::string>();
        m.normalized = j.at("normalized").get<std::string>();
        m.section_kind = section_kind_from_string(j.value("section_kind", "Other"));
        if (trim(m.surface).empty() || m.normalized.empty())
            throw Error(ErrorKind::DataIntegrity, "mention with empty surface in " + m.paper_id);
        return m;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("bad mention record: ") + e.what());
    }
}

std::string write_mentions_jsonl(const std::vector<Mention>& mentions) {
    std::string out;
    for (const auto& m : mentions) {
        out += mention_to_json_line(m);
        out += '\n';
    }
    return out;
}

std::vector<Mention> read_mentions_jsonl(const std::string& text) {
    std::vector<Mention> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!trim(line).empty()) out.push_back(mention_from_json_line(line));
    return out;
}

}  // namespace litscape
