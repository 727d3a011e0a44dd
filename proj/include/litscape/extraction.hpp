#pragma once

#include "litscape/common.hpp"
#include "litscape/corpus.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace litscape {

struct PromptTemplate {
    Category category = Category::Objective;
    std::string instruction;
    std::string question;
    std::string format_rule;
};

// Built-in templates; the three questions are fixed.
PromptTemplate default_template(Category c);

inline constexpr size_t kDefaultPromptBudget = 12000;

// Separator between the four prompt parts.
inline constexpr std::string_view kPromptDelimiter = "\n\n----\n\n";

// instruction, question, format rule, section text (truncated to `budget`
// code points), joined by kPromptDelimiter.
std::string render_prompt(const PromptTemplate& tmpl, std::string_view section_text,
                          size_t budget = kDefaultPromptBudget);

// Line-per-item (or JSON string array) response -> cleaned, case-insensitively deduplicated items.
std::vector<std::string> parse_response(std::string_view raw);

// Lowercase, drop parenthetical spans, trim, collapse whitespace.
std::string normalize_surface(std::string_view surface);

struct Mention {
    std::string paper_id;
    Category category = Category::Objective;
    std::string surface;
    SectionKind section_kind = SectionKind::Other;
    std::string normalized;

    bool operator==(const Mention&) const = default;
};

// Chat-completion contract. Implementations must be safe to call from
// several threads at once.
class ExtractionBackend {
public:
    virtual ~ExtractionBackend() = default;
    virtual std::string complete(const std::string& prompt) const = 0;
    virtual std::string model_id() const = 0;
};

struct MockRule {
    std::string contains;
    std::vector<std::string> emit;
    // Restricts the rule to prompts rendered for this category.
    std::optional<Category> category;
};

// Deterministic substring-rule backend. Rules are matched case-insensitively
// against the section-text part of the prompt; the emitted items of every
// matching rule are returned one per line, or NONE.
class MockExtractionBackend : public ExtractionBackend {
public:
    explicit MockExtractionBackend(std::vector<MockRule> rules);
    static MockExtractionBackend from_json(const std::string& text);
    static MockExtractionBackend from_file(const std::filesystem::path& path);

    std::string complete(const std::string& prompt) const override;
    std::string model_id() const override { return "mock"; }

private:
    std::vector<MockRule> rules_;
};

// OpenAI-style /chat/completions client, temperature 0.
class HttpChatBackend : public ExtractionBackend {
public:
    HttpChatBackend(std::string url, std::string model, std::string api_key = {},
                    std::chrono::milliseconds timeout = std::chrono::seconds(120));

    std::string complete(const std::string& prompt) const override;
    std::string model_id() const override { return model_; }

    static std::string request_body(const std::string& model, const std::string& prompt);
    static std::string response_content(const std::string& body);

private:
    std::string url_;
    std::string model_;
    std::string api_key_;
    std::chrono::milliseconds timeout_;
};

struct ExtractionOptions {
    size_t budget = kDefaultPromptBudget;
    int max_retries = 3;
};

struct ExtractionOutcome {
    std::vector<Mention> mentions;
    std::vector<std::string> warnings;
};

// Selected sections -> render -> complete -> parse, deduplicated on
// (category, normalized). Throws Error{Backend} when every section failed.
ExtractionOutcome extract_mentions(const Paper& paper, Category category,
                                   const ExtractionBackend& backend,
                                   const ExtractionOptions& options = {});

// All papers x categories with at most `concurrency` papers in flight. The
// result is sorted by (paper_id, category, normalized).
ExtractionOutcome extract_corpus(const std::vector<Paper>& papers,
                                 const ExtractionBackend& backend, size_t concurrency,
                                 const ExtractionOptions& options = {});

std::string mention_to_json_line(const Mention& m);
Mention mention_from_json_line(const std::string& line);
std::string write_mentions_jsonl(const std::vector<Mention>& mentions);
std::vector<Mention> read_mentions_jsonl(const std::string& text);

}  // namespace litscape
