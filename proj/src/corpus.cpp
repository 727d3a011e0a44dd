#include "litscape/corpus.hpp"

#include "litscape/http.hpp"
#include "litscape/io.hpp"

#include <json.hpp>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

namespace litscape {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(PaperSource s) {
    return s == PaperSource::ArxivApi ? "ArxivApi" : "LocalFile";
}

PaperSource paper_source_from_string(std::string_view s) {
    if (s == "ArxivApi") return PaperSource::ArxivApi;
    if (s == "LocalFile") return PaperSource::LocalFile;
    throw Error(ErrorKind::Parse, "unknown paper source '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Query construction

std::string build_query(const std::vector<std::string>& keywords,
                        const std::optional<std::string>& category_filter) {
    if (keywords.empty()) throw Error(ErrorKind::InvalidArgument, "no query keywords");
    std::vector<std::string> terms;
    if (category_filter && !trim(*category_filter).empty())
        terms.push_back("cat:" + trim(*category_filter) + "*");
    for (const auto& kw : keywords) {
        auto t = trim(kw);
        // Embedded double quotes would terminate the phrase early.
        t.erase(std::remove(t.begin(), t.end(), '"'), t.end());
        t = collapse_whitespace(t);
        if (t.empty()) throw Error(ErrorKind::InvalidArgument, "empty query keyword");
        terms.push_back("all:\"" + t + "\"");
    }
    std::string out;
    for (size_t i = 0; i < terms.size(); ++i) {
        if (i) out += " AND ";
        out += terms[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Atom feed

namespace {

namespace pt = boost::property_tree;

std::string strip_arxiv_prefix(std::string id) {
    for (std::string_view prefix : {"http://arxiv.org/abs/", "https://arxiv.org/abs/"}) {
        if (id.rfind(prefix, 0) == 0) return id.substr(prefix.size());
    }
    return id;
}

}  // namespace

AtomPage parse_atom_feed(const std::string& xml) {
    pt::ptree tree;
    try {
        std::istringstream in(xml);
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw Error(ErrorKind::Parse, std::string("malformed Atom feed: ") + e.what());
    }
    auto feed = tree.get_child_optional("feed");
    if (!feed) throw Error(ErrorKind::Parse, "malformed Atom feed: no <feed> root");

    AtomPage page;
    if (auto total = feed->get_optional<std::string>("opensearch:totalResults")) {
        try {
            page.total_results = std::stol(trim(*total));
        } catch (const std::exception&) {
            throw Error(ErrorKind::Parse, "malformed Atom feed: bad totalResults");
        }
    }
    auto now = utc_timestamp_now();
    size_t index = 0;
    for (const auto& [name, node] : *feed) {
        if (name != "entry") continue;
        auto id = node.get_optional<std::string>("id");
        auto title = node.get_optional<std::string>("title");
        if (!id || trim(*id).empty() || !title)
            throw Error(ErrorKind::Parse,
                        "malformed Atom feed: entry " + std::to_string(index) +
                            " lacks id or title");
        auto summary = node.get<std::string>("summary", "");
        if (id->find("/api/errors") != std::string::npos)
            throw Error(ErrorKind::Parse, "arXiv API error: " + collapse_whitespace(summary));
        Paper p;
        p.id = strip_arxiv_prefix(trim(*id));
        p.title = collapse_whitespace(*title);
        p.abstract = collapse_whitespace(summary);
        p.source = PaperSource::ArxivApi;
        p.fetched_at = now;
        page.entries.push_back(std::move(p));
        ++index;
    }
    return page;
}

std::vector<Paper> fetch_papers(const std::string& query, int max_results, int page_size,
                                const ArxivClientOptions& options) {
    if (max_results <= 0 || page_size <= 0)
        throw Error(ErrorKind::InvalidArgument, "max_results and page_size must be positive");
    if (page_size > max_results)
        throw Error(ErrorKind::InvalidArgument, "page_size exceeds max_results");

    auto sleep = options.sleep ? options.sleep
                               : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

    auto request_page = [&](int start, int count) {
        http::Params params = {{"search_query", query},
                               {"start", std::to_string(start)},
                               {"max_results", std::to_string(count)}};
        auto backoff = options.initial_backoff;
        std::string last_error;
        for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
            if (attempt > 0) {
                sleep(backoff);
                backoff = std::min(backoff * 2, options.max_backoff);
            }
            try {
                auto res = http::get(options.endpoint, params, options.timeout);
                if (res.status == 200) return res.body;
                last_error = "HTTP " + std::to_string(res.status);
                if (!http::is_transient(res.status)) break;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Network) throw;
                last_error = e.what();
            }
        }
        throw Error(ErrorKind::Network, "arXiv request (start=" + std::to_string(start) +
                                            ") failed: " + last_error);
    };

    std::vector<Paper> papers;
    std::set<std::string> seen;
    int start = 0;
    while (start < max_results) {
        if (start > 0) sleep(options.page_delay);
        int count = std::min(page_size, max_results - start);
        auto page = parse_atom_feed(request_page(start, count));
        for (auto& p : page.entries) {
            if (seen.insert(p.id).second) papers.push_back(std::move(p));
        }
        start += count;
        if (static_cast<int>(page.entries.size()) < count) break;
        if (page.total_results && start >= *page.total_results) break;
    }
    return papers;
}

// ---------------------------------------------------------------------------
// Segmentation

SectionKind classify_heading(std::string_view heading) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : to_lower(heading)) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        } else if (!cur.empty()) {
            words.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));

    auto any_prefix = [&](std::initializer_list<std::string_view> prefixes) {
        for (const auto& w : words)
            for (auto p : prefixes)
                if (w.rfind(p, 0) == 0) return true;
        return false;
    };
    // First matching rule wins.
    if (any_prefix({"introduction"})) return SectionKind::Introduction;
    if (any_prefix({"conclu"})) return SectionKind::Conclusion;
    if (any_prefix({"experiment"})) return SectionKind::Experiments;
    if (any_prefix({"data"})) return SectionKind::Data;
    if (any_prefix({"result"})) return SectionKind::Results;
    if (any_prefix({"method", "approach", "model"})) return SectionKind::Methods;
    return SectionKind::Other;
}

namespace {

void push_section(std::vector<Section>& out, std::string heading, std::string_view body,
                  bool preamble) {
    auto text = trim(body);
    if (text.empty()) return;
    Section s;
    s.kind = preamble ? SectionKind::Other : classify_heading(heading);
    s.heading = preamble ? std::string("preamble") : std::move(heading);
    s.body = std::move(text);
    out.push_back(std::move(s));
}

std::vector<Section> segment_latex(const std::string& raw) {
    static const std::regex section_re(R"(\\section\*?\s*\{)");
    std::vector<Section> out;
    size_t body_start = 0;
    std::string heading;
    bool preamble = true;
    auto it = std::sregex_iterator(raw.begin(), raw.end(), section_re);
    for (; it != std::sregex_iterator(); ++it) {
        size_t cmd_pos = static_cast<size_t>(it->position());
        if (cmd_pos < body_start) continue;  // nested inside a previous heading
        size_t open = cmd_pos + static_cast<size_t>(it->length());
        int depth = 1;
        size_t close = open;
        while (close < raw.size() && depth > 0) {
            if (raw[close] == '{') ++depth;
            if (raw[close] == '}') --depth;
            if (depth > 0) ++close;
        }
        push_section(out, heading, std::string_view(raw).substr(body_start, cmd_pos - body_start),
                     preamble);
        heading = collapse_whitespace(raw.substr(open, close - open));
        preamble = false;
        body_start = std::min(close + 1, raw.size());
    }
    push_section(out, heading, std::string_view(raw).substr(body_start), preamble);
    return out;
}

bool is_small_word(std::string_view w) {
    static const std::set<std::string, std::less<>> small = {
        "a", "an", "and", "as", "at", "by", "for", "from", "in", "of", "on", "or", "the", "to",
        "vs", "via", "with"};
    return small.count(to_lower(w)) > 0;
}

std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> words;
    std::istringstream in{std::string(s)};
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

bool is_heading_line(std::string_view line) {
    auto t = trim(line);
    if (t.empty() || t.size() > 80) return false;
    char last = t.back();
    if (std::string_view(".,;:!?").find(last) != std::string_view::npos) return false;

    static const std::regex numbered(R"(^\d+(\.\d+)*\.?\s+(\S.*)$)");
    std::smatch m;
    std::string rest = t;
    if (std::regex_match(t, m, numbered)) rest = m[2].str();
    else if (std::isdigit(static_cast<unsigned char>(t.front()))) return false;

    auto words = split_words(rest);
    if (words.empty() || words.size() > 8) return false;
    bool any_alpha = false;
    for (size_t i = 0; i < words.size(); ++i) {
        const auto& w = words[i];
        auto first_alpha = std::find_if(w.begin(), w.end(), [](char c) {
            return std::isalpha(static_cast<unsigned char>(c));
        });
        if (first_alpha == w.end()) continue;
        any_alpha = true;
        bool upper = std::isupper(static_cast<unsigned char>(*first_alpha)) != 0;
        if (!upper && !(i > 0 && is_small_word(w))) return false;
    }
    return any_alpha && std::isupper(static_cast<unsigned char>(
                            *std::find_if(rest.begin(), rest.end(), [](char c) {
                                return std::isalpha(static_cast<unsigned char>(c));
                            }))) != 0;
}

std::vector<Section> segment_plain(const std::string& raw) {
    std::vector<Section> out;
    std::string heading;
    bool preamble = true;
    std::string body;
    bool prev_blank = true;
    std::istringstream in(raw);
    std::string line;
    while (std::getline(in, line)) {
        bool blank = trim(line).empty();
        if (prev_blank && !blank && is_heading_line(line)) {
            push_section(out, heading, body, preamble);
            heading = trim(line);
            preamble = false;
            body.clear();
        } else {
            body += line;
            body += '\n';
        }
        prev_blank = blank;
    }
    push_section(out, heading, body, preamble);
    return out;
}

}  // namespace

std::vector<Section> segment_sections(const std::string& raw) {
    static const std::regex latex_marker(R"(\\section\*?\s*\{)");
    auto out = std::regex_search(raw, latex_marker) ? segment_latex(raw) : segment_plain(raw);
    if (out.empty()) {
        // Only headings survived; keep the text rather than return nothing.
        auto body = trim(raw);
        if (!body.empty()) out.push_back({SectionKind::Other, "preamble", body});
    }
    return out;
}

std::vector<Section> select_sections(const Paper& paper, Category category) {
    if (paper.sections.empty()) {
        if (trim(paper.abstract).empty())
            throw Error(ErrorKind::EmptyPaper, "paper " + paper.id + " has no sections or abstract");
        return {{SectionKind::Other, "abstract", paper.abstract}};
    }
    auto wanted = [category](SectionKind k) {
        switch (category) {
        case Category::Objective: return k == SectionKind::Introduction;
        case Category::Method: return k == SectionKind::Methods || k == SectionKind::Results;
        case Category::Dataset: return k == SectionKind::Data || k == SectionKind::Experiments;
        }
        return false;
    };
    std::vector<Section> out;
    std::copy_if(paper.sections.begin(), paper.sections.end(), std::back_inserter(out),
                 [&](const Section& s) { return wanted(s.kind); });
    if (out.empty()) return paper.sections;
    return out;
}

// ---------------------------------------------------------------------------
// Local ingestion

std::string strip_latex(const std::string& tex) {
    std::string no_comments;
    no_comments.reserve(tex.size());
    std::istringstream in(tex);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        size_t cut = std::string::npos;
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '\\') {
                ++i;
            } else if (line[i] == '%') {
                cut = i;
                break;
            }
        }
        if (cut == 0) continue;  // full-line comment vanishes with its newline
        if (!first) no_comments += '\n';
        first = false;
        no_comments += line.substr(0, cut);
    }
    auto begin = no_comments.find("\\begin{document}");
    if (begin == std::string::npos) return no_comments;
    begin += std::string_view("\\begin{document}").size();
    auto end = no_comments.find("\\end{document}", begin);
    return no_comments.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
}

namespace {

std::string latex_braced_arg(const std::string& text, const std::string& command) {
    auto pos = text.find(command + "{");
    if (pos == std::string::npos) return {};
    size_t open = pos + command.size() + 1;
    int depth = 1;
    size_t i = open;
    for (; i < text.size() && depth > 0; ++i) {
        if (text[i] == '{') ++depth;
        if (text[i] == '}') --depth;
    }
    return collapse_whitespace(text.substr(open, i - open - 1));
}

std::string latex_environment(const std::string& text, const std::string& env) {
    auto open_tag = "\\begin{" + env + "}";
    auto b = text.find(open_tag);
    if (b == std::string::npos) return {};
    b += open_tag.size();
    auto e = text.find("\\end{" + env + "}", b);
    return collapse_whitespace(text.substr(b, e == std::string::npos ? std::string::npos : e - b));
}

Paper load_local_file(const fs::path& file, const std::string& text) {
    Paper p;
    p.id = file.stem().string();
    p.source = PaperSource::LocalFile;
    p.fetched_at = utc_timestamp(fs::last_write_time(file));
    if (file.extension() == ".tex") {
        // Title and abstract may live in the preamble, so read them before
        // dropping it.
        auto without_comments = strip_latex("\\begin{document}" + text);
        p.title = latex_braced_arg(without_comments, "\\title");
        p.abstract = latex_environment(without_comments, "abstract");
        p.sections = segment_sections(strip_latex(text));
    } else {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (!trim(line).empty()) {
                p.title = trim(line);
                break;
            }
        }
        p.sections = segment_sections(text);
        for (const auto& s : p.sections) {
            static const std::regex abstract_heading(R"(^(\d+(\.\d+)*\.?\s+)?abstract$)",
                                                     std::regex::icase);
            if (std::regex_match(s.heading, abstract_heading)) {
                p.abstract = collapse_whitespace(s.body);
                break;
            }
        }
    }
    if (p.title.empty()) p.title = p.id;
    return p;
}

}  // namespace

std::vector<Paper> ingest_local(const fs::path& dir, std::vector<std::string>* warnings) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw Error(ErrorKind::Config, "corpus directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".txt" || ext == ".tex"))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<Paper> papers;
    std::set<std::string> ids;
    for (const auto& f : files) {
        try {
            auto text = read_file(f);
            auto paper = load_local_file(f, text);
            if (paper.sections.empty() && paper.abstract.empty()) {
                if (warnings) warnings->push_back(f.string() + ": no text, skipped");
                continue;
            }
            if (!ids.insert(paper.id).second) {
                if (warnings) warnings->push_back(f.string() + ": duplicate id, skipped");
                continue;
            }
            papers.push_back(std::move(paper));
        } catch (const std::exception& e) {
            if (warnings) warnings->push_back(f.string() + ": " + e.what());
        }
    }
    if (papers.empty()) throw Error(ErrorKind::EmptyCorpus, "no ingestible files in " + dir.string());
    return papers;
}

// ---------------------------------------------------------------------------
// Persistence

std::string paper_to_json_line(const Paper& p) {
    json sections = json::array();
    for (const auto& s : p.sections)
        sections.push_back({{"kind", to_string(s.kind)}, {"heading", s.heading}, {"body", s.body}});
    json j = {{"id", p.id},
              {"title", p.title},
              {"abstract", p.abstract},
              {"sections", sections},
              {"source", to_string(p.source)},
              {"fetched_at", p.fetched_at}};
    return j.dump();
}

Paper paper_from_json_line(const std::string& line) {
    try {
        auto j = json::parse(line);
        Paper p;
        p.id = j.at("id").get<std::string>();
        p.title = j.value("title", "");
        p.abstract = j.value("abstract", "");
        for (const auto& s : j.value("sections", json::array())) {
            p.sections.push_back({section_kind_from_string(s.at("kind").get<std::string>()),
                                  s.value("heading", ""), s.at("body").get<std::string>()});
        }
        p.source = paper_source_from_string(j.value("source", "LocalFile"));
        p.fetched_at = j.value("fetched_at", "");
        if (p.id.empty()) throw Error(ErrorKind::Parse, "corpus record with empty id");
        return p;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("bad corpus record: ") + e.what());
    }
}

std::string write_corpus_jsonl(const std::vector<Paper>& papers) {
    std::string out;
    for (const auto& p : papers) {
        out += paper_to_json_line(p);
        out += '\n';
    }
    return out;
}

std::vector<Paper> read_corpus_jsonl(const std::string& text) {
    std::vector<Paper> papers;
    std::set<std::string> ids;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto p = paper_from_json_line(line);
        if (!ids.insert(p.id).second)
            throw Error(ErrorKind::DataIntegrity, "duplicate paper id " + p.id + " in corpus");
        papers.push_back(std::move(p));
    }
    return papers;
}

}  // namespace litscape
