#include "litscape/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace litscape {

using nlohmann::json;

std::vector<GoldAnnotation> read_gold_jsonl(const std::string& text) {
    std::map<std::pair<std::string, Category>, std::vector<std::string>> merged;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            auto j = json::parse(line);
            auto paper = j.at("paper_id").get<std::string>();
            auto category = category_from_string(j.at("category").get<std::string>());
            auto& items = merged[{paper, category}];
            for (const auto& raw : j.at("items").get<std::vector<std::string>>()) {
                auto n = normalize_surface(raw);
                if (!n.empty() && std::find(items.begin(), items.end(), n) == items.end())
                    items.push_back(std::move(n));
            }
        } catch (const std::exception& e) {
            throw Error(ErrorKind::Parse,
                        "bad gold record on line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    std::vector<GoldAnnotation> out;
    for (auto& [key, items] : merged) out.push_back({key.first, key.second, std::move(items)});
    return out;
}

Scores f1_scores(size_t tp, size_t fp, size_t fn) {
    Scores s;
    auto t = static_cast<double>(tp);
    if (tp + fp > 0) s.precision = t / static_cast<double>(tp + fp);
    if (tp + fn > 0) s.recall = t / static_cast<double>(tp + fn);
    if (s.precision + s.recall > 0.0)
        s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

MatchPolicy match_policy_from_string(std::string_view s) {
    auto l = to_lower(s);
    std::replace(l.begin(), l.end(), '-', '_');
    if (l == "normalizedexact" || l == "normalized_exact" || l == "exact")
        return MatchPolicy::NormalizedExact;
    if (l == "clusteraware" || l == "cluster_aware" || l == "cluster")
        return MatchPolicy::ClusterAware;
    throw Error(ErrorKind::Config, "unknown match policy '" + std::string(s) + "'");
}

std::map<Category, MatchCounts> match_mentions(const std::vector<Mention>& predicted,
                                               const std::vector<GoldAnnotation>& gold,
                                               MatchPolicy policy,
                                               const std::vector<SynonymCluster>& clusters) {
    std::map<std::pair<Category, std::string>, std::string> cluster_of;
    if (policy == MatchPolicy::ClusterAware)
        for (const auto& c : clusters)
            for (const auto& m : c.members) cluster_of[{c.category, m}] = c.id;

    // Items sharing a key are interchangeable, so the maximum one-to-one
    // matching is the sum over keys of min(#predicted, #gold).
    auto key = [&](Category c, const std::string& normalized) {
        if (policy == MatchPolicy::ClusterAware) {
            auto it = cluster_of.find({c, normalized});
            if (it != cluster_of.end()) return "cluster:" + it->second;
        }
        return "text:" + normalized;
    };

    using Slot = std::pair<std::string, Category>;
    std::map<Slot, std::map<std::string, size_t>> pred_keys, gold_keys;
    std::set<std::string> gold_papers;
    for (const auto& g : gold) {
        gold_papers.insert(g.paper_id);
        for (const auto& item : g.items) ++gold_keys[{g.paper_id, g.category}][key(g.category, item)];
    }
    std::set<std::tuple<std::string, Category, std::string>> seen;
    for (const auto& m : predicted) {
        if (!gold_papers.count(m.paper_id)) continue;
        if (!seen.insert({m.paper_id, m.category, m.normalized}).second) continue;
        ++pred_keys[{m.paper_id, m.category}][key(m.category, m.normalized)];
    }

    std::map<Category, MatchCounts> out;
    for (auto c : kAllCategories) out[c] = {};
    std::set<Slot> slots;
    for (const auto& [s, _] : pred_keys) slots.insert(s);
    for (const auto& [s, _] : gold_keys) slots.insert(s);
    for (const auto& slot : slots) {
        const auto& p = pred_keys[slot];
        const auto& g = gold_keys[slot];
        size_t np = 0, ng = 0, tp = 0;
        for (const auto& [k, n] : p) {
            np += n;
            auto it = g.find(k);
            if (it != g.end()) tp += std::min(n, it->second);
        }
        for (const auto& [k, n] : g) ng += n;
        out[slot.second] += MatchCounts{tp, np - tp, ng - tp};
    }
    return out;
}

EvalReport make_report(const std::map<Category, MatchCounts>& counts) {
    EvalReport r;
    MatchCounts pooled;
    for (auto c : kAllCategories) {
        auto it = counts.find(c);
        MatchCounts mc = it == counts.end() ? MatchCounts{} : it->second;
        r.per_category[c] = {mc, f1_scores(mc.tp, mc.fp, mc.fn)};
        pooled += mc;
    }
    r.micro = {pooled, f1_scores(pooled.tp, pooled.fp, pooled.fn)};
    return r;
}

namespace {

json category_json(const CategoryReport& c) {
    return {{"tp", c.counts.tp},
            {"fp", c.counts.fp},
            {"fn", c.counts.fn},
            {"precision", c.scores.precision},
            {"recall", c.scores.recall},
            {"f1", c.scores.f1}};
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
    json per = json::object();
    for (const auto& [c, rep] : r.per_category) per[std::string(to_string(c))] = category_json(rep);
    return json{{"per_category", per}, {"micro", category_json(r.micro)}}.dump(2) + "\n";
}

std::string report_to_table(const EvalReport& r) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-10s %5s %5s %5s %9s %7s %6s\n", "category", "tp", "fp", "fn",
                  "precision", "recall", "f1");
    out += buf;
    auto row = [&](std::string_view name, const CategoryReport& c) {
        std::snprintf(buf, sizeof buf, "%-10.*s %5zu %5zu %5zu %9.4f %7.4f %6.4f\n",
                      static_cast<int>(name.size()), name.data(), c.counts.tp, c.counts.fp,
                      c.counts.fn, c.scores.precision, c.scores.recall, c.scores.f1);
        out += buf;
    };
    for (const auto& [c, rep] : r.per_category) row(to_string(c), rep);
    row("micro", r.micro);
    return out;
}

}  // namespace litscape
