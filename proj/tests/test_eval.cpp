#include "litscape/eval.hpp"

#include <doctest.h>
#include <json.hpp>

#include <random>

using namespace litscape;

namespace {

Mention pred(std::string paper, Category c, std::string surface) {
    auto n = normalize_surface(surface);
    return {std::move(paper), c, std::move(surface), SectionKind::Other, std::move(n)};
}

GoldAnnotation gold(std::string paper, Category c, std::vector<std::string> items) {
    for (auto& i : items) i = normalize_surface(i);
    return {std::move(paper), c, std::move(items)};
}

}  // namespace

TEST_CASE("f1_scores") {
    auto z = f1_scores(0, 0, 0);
    CHECK(z.precision == 0.0);
    CHECK(z.recall == 0.0);
    CHECK(z.f1 == 0.0);
    auto s = f1_scores(3, 1, 2);
    CHECK(std::abs(s.precision - 0.75) <= 1e-9);
    CHECK(std::abs(s.recall - 0.6) <= 1e-9);
    CHECK(std::abs(s.f1 - 2 * 0.75 * 0.6 / 1.35) <= 1e-9);
    CHECK(s.f1 == doctest::Approx(0.6667).epsilon(1e-4));
    auto p = f1_scores(5, 0, 0);
    CHECK(p.precision == 1.0);
    CHECK(p.recall == 1.0);
    CHECK(p.f1 == 1.0);
    CHECK(f1_scores(0, 4, 0).f1 == 0.0);
    CHECK(f1_scores(0, 0, 4).f1 == 0.0);

    // Harmonic-mean bound.
    for (size_t tp = 1; tp < 12; ++tp)
        for (size_t fp = 0; fp < 12; ++fp)
            for (size_t fn = 0; fn < 12; ++fn) {
                auto r = f1_scores(tp, fp, fn);
                CHECK(r.f1 <= std::max(r.precision, r.recall) + 1e-15);
                CHECK(r.f1 >= std::min(r.precision, r.recall) - 1e-15);
            }
}

TEST_CASE("match_mentions examples") {
    auto exact = match_mentions({pred("p", Category::Dataset, "SP500")},
                                {gold("p", Category::Dataset, {"SP500"})},
                                MatchPolicy::NormalizedExact);
    CHECK(exact[Category::Dataset] == MatchCounts{1, 0, 0});

    auto none = match_mentions({}, {gold("p", Category::Dataset, {"SP500", "Stocktwits"})},
                               MatchPolicy::NormalizedExact);
    CHECK(none[Category::Dataset] == MatchCounts{0, 0, 2});

    std::vector<Mention> svm = {pred("p", Category::Method, "SVM")};
    std::vector<GoldAnnotation> g = {gold("p", Category::Method, {"Support Vector Machine"})};
    std::vector<SynonymCluster> cs = {
        {"method-0", Category::Method, "SVM", {"support vector machine", "svm"}, 2}};
    CHECK(match_mentions(svm, g, MatchPolicy::NormalizedExact)[Category::Method] ==
          MatchCounts{0, 1, 1});
    CHECK(match_mentions(svm, g, MatchPolicy::ClusterAware, cs)[Category::Method] ==
          MatchCounts{1, 0, 0});
    // Without the cluster, cluster-aware falls back to text equality.
    CHECK(match_mentions(svm, g, MatchPolicy::ClusterAware)[Category::Method] == MatchCounts{0, 1, 1});

    // Normalization applies to both sides.
    CHECK(match_mentions({pred("p", Category::Method, "Random Forest (RF)")},
                         {gold("p", Category::Method, {"random  forest"})},
                         MatchPolicy::NormalizedExact)[Category::Method] == MatchCounts{1, 0, 0});
}

TEST_CASE("matching is one-to-one within a paper") {
    // Two gold items in one cluster, one prediction: one match, one miss.
    std::vector<SynonymCluster> cs = {
        {"dataset-0", Category::Dataset, "SP500", {"s&p 500", "sp500"}, 2}};
    auto r = match_mentions({pred("p", Category::Dataset, "SP500")},
                            {gold("p", Category::Dataset, {"SP500", "S&P 500"})},
                            MatchPolicy::ClusterAware, cs);
    CHECK(r[Category::Dataset] == MatchCounts{1, 0, 1});
    // Matches never cross papers.
    auto x = match_mentions({pred("p1", Category::Dataset, "SP500")},
                            {gold("p1", Category::Dataset, {"CRSP"}), gold("p2", Category::Dataset, {"SP500"})},
                            MatchPolicy::NormalizedExact);
    CHECK(x[Category::Dataset] == MatchCounts{0, 1, 2});
    // Predictions for papers without gold are not scored.
    auto y = match_mentions({pred("p9", Category::Dataset, "SP500")},
                            {gold("p1", Category::Dataset, {"SP500"})}, MatchPolicy::NormalizedExact);
    CHECK(y[Category::Dataset] == MatchCounts{0, 0, 1});
}

TEST_CASE("match_mentions is permutation invariant and micro sums") {
    std::vector<Mention> ps;
    std::vector<GoldAnnotation> gs;
    const char* words[] = {"svm", "lstm", "bert", "sp500", "crsp", "arima", "gbm"};
    std::mt19937_64 rng(31);
    for (int paper = 0; paper < 6; ++paper) {
        auto id = "p" + std::to_string(paper);
        for (auto c : kAllCategories) {
            std::vector<std::string> items;
            for (auto w : words) {
                if (rng() % 3 == 0) ps.push_back(pred(id, c, w));
                if (rng() % 3 == 0) items.push_back(w);
            }
            gs.push_back(gold(id, c, items));
        }
    }
    auto base = match_mentions(ps, gs, MatchPolicy::NormalizedExact);
    for (int i = 0; i < 10; ++i) {
        std::shuffle(ps.begin(), ps.end(), rng);
        std::shuffle(gs.begin(), gs.end(), rng);
        CHECK(match_mentions(ps, gs, MatchPolicy::NormalizedExact) == base);
    }
    auto report = make_report(base);
    MatchCounts sum;
    for (const auto& [c, r] : report.per_category) sum += r.counts;
    CHECK(report.micro.counts == sum);
    auto j = nlohmann::json::parse(report_to_json(report));
    CHECK(j["micro"]["tp"] == sum.tp);
    CHECK(j["per_category"].contains("Dataset"));
    auto table = report_to_table(report);
    CHECK(table.rfind("category", 0) == 0);
    CHECK(table.find("\nmicro") != std::string::npos);
}

TEST_CASE("gold.jsonl parsing") {
    auto g = read_gold_jsonl(
        "{\"paper_id\": \"p1\", \"category\": \"dataset\", \"items\": [\"SP500\", \"sp500 \"]}\n"
        "\n"
        "{\"paper_id\": \"p1\", \"category\": \"Dataset\", \"items\": [\"CRSP (daily)\"]}\n");
    REQUIRE(g.size() == 1);
    CHECK(g[0].items == std::vector<std::string>{"sp500", "crsp"});
    try {
        read_gold_jsonl("{\"paper_id\": \"p\", \"category\": \"dataset\", \"items\": []}\n{oops}\n");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(read_gold_jsonl("{\"paper_id\": \"p\", \"category\": \"tool\", \"items\": []}"),
                    Error);
    CHECK(match_policy_from_string("cluster-aware") == MatchPolicy::ClusterAware);
    CHECK(match_policy_from_string("NormalizedExact") == MatchPolicy::NormalizedExact);
    CHECK_THROWS_AS(match_policy_from_string("fuzzy"), Error);
}
