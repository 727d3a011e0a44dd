#include "fixture.hpp"
#include "stub_server.hpp"

#include "litscape/embedding.hpp"
#include "litscape/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstring>
#include <random>

using namespace litscape;

namespace {

EmbeddingVector vec(std::vector<double> raw) { return EmbeddingVector::from_raw(raw); }

// Counts calls and texts; optionally fails every call.
class CountingBackend : public EmbeddingBackend {
public:
    explicit CountingBackend(size_t dim, bool fail = false, bool zero = false)
        : dim_(dim), fail_(fail), zero_(zero) {}
    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override {
        ++calls;
        texts_seen += texts.size();
        if (fail_) throw Error(ErrorKind::Backend, "down");
        std::vector<std::vector<double>> out;
        for (const auto& t : texts)
            out.push_back(zero_ && t == "zero" ? std::vector<double>(dim_, 0.0)
                                                : trigram_hash_vector(t + "!", dim_));
        return out;
    }
    std::string model_id() const override { return "counting"; }
    size_t dim() const override { return dim_; }
    mutable std::atomic<int> calls{0};
    mutable std::atomic<size_t> texts_seen{0};

private:
    size_t dim_;
    bool fail_, zero_;
};

}  // namespace

TEST_CASE("normalization") {
    auto v = vec({3, 4});
    CHECK(v.values()[0] == doctest::Approx(0.6).epsilon(1e-7));
    CHECK(v.values()[1] == doctest::Approx(0.8).epsilon(1e-7));
    CHECK(std::abs(v.norm() - 1.0) <= 1e-6);
    CHECK_THROWS_AS(vec({0, 0}), Error);
    try {
        vec({0, 0});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateEmbedding);
    }
    CHECK_THROWS_AS(vec({}), Error);
}

TEST_CASE("cosine_similarity") {
    auto v = vec({0.3, -2, 7});
    CHECK(cosine_similarity(v, v) == doctest::Approx(1.0));
    CHECK(cosine_similarity(vec({1, 0}), vec({0, 1})) == 0.0);
    CHECK(cosine_similarity(vec({0.6, 0.8}), vec({1, 0})) == doctest::Approx(0.6).epsilon(1e-7));
    CHECK(cosine_similarity(vec({1, 1}), vec({-1, -1})) >= -1.0);
    try {
        cosine_similarity(vec({1, 0}), vec({1, 0, 0}));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
    }
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int i = 0; i < 200; ++i) {
        std::vector<double> a(16), b(16);
        for (auto& x : a) x = g(rng);
        for (auto& x : b) x = g(rng);
        auto u = vec(a), w = vec(b);
        auto s = cosine_similarity(u, w);
        CHECK(s == cosine_similarity(w, u));
        CHECK(s <= 1.0);
        CHECK(s >= -1.0);
        // |u - w|^2 = 2 - 2 cos for unit vectors.
        CHECK(euclidean_distance(u, w) == doctest::Approx(std::sqrt(2 - 2 * s)).epsilon(1e-6));
    }
}

TEST_CASE("embed_mentions: order, dedup and caching") {
    CountingBackend backend(8);
    VectorCache cache("counting", 8);
    auto out = embed_mentions({"svm", "lstm", "svm"}, backend, cache);
    REQUIRE(out.size() == 3);
    CHECK(out[0] == out[2]);
    CHECK(backend.texts_seen == 2);
    for (const auto& v : out) CHECK(std::abs(v.norm() - 1.0) <= 1e-6);

    auto again = embed_mentions({"lstm", "svm"}, backend, cache);
    CHECK(backend.calls == 1);
    CHECK(again[0] == out[1]);
    CHECK(again[1] == out[0]);
}

TEST_CASE("embed_mentions: batching and parallel batches") {
    CountingBackend backend(8);
    VectorCache cache("counting", 8);
    std::vector<std::string> surfaces;
    for (int i = 0; i < 150; ++i) surfaces.push_back("s" + std::to_string(i));
    EmbeddingOptions opts;
    opts.batch_size = 64;
    opts.concurrency = 3;
    auto out = embed_mentions(surfaces, backend, cache, opts);
    CHECK(out.size() == 150);
    CHECK(backend.calls == 3);

    // Cache insertion order does not depend on which batch finished first.
    CountingBackend serial_backend(8);
    VectorCache serial("counting", 8);
    embed_mentions(surfaces, serial_backend, serial, {64, 3, 1});
    CHECK(serial.serialize() == cache.serialize());
}

TEST_CASE("embed_mentions: failures") {
    CountingBackend down(4, true);
    VectorCache cache("counting", 4);
    try {
        embed_mentions({"a", "b"}, down, cache);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Backend);
        CHECK(std::string(e.what()).find("'a', 'b'") != std::string::npos);
    }
    CHECK(down.calls == 4);  // first attempt plus three retries

    CountingBackend zero(4, false, true);
    try {
        embed_mentions({"fine", "zero"}, zero, cache);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateEmbedding);
        CHECK(std::string(e.what()).find("zero") != std::string::npos);
    }
    CHECK(cache.find("fine") != nullptr);

    CHECK_THROWS_AS(embed_mentions({}, zero, cache), Error);
    CHECK_THROWS_AS(embed_mentions({""}, zero, cache), Error);
    VectorCache other("another-model", 4);
    CHECK_THROWS_AS(embed_mentions({"x"}, zero, other), Error);
}

TEST_CASE("vector cache file layout and round trip") {
    VectorCache cache("m", 2);
    cache.insert("svm", vec({3, 4}));
    auto bytes = cache.serialize();
    REQUIRE(bytes.size() == 4 + 1 + 4 + 4 + 3 + 8);
    CHECK(bytes.substr(0, 5) == std::string("\x01\x00\x00\x00m", 5));
    CHECK(bytes.substr(5, 4) == std::string("\x02\x00\x00\x00", 4));
    CHECK(bytes.substr(9, 7) == std::string("\x03\x00\x00\x00svm", 7));
    float first;
    std::memcpy(&first, bytes.data() + 16, 4);
    CHECK(first == cache.find("svm")->values()[0]);

    auto back = VectorCache::deserialize(bytes);
    CHECK(back.model_id() == "m");
    CHECK(back.dim() == 2);
    REQUIRE(back.find("svm") != nullptr);
    CHECK(*back.find("svm") == *cache.find("svm"));
    CHECK(back.serialize() == bytes);
    CHECK_THROWS_AS(VectorCache::deserialize(bytes.substr(0, bytes.size() - 1)), Error);

    auto dir = fixture::scratch("cache");
    cache.save(dir / "vectors.cache");
    CHECK(VectorCache::load(dir / "vectors.cache", "m", 2).size() == 1);
    CHECK(VectorCache::load(dir / "vectors.cache", "other", 2).size() == 0);
    CHECK(VectorCache::load(dir / "vectors.cache", "m", 3).size() == 0);
    CHECK(VectorCache::load(dir / "absent.cache", "m", 2).size() == 0);

    // Embedding through a reloaded cache is bit-identical to the first pass.
    CountingBackend backend(8);
    VectorCache fresh("counting", 8);
    auto first_pass = embed_mentions({"svm", "bert"}, backend, fresh);
    fresh.save(dir / "c2");
    auto reloaded = VectorCache::load(dir / "c2", "counting", 8);
    auto second_pass = embed_mentions({"svm", "bert"}, backend, reloaded);
    CHECK(first_pass == second_pass);
    CHECK(backend.calls == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("lookup backend") {
    auto table = LookupEmbeddingBackend::from_file(fixture::synthetic_dir() / "embeddings.json");
    CHECK(table.dim() == 16);
    CHECK(table.model_id().rfind("lookup:", 0) == 0);
    CHECK(table.model_id().size() == 7 + 12);
    auto v = table.embed({"svm", "unknown phrase"});
    CHECK(v[0][4] == 1.0);
    CHECK(v[1] == trigram_hash_vector("unknown phrase", 16));
    auto strict = LookupEmbeddingBackend::from_file(fixture::synthetic_dir() / "embeddings.json", true);
    CHECK_THROWS_AS(strict.embed({"unknown phrase"}), Error);
    CHECK_THROWS_AS(LookupEmbeddingBackend::from_json(R"({"vectors": {"a": [1, 0], "b": [1]}})"),
                    Error);
    auto other = LookupEmbeddingBackend::from_json(R"({"vectors": {"a": [1, 0]}})");
    CHECK(other.model_id() != table.model_id());
    CHECK(trigram_hash_vector("SVM", 32) == trigram_hash_vector("svm", 32));
}

TEST_CASE("HTTP embedding backend") {
    stub::Server server;
    std::vector<nlohmann::json> bodies;
    server.http().Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        bodies.push_back(body);
        nlohmann::json data = nlohmann::json::array();
        auto inputs = body["input"];
        // Reply in reverse order with explicit indices.
        for (size_t i = inputs.size(); i-- > 0;) {
            double len = static_cast<double>(inputs[i].get<std::string>().size());
            data.push_back({{"index", i}, {"embedding", {len, 1.0}}});
        }
        res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
    });
    server.start();
    HttpEmbeddingBackend backend(server.url("/v1/embeddings"), "e5-large", 2, "query: ");
    CHECK(backend.model_id() == "e5-large#query: ");
    auto raw = backend.embed({"a", "abc"});
    REQUIRE(raw.size() == 2);
    CHECK(raw[0][0] == 8.0);  // "query: a"
    CHECK(raw[1][0] == 10.0);
    REQUIRE(bodies.size() == 1);
    CHECK(bodies[0]["model"] == "e5-large");
    CHECK(bodies[0]["input"][0] == "query: a");

    CHECK_THROWS_AS(HttpEmbeddingBackend::parse_response(R"({"data": []})", 1), Error);
    CHECK_THROWS_AS(HttpEmbeddingBackend::parse_response("nope", 1), Error);
    HttpEmbeddingBackend nowhere("http://127.0.0.1:1/v1/embeddings", "m", 2, "", "",
                                 std::chrono::milliseconds(300));
    try {
        nowhere.embed({"x"});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Backend);
    }
}
