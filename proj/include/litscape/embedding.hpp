#pragma once

#include "litscape/common.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace litscape {

// Unit-norm vector. Components are stored as 32-bit floats so that a value
// read back from the cache is bit-identical to the one first produced.
class EmbeddingVector {
public:
    EmbeddingVector() = default;

    // Normalizes `raw`; throws Error{DegenerateEmbedding} for a zero (or
    // non-finite) vector.
    static EmbeddingVector from_raw(std::span<const double> raw);
    // Trusts `values` to be unit-norm already (cache reads).
    static EmbeddingVector from_stored(std::vector<float> values);

    size_t dim() const { return values_.size(); }
    std::span<const float> values() const { return values_; }
    double norm() const;

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<float> values_;
};

// Dot product of two unit vectors clamped to [-1, 1].
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);
double euclidean_distance(const EmbeddingVector& u, const EmbeddingVector& v);

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const = 0;
    virtual std::string model_id() const = 0;
    virtual size_t dim() const = 0;
};

// OpenAI-style /embeddings client. `prefix` is prepended to every input text
// (E5-family models expect e.g. "query: ") and is folded into model_id() so
// cache entries never mix prefixed and unprefixed vectors.
class HttpEmbeddingBackend : public EmbeddingBackend {
public:
    HttpEmbeddingBackend(std::string url, std::string model, size_t dim, std::string prefix = {},
                         std::string api_key = {},
                         std::chrono::milliseconds timeout = std::chrono::seconds(120));

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override;
    std::string model_id() const override;
    size_t dim() const override { return dim_; }

    static std::string request_body(const std::string& model, const std::vector<std::string>& texts);
    static std::vector<std::vector<double>> parse_response(const std::string& body, size_t expected);

private:
    std::string url_;
    std::string model_;
    size_t dim_;
    std::string prefix_;
    std::string api_key_;
    std::chrono::milliseconds timeout_;
};

// Lookup table {text: [values...]} keyed by exact text. Texts missing from the
// table get a deterministic hashed character-trigram vector unless `strict`.
// from_json() derives model_id from the table contents.
class LookupEmbeddingBackend : public EmbeddingBackend {
public:
    LookupEmbeddingBackend(std::map<std::string, std::vector<double>> table, size_t dim,
                           bool strict = false, std::string model_id = "lookup");
    static LookupEmbeddingBackend from_json(const std::string& text, bool strict = false);
    static LookupEmbeddingBackend from_file(const std::filesystem::path& path, bool strict = false);

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override;
    std::string model_id() const override { return model_id_; }
    size_t dim() const override { return dim_; }

private:
    std::map<std::string, std::vector<double>> table_;
    size_t dim_;
    bool strict_;
    std::string model_id_;
};

// Hashed character-trigram features, for offline runs without a table.
std::vector<double> trigram_hash_vector(std::string_view text, size_t dim);

// (model_id, surface) -> vector. File layout, little-endian:
//   u32 model_id length, model_id bytes, u32 dim,
//   then per record: u32 surface length, surface bytes, dim x f32.
// Records keep insertion order.
class VectorCache {
public:
    VectorCache(std::string model_id, size_t dim) : model_id_(std::move(model_id)), dim_(dim) {}

    // A missing file yields an empty cache; a file written for another model or
    // dimension is ignored (returns an empty cache).
    static VectorCache load(const std::filesystem::path& path, const std::string& model_id,
                            size_t dim);
    static VectorCache deserialize(std::string_view bytes);

    std::string serialize() const;
    void save(const std::filesystem::path& path) const;

    const EmbeddingVector* find(const std::string& surface) const;
    void insert(const std::string& surface, EmbeddingVector v);

    const std::string& model_id() const { return model_id_; }
    size_t dim() const { return dim_; }
    size_t size() const { return order_.size(); }

private:
    std::string model_id_;
    size_t dim_;
    std::map<std::string, EmbeddingVector> entries_;
    std::vector<std::string> order_;
};

struct EmbeddingOptions {
    size_t batch_size = 64;
    int max_retries = 3;
    size_t concurrency = 1;
};

// One unit vector per surface, order-aligned. Cache misses are deduplicated,
// batched to the backend and written back into `cache`.
std::vector<EmbeddingVector> embed_mentions(const std::vector<std::string>& surfaces,
                                            const EmbeddingBackend& backend, VectorCache& cache,
                                            const EmbeddingOptions& options = {});

}  // namespace litscape
