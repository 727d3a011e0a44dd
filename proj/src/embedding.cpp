#include "litscape/embedding.hpp"

#include "litscape/http.hpp"
#include "litscape/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <set>
#include <thread>

namespace litscape {

using nlohmann::json;

EmbeddingVector EmbeddingVector::from_raw(std::span<const double> raw) {
    double sq = 0.0;
    for (double x : raw) sq += x * x;
    double norm = std::sqrt(sq);
    if (raw.empty() || !(norm > 0.0) || !std::isfinite(norm))
        throw Error(ErrorKind::DegenerateEmbedding, "zero-norm embedding vector");
    EmbeddingVector v;
    v.values_.reserve(raw.size());
    for (double x : raw) v.values_.push_back(static_cast<float>(x / norm));
    return v;
}

EmbeddingVector EmbeddingVector::from_stored(std::vector<float> values) {
    EmbeddingVector v;
    v.values_ = std::move(values);
    return v;
}

double EmbeddingVector::norm() const {
    double sq = 0.0;
    for (float x : values_) sq += static_cast<double>(x) * x;
    return std::sqrt(sq);
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim())
        throw Error(ErrorKind::InvalidArgument, "embedding dimension mismatch");
    double dot = 0.0;
    auto a = u.values(), b = v.values();
    for (size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
    return std::clamp(dot, -1.0, 1.0);
}

double euclidean_distance(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim())
        throw Error(ErrorKind::InvalidArgument, "embedding dimension mismatch");
    double sq = 0.0;
    auto a = u.values(), b = v.values();
    for (size_t i = 0; i < a.size(); ++i) {
        double d = static_cast<double>(a[i]) - b[i];
        sq += d * d;
    }
    return std::sqrt(sq);
}

// ---------------------------------------------------------------------------
// Backends

HttpEmbeddingBackend::HttpEmbeddingBackend(std::string url, std::string model, size_t dim,
                                           std::string prefix, std::string api_key,
                                           std::chrono::milliseconds timeout)
    : url_(std::move(url)), model_(std::move(model)), dim_(dim), prefix_(std::move(prefix)),
      api_key_(std::move(api_key)), timeout_(timeout) {
    if (dim_ == 0) throw Error(ErrorKind::Config, "embedding dimension must be positive");
}

std::string HttpEmbeddingBackend::model_id() const {
    return prefix_.empty() ? model_ : model_ + "#" + prefix_;
}

std::string HttpEmbeddingBackend::request_body(const std::string& model,
                                               const std::vector<std::string>& texts) {
    return json{{"model", model}, {"input", texts}}.dump();
}

std::vector<std::vector<double>> HttpEmbeddingBackend::parse_response(const std::string& body,
                                                                      size_t expected) {
    try {
        auto j = json::parse(body);
        const auto& data = j.at("data");
        std::vector<std::vector<double>> out(data.size());
        for (size_t i = 0; i < data.size(); ++i) {
            // Servers may reorder; honour the explicit index when present.
            size_t slot = data[i].value("index", i);
            if (slot >= out.size()) throw Error(ErrorKind::Backend, "embedding index out of range");
            out[slot] = data[i].at("embedding").get<std::vector<double>>();
        }
        if (out.size() != expected)
            throw Error(ErrorKind::Backend, "embedding endpoint returned " +
                                                std::to_string(out.size()) + " vectors for " +
                                                std::to_string(expected) + " inputs");
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Backend, std::string("unexpected embedding response: ") + e.what());
    }
}

std::vector<std::vector<double>> HttpEmbeddingBackend::embed(
    const std::vector<std::string>& texts) const {
    std::vector<std::string> inputs;
    inputs.reserve(texts.size());
    for (const auto& t : texts) inputs.push_back(prefix_ + t);
    http::Headers headers;
    if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);
    http::Response res;
    try {
        res = http::post_json(url_, request_body(model_, inputs), headers, timeout_);
    } catch (const Error& e) {
        throw Error(ErrorKind::Backend, e.what());
    }
    if (res.status != 200)
        throw Error(ErrorKind::Backend,
                    "embedding endpoint " + url_ + " returned HTTP " + std::to_string(res.status));
    return parse_response(res.body, texts.size());
}

LookupEmbeddingBackend::LookupEmbeddingBackend(std::map<std::string, std::vector<double>> table,
                                               size_t dim, bool strict, std::string model_id)
    : table_(std::move(table)), dim_(dim), strict_(strict), model_id_(std::move(model_id)) {
    for (const auto& [text, v] : table_)
        if (v.size() != dim_)
            throw Error(ErrorKind::Config, "lookup vector for '" + text + "' has dimension " +
                                               std::to_string(v.size()) + ", expected " +
                                               std::to_string(dim_));
}

LookupEmbeddingBackend LookupEmbeddingBackend::from_json(const std::string& text, bool strict) {
    try {
        auto j = json::parse(text);
        auto table = j.at("vectors").get<std::map<std::string, std::vector<double>>>();
        size_t dim = j.value("dim", table.empty() ? size_t{0} : table.begin()->second.size());
        if (dim == 0) throw Error(ErrorKind::Config, "lookup table without dimension");
        auto digest = sha256_hex(json(table).dump()).substr(0, 12);
        return LookupEmbeddingBackend(std::move(table), dim, strict, "lookup:" + digest);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Config, std::string("bad embedding table: ") + e.what());
    }
}

LookupEmbeddingBackend LookupEmbeddingBackend::from_file(const std::filesystem::path& path,
                                                         bool strict) {
    return from_json(read_file(path), strict);
}

std::vector<std::vector<double>> LookupEmbeddingBackend::embed(
    const std::vector<std::string>& texts) const {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        auto it = table_.find(t);
        if (it != table_.end()) {
            out.push_back(it->second);
        } else if (strict_) {
            throw Error(ErrorKind::Backend, "no lookup vector for '" + t + "'");
        } else {
            out.push_back(trigram_hash_vector(t, dim_));
        }
    }
    return out;
}

std::vector<double> trigram_hash_vector(std::string_view text, size_t dim) {
    std::vector<double> v(dim, 0.0);
    auto padded = "  " + to_lower(text) + "  ";
    for (size_t i = 0; i + 3 <= padded.size(); ++i) {
        std::uint64_t h = 1469598103934665603ULL;
        for (size_t k = i; k < i + 3; ++k) {
            h ^= static_cast<unsigned char>(padded[k]);
            h *= 1099511628211ULL;
        }
        v[h % dim] += 1.0;
    }
    return v;
}

// ---------------------------------------------------------------------------
// Cache

namespace {

void put_u32(std::string& out, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}
    bool done() const { return pos_ == bytes_.size(); }
    std::uint32_t u32() {
        need(4);
        std::uint32_t x = 0;
        for (int i = 0; i < 4; ++i)
            x |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return x;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str(size_t n) {
        need(n);
        std::string s(bytes_.substr(pos_, n));
        pos_ += n;
        return s;
    }

private:
    void need(size_t n) const {
        if (bytes_.size() - pos_ < n) throw Error(ErrorKind::Parse, "truncated vector cache");
    }
    std::string_view bytes_;
    size_t pos_ = 0;
};

}  // namespace

VectorCache VectorCache::deserialize(std::string_view bytes) {
    Reader r(bytes);
    auto model = r.str(r.u32());
    size_t dim = r.u32();
    VectorCache cache(model, dim);
    while (!r.done()) {
        auto surface = r.str(r.u32());
        std::vector<float> values(dim);
        for (auto& x : values) x = r.f32();
        cache.insert(surface, EmbeddingVector::from_stored(std::move(values)));
    }
    return cache;
}

VectorCache VectorCache::load(const std::filesystem::path& path, const std::string& model_id,
                              size_t dim) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return VectorCache(model_id, dim);
    auto cache = deserialize(read_file(path));
    if (cache.model_id() != model_id || cache.dim() != dim) return VectorCache(model_id, dim);
    return cache;
}

std::string VectorCache::serialize() const {
    std::string out;
    put_u32(out, static_cast<std::uint32_t>(model_id_.size()));
    out += model_id_;
    put_u32(out, static_cast<std::uint32_t>(dim_));
    for (const auto& surface : order_) {
        put_u32(out, static_cast<std::uint32_t>(surface.size()));
        out += surface;
        for (float x : entries_.at(surface).values()) put_f32(out, x);
    }
    return out;
}

void VectorCache::save(const std::filesystem::path& path) const {
    write_file_atomic(path, serialize());
}

const EmbeddingVector* VectorCache::find(const std::string& surface) const {
    auto it = entries_.find(surface);
    return it == entries_.end() ? nullptr : &it->second;
}

void VectorCache::insert(const std::string& surface, EmbeddingVector v) {
    if (v.dim() != dim_)
        throw Error(ErrorKind::InvalidArgument, "cache dimension mismatch for '" + surface + "'");
    auto [it, inserted] = entries_.insert_or_assign(surface, std::move(v));
    if (inserted) order_.push_back(surface);
}

// ---------------------------------------------------------------------------

std::vector<EmbeddingVector> embed_mentions(const std::vector<std::string>& surfaces,
                                            const EmbeddingBackend& backend, VectorCache& cache,
                                            const EmbeddingOptions& options) {
    if (surfaces.empty()) throw Error(ErrorKind::InvalidArgument, "no surfaces to embed");
    for (const auto& s : surfaces)
        if (s.empty()) throw Error(ErrorKind::InvalidArgument, "empty surface");
    if (cache.model_id() != backend.model_id() || cache.dim() != backend.dim())
        throw Error(ErrorKind::InvalidArgument, "vector cache belongs to another model");

    std::vector<std::string> misses;
    std::set<std::string> queued;
    for (const auto& s : surfaces)
        if (!cache.find(s) && queued.insert(s).second) misses.push_back(s);

    size_t batch = std::max<size_t>(options.batch_size, 1);
    size_t batches = (misses.size() + batch - 1) / batch;
    std::vector<std::optional<std::vector<std::vector<double>>>> results(batches);
    std::vector<std::string> errors(batches);
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t b = next++; b < batches; b = next++) {
            auto first = misses.begin() + static_cast<std::ptrdiff_t>(b * batch);
            auto last = misses.begin() +
                        static_cast<std::ptrdiff_t>(std::min(misses.size(), (b + 1) * batch));
            std::vector<std::string> texts(first, last);
            for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
                try {
                    auto raw = backend.embed(texts);
                    if (raw.size() != texts.size())
                        throw Error(ErrorKind::Backend, "embedding count mismatch");
                    for (const auto& v : raw)
                        if (v.size() != backend.dim())
                            throw Error(ErrorKind::Backend, "embedding dimension mismatch");
                    results[b] = std::move(raw);
                    break;
                } catch (const std::exception& e) {
                    errors[b] = e.what();
                }
            }
        }
    };
    {
        size_t threads = std::clamp<size_t>(options.concurrency, 1, std::max<size_t>(batches, 1));
        std::vector<std::jthread> pool;
        for (size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
    }

    // Single writer: results enter the cache in miss order.
    std::vector<std::string> failed, degenerate;
    std::string first_error;
    for (size_t b = 0; b < batches; ++b) {
        size_t offset = b * batch;
        if (!results[b]) {
            if (first_error.empty()) first_error = errors[b];
            for (size_t i = offset; i < std::min(misses.size(), offset + batch); ++i)
                failed.push_back(misses[i]);
            continue;
        }
        for (size_t i = 0; i < results[b]->size(); ++i) {
            try {
                cache.insert(misses[offset + i], EmbeddingVector::from_raw((*results[b])[i]));
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::DegenerateEmbedding) throw;
                degenerate.push_back(misses[offset + i]);
            }
        }
    }
    auto joined = [](const std::vector<std::string>& xs) {
        std::string s;
        for (const auto& x : xs) s += (s.empty() ? "'" : ", '") + x + "'";
        return s;
    };
    if (!failed.empty())
        throw Error(ErrorKind::Backend,
                    "embedding failed for " + joined(failed) + ": " + first_error);
    if (!degenerate.empty())
        throw Error(ErrorKind::DegenerateEmbedding, "zero-norm embedding for " + joined(degenerate));

    std::vector<EmbeddingVector> out;
    out.reserve(surfaces.size());
    for (const auto& s : surfaces) out.push_back(*cache.find(s));
    return out;
}

}  // namespace litscape
