// Copyright 2026 The Hybrid Retrieval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// \file dense.hpp
/// Exact inner-product search over per-language vector shards, the
/// feature-hashing embedder, and the DVEC vectors file.
///
/// DVEC layout (little-endian):
///   "DVEC" | u8 version | u32 dim | u64 count | count x { u32 len, docid bytes, dim x f32 }

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hybrid/corpus.hpp"
#include "hybrid/detail/binary_io.hpp"
#include "hybrid/detail/files.hpp"
#include "hybrid/error.hpp"
#include "hybrid/hit.hpp"
#include "hybrid/text.hpp"

namespace hybrid {

/// Maps text to a fixed-size vector. Implementations must be deterministic.
class Embedder {
  public:
    virtual ~Embedder() = default;
    [[nodiscard]] virtual std::size_t dim() const = 0;
    [[nodiscard]] virtual std::vector<double> embed(std::string_view text, std::string_view lang) const = 0;
};

namespace detail {

[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Seeded 64-bit token hash: splitmix64(fnv1a64(token) ^ seed).
[[nodiscard]] constexpr std::uint64_t token_hash(std::string_view token, std::uint64_t seed) noexcept {
    return detail::splitmix64(detail::fnv1a64(token) ^ seed);
}

/// Signed feature hashing: each token adds +1 or -1 (bit 63 set means -1)
/// to bucket `hash % dim`; the sum is L2-normalized. Text with no tokens,
/// or whose signs cancel exactly, maps to e0.
[[nodiscard]] inline std::vector<double> hash_embed(std::string_view text, std::string_view lang, std::size_t dim,
                                                    std::uint64_t seed, const text::TokenizerConfig& tokenizer = {}) {
    if (dim < 2) {
        throw Error(ErrorKind::invalid_argument, "hash embedding requires dim >= 2");
    }
    std::vector<double> v(dim, 0.0);
    for (const auto& tok : text::tokenize(text, lang, tokenizer)) {
        const auto h = token_hash(tok, seed);
        v[h % dim] += (h >> 63) != 0 ? -1.0 : 1.0;
    }
    double sq = 0.0;
    for (double x : v) {
        sq += x * x;
    }
    if (sq == 0.0) {
        v[0] = 1.0;
        return v;
    }
    const double norm = std::sqrt(sq);
    for (double& x : v) {
        x /= norm;
    }
    return v;
}

class HashEmbedder final : public Embedder {
  public:
    HashEmbedder(std::size_t dim, std::uint64_t seed, text::TokenizerConfig tokenizer = {})
        : dim_(dim), seed_(seed), tokenizer_(std::move(tokenizer)) {
        if (dim_ < 2) {
            throw Error(ErrorKind::invalid_argument, "hash embedding requires dim >= 2");
        }
    }

    [[nodiscard]] std::size_t dim() const override { return dim_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    [[nodiscard]] std::vector<double> embed(std::string_view text, std::string_view lang) const override {
        return hash_embed(text, lang, dim_, seed_, tokenizer_);
    }

  private:
    std::size_t dim_;
    std::uint64_t seed_;
    text::TokenizerConfig tokenizer_;
};

/// Id-keyed float32 vectors, the in-memory form of a DVEC file.
class DenseVectors {
  public:
    static constexpr std::uint8_t format_version = 1;

    explicit DenseVectors(std::size_t dim = 0) : dim_(dim) {}

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] std::span<const std::string> ids() const noexcept { return ids_; }

    [[nodiscard]] std::span<const float> at(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }

    [[nodiscard]] std::optional<std::span<const float>> find(std::string_view id) const {
        const auto it = by_id_.find(std::string(id));
        if (it == by_id_.end()) {
            return std::nullopt;
        }
        return at(it->second);
    }

    template <typename T>
    void add(std::string id, std::span<const T> values) {
        if (values.size() != dim_) {
            throw Error(ErrorKind::mismatch, "vector for \"" + id + "\" has dimension " +
                                                 std::to_string(values.size()) + ", expected " + std::to_string(dim_));
        }
        for (const T x : values) {
            if (!std::isfinite(static_cast<double>(x)) || !std::isfinite(static_cast<float>(x))) {
                throw Error(ErrorKind::invalid_argument, "vector for \"" + id + "\" has a non-finite component");
            }
        }
        if (!by_id_.emplace(id, ids_.size()).second) {
            throw Error(ErrorKind::duplicate_id, "duplicate vector id \"" + id + "\"");
        }
        ids_.push_back(std::move(id));
        for (const T x : values) {
            data_.push_back(static_cast<float>(x));
        }
    }

    void write(std::ostream& out) const {
        out.write("DVEC", 4);
        detail::write_u8(out, format_version);
        detail::write_u32(out, static_cast<std::uint32_t>(dim_));
        detail::write_u64(out, ids_.size());
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            detail::write_string(out, ids_[i]);
            for (const float x : at(i)) {
                detail::write_f32(out, x);
            }
        }
    }

    [[nodiscard]] static DenseVectors read(std::istream& in) {
        char magic[4] = {};
        in.read(magic, 4);
        if (!in || std::string_view(magic, 4) != "DVEC") {
            throw Error(ErrorKind::parse, "not a DVEC vectors file (bad magic)");
        }
        if (detail::read_le<std::uint8_t>(in, "DVEC version") != format_version) {
            throw Error(ErrorKind::mismatch, "unsupported DVEC version");
        }
        const auto dim = detail::read_le<std::uint32_t>(in, "DVEC dim");
        if (dim == 0) {
            throw Error(ErrorKind::parse, "DVEC dimension is zero");
        }
        const auto count = detail::read_le<std::uint64_t>(in, "DVEC count");
        DenseVectors vectors(dim);
        std::vector<float> row(dim);
        for (std::uint64_t i = 0; i < count; ++i) {
            auto id = detail::read_string(in, "DVEC docid");
            for (auto& x : row) {
                x = detail::read_f32(in, "DVEC component");
            }
            vectors.add(std::move(id), std::span<const float>(row));
        }
        if (in.peek() != std::char_traits<char>::eof()) {
            throw Error(ErrorKind::parse, "trailing bytes after DVEC records");
        }
        return vectors;
    }

    [[nodiscard]] static DenseVectors load(const std::filesystem::path& path) {
        auto in = detail::open_input(path, true);
        try {
            return read(in);
        } catch (const Error& e) {
            throw Error(e.kind(), path.string() + ": " + e.what());
        }
    }

    void save(const std::filesystem::path& path) const {
        detail::write_file_atomic(path, [&](std::ostream& out) { write(out); }, true);
    }

  private:
    std::size_t dim_;
    std::vector<std::string> ids_;
    std::vector<float> data_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Flat inner-product store for one language. Entries are ordered by docid.
class DenseIndex {
  public:
    DenseIndex() = default;

    DenseIndex(std::string lang, DenseVectors vectors) : lang_(std::move(lang)), vectors_(std::move(vectors)) {
        const auto ids = vectors_.ids();
        if (!std::is_sorted(ids.begin(), ids.end())) {
            DenseVectors sorted(vectors_.dim());
            std::vector<std::size_t> order(ids.size());
            for (std::size_t i = 0; i < order.size(); ++i) {
                order[i] = i;
            }
            std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ids[a] < ids[b]; });
            for (auto i : order) {
                sorted.add(ids[i], vectors_.at(i));
            }
            vectors_ = std::move(sorted);
        }
    }

    [[nodiscard]] const std::string& lang() const noexcept { return lang_; }
    [[nodiscard]] std::size_t dim() const noexcept { return vectors_.dim(); }
    [[nodiscard]] std::size_t size() const noexcept { return vectors_.size(); }
    [[nodiscard]] const DenseVectors& vectors() const noexcept { return vectors_; }

    [[nodiscard]] double inner_product(std::size_t entry, std::span<const double> query) const {
        const auto v = vectors_.at(entry);
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            s += query[i] * static_cast<double>(v[i]);
        }
        return s;
    }

    [[nodiscard]] RankedList search(std::span<const double> query, std::size_t k) const {
        if (k == 0) {
            throw Error(ErrorKind::invalid_argument, "dense search requires k >= 1");
        }
        if (query.size() != dim()) {
            throw Error(ErrorKind::mismatch, "query dimension " + std::to_string(query.size()) +
                                                 " does not match " + lang_ + " index dimension " +
                                                 std::to_string(dim()));
        }
        RankedList hits;
        hits.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) {
            hits.push_back(Hit{.docid = vectors_.ids()[i],
                               .score = inner_product(i, query),
                               .source = Source::dense,
                               .lang = lang_});
        }
        keep_top_k(hits, k);
        return hits;
    }

    void save(const std::filesystem::path& path) const { vectors_.save(path); }

    [[nodiscard]] static DenseIndex load(const std::filesystem::path& path, std::string lang) {
        if (!std::filesystem::exists(path)) {
            throw Error(ErrorKind::not_found, "dense index " + path.string() + " does not exist");
        }
        return DenseIndex(std::move(lang), DenseVectors::load(path));
    }

  private:
    std::string lang_;
    DenseVectors vectors_;
};

/// Embeds `title + " " + text` of every passage of `lang`.
[[nodiscard]] inline DenseIndex build_dense_index(const Corpus& corpus, std::string_view lang,
                                                  const Embedder& embedder) {
    auto docs = corpus.passages_in(lang);
    std::sort(docs.begin(), docs.end(), [](const Passage* a, const Passage* b) { return a->id < b->id; });
    DenseVectors vectors(embedder.dim());
    for (const auto* p : docs) {
        const auto v = embedder.embed(p->title + " " + p->text, p->lang);
        vectors.add(p->id, std::span<const double>(v));
    }
    return DenseIndex(std::string(lang), std::move(vectors));
}

/// Uses precomputed vectors, which must cover exactly the passages of `lang`.
[[nodiscard]] inline DenseIndex build_dense_index(const Corpus& corpus, std::string_view lang,
                                                  const DenseVectors& precomputed) {
    auto docs = corpus.passages_in(lang);
    std::sort(docs.begin(), docs.end(), [](const Passage* a, const Passage* b) { return a->id < b->id; });
    std::unordered_set<std::string_view> wanted;
    for (const auto* p : docs) {
        wanted.insert(p->id);
    }
    for (const auto& id : precomputed.ids()) {
        if (!wanted.contains(id)) {
            throw Error(ErrorKind::mismatch,
                        "vectors file has docid \"" + id + "\" which is not a " + std::string(lang) + " passage");
        }
    }
    DenseVectors vectors(precomputed.dim());
    for (const auto* p : docs) {
        const auto v = precomputed.find(p->id);
        if (!v) {
            throw Error(ErrorKind::mismatch, "vectors file is missing docid \"" + p->id + "\"");
        }
        vectors.add(p->id, *v);
    }
    return DenseIndex(std::string(lang), std::move(vectors));
}

/// Top `k` over the union of all shards by raw inner product. Each shard
/// contributes its own top `k`; the merged list is re-ranked and cut.
[[nodiscard]] inline RankedList dense_search_global(std::span<const DenseIndex> shards,
                                                    std::span<const double> query, std::size_t k) {
    if (k == 0) {
        throw Error(ErrorKind::invalid_argument, "dense search requires k >= 1");
    }
    for (const auto& shard : shards) {
        if (shard.dim() != shards.front().dim()) {
            throw Error(ErrorKind::mismatch, "dense shards disagree on dimension (" + shards.front().lang() + ": " +
                                                 std::to_string(shards.front().dim()) + ", " + shard.lang() + ": " +
                                                 std::to_string(shard.dim()) + ")");
        }
    }
    RankedList merged;
    for (const auto& shard : shards) {
        auto part = shard.search(query, k);
        merged.insert(merged.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    keep_top_k(merged, k);
    return merged;
}

}  // namespace hybrid
