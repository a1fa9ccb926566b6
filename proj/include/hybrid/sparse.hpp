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

/// \file sparse.hpp
/// Per-language inverted index ranked with BM25.
///
/// Term weight (Lucene variant, no (k1 + 1) numerator factor):
///
///   idf(t)   = ln(1 + (N - df + 0.5) / (df + 0.5))
///   w(t, d)  = idf(t) * tf / (tf + k1 * (1 - b + b * dl / avgdl))
///
/// Documents are indexed as `title + " " + text`. Document ordinals follow
/// ascending passage id, so ties in score resolve by id.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hybrid/corpus.hpp"
#include "hybrid/detail/binary_io.hpp"
#include "hybrid/detail/files.hpp"
#include "hybrid/error.hpp"
#include "hybrid/hit.hpp"
#include "hybrid/text.hpp"

namespace hybrid {

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

struct Posting {
    std::uint32_t doc = 0;  // ordinal into the index's docid table
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

class SparseIndex {
  public:
    static constexpr std::uint8_t format_version = 1;

    SparseIndex() = default;

    [[nodiscard]] const std::string& lang() const noexcept { return lang_; }
    [[nodiscard]] const Bm25Params& params() const noexcept { return params_; }
    [[nodiscard]] text::TokenMode token_mode() const noexcept { return mode_; }
    [[nodiscard]] std::size_t doc_count() const noexcept { return docids_.size(); }
    [[nodiscard]] double avg_doc_length() const noexcept { return avgdl_; }
    [[nodiscard]] std::size_t term_count() const noexcept { return postings_.size(); }
    [[nodiscard]] std::span<const std::string> docids() const noexcept { return docids_; }
    [[nodiscard]] std::span<const std::uint32_t> doc_lengths() const noexcept { return doc_lengths_; }

    [[nodiscard]] std::span<const Posting> postings(std::string_view term) const {
        const auto it = postings_.find(std::string(term));
        if (it == postings_.end()) {
            return {};
        }
        return it->second;
    }

    [[nodiscard]] std::size_t doc_frequency(std::string_view term) const { return postings(term).size(); }

    [[nodiscard]] double idf(std::size_t df) const {
        const auto n = static_cast<double>(doc_count());
        const auto d = static_cast<double>(df);
        return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
    }

    [[nodiscard]] std::uint32_t doc_length(std::string_view docid) const { return doc_lengths_[ordinal(docid)]; }

    [[nodiscard]] bool contains(std::string_view docid) const { return find_ordinal(docid).has_value(); }

    /// Sum of per-term weights; repeated query terms count once per occurrence.
    [[nodiscard]] double bm25_score(std::span<const std::string> query_terms, std::string_view docid) const {
        const auto doc = ordinal(docid);
        double score = 0.0;
        for (const auto& term : query_terms) {
            const auto list = postings(term);
            const auto it = std::lower_bound(list.begin(), list.end(), doc,
                                             [](const Posting& p, std::uint32_t d) { return p.doc < d; });
            if (it != list.end() && it->doc == doc) {
                score += weight(idf(list.size()), it->tf, doc_lengths_[doc]);
            }
        }
        return score;
    }

    [[nodiscard]] double bm25_score(std::string_view question, std::string_view docid) const {
        const auto terms = text::tokenize_with(question, mode_);
        return bm25_score(terms, docid);
    }

    /// Top `k` documents with positive score, in rank order.
    [[nodiscard]] RankedList search_terms(std::span<const std::string> query_terms, std::size_t k) const {
        if (k == 0) {
            throw Error(ErrorKind::invalid_argument, "sparse search requires k >= 1");
        }
        std::vector<double> acc(doc_count(), 0.0);
        std::vector<std::uint32_t> touched;
        for (const auto& term : query_terms) {
            const auto list = postings(term);
            if (list.empty()) {
                continue;
            }
            const double term_idf = idf(list.size());
            for (const auto& p : list) {
                if (acc[p.doc] == 0.0) {
                    touched.push_back(p.doc);
                }
                acc[p.doc] += weight(term_idf, p.tf, doc_lengths_[p.doc]);
            }
        }
        RankedList hits;
        hits.reserve(touched.size());
        for (auto doc : touched) {
            if (acc[doc] > 0.0) {
                hits.push_back(Hit{.docid = docids_[doc], .score = acc[doc], .source = Source::sparse, .lang = lang_});
            }
        }
        keep_top_k(hits, k);
        return hits;
    }

    [[nodiscard]] RankedList search(std::string_view question, std::size_t k) const {
        const auto terms = text::tokenize_with(question, mode_);
        return search_terms(terms, k);
    }

    /// Writes `meta.json` and `postings.bin` into `dir`.
    void save(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        const nlohmann::json meta = {
            {"format_version", format_version},
            {"lang", lang_},
            {"doc_count", doc_count()},
            {"avg_doc_length", avgdl_},
            {"k1", params_.k1},
            {"b", params_.b},
            {"token_mode", mode_ == text::TokenMode::words ? "words" : "code_points"},
        };
        detail::write_file_atomic(dir / "meta.json", [&](std::ostream& out) { out << meta.dump(2) << '\n'; });

        std::vector<const std::string*> terms;
        terms.reserve(postings_.size());
        for (const auto& [term, _] : postings_) {
            terms.push_back(&term);
        }
        std::sort(terms.begin(), terms.end(), [](const auto* a, const auto* b) { return *a < *b; });

        detail::write_file_atomic(
            dir / "postings.bin",
            [&](std::ostream& out) {
                detail::write_u8(out, format_version);
                detail::write_u64(out, doc_count());
                for (std::size_t i = 0; i < docids_.size(); ++i) {
                    detail::write_string(out, docids_[i]);
                    detail::write_u32(out, doc_lengths_[i]);
                }
                detail::write_u64(out, terms.size());
                for (const auto* term : terms) {
                    const auto& list = postings_.at(*term);
                    detail::write_string(out, *term);
                    detail::write_u32(out, static_cast<std::uint32_t>(list.size()));
                    for (const auto& p : list) {
                        detail::write_u32(out, p.doc);
                        detail::write_u32(out, p.tf);
                    }
                }
            },
            true);
    }

    [[nodiscard]] static SparseIndex load(const std::filesystem::path& dir) {
        if (!std::filesystem::is_directory(dir)) {
            throw Error(ErrorKind::not_found, "sparse index directory " + dir.string() + " does not exist");
        }
        nlohmann::json meta;
        try {
            meta = nlohmann::json::parse(detail::read_file(dir / "meta.json"));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::parse, dir.string() + "/meta.json: " + e.what());
        }
        SparseIndex index;
        try {
            if (meta.at("format_version").get<int>() != format_version) {
                throw Error(ErrorKind::mismatch, "unsupported sparse index format in " + dir.string());
            }
            index.lang_ = meta.at("lang").get<std::string>();
            index.params_ = {.k1 = meta.at("k1").get<double>(), .b = meta.at("b").get<double>()};
            index.mode_ =
                meta.at("token_mode").get<std::string>() == "words" ? text::TokenMode::words : text::TokenMode::code_points;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::parse, dir.string() + "/meta.json: " + e.what());
        }

        auto in = detail::open_input(dir / "postings.bin", true);
        if (detail::read_le<std::uint8_t>(in, "format version") != format_version) {
            throw Error(ErrorKind::mismatch, "unsupported postings format in " + dir.string());
        }
        const auto n = detail::read_le<std::uint64_t>(in, "doc count");
        if (n != meta.at("doc_count").get<std::uint64_t>()) {
            throw Error(ErrorKind::mismatch, "doc count in postings.bin disagrees with meta.json");
        }
        index.docids_.reserve(n);
        index.doc_lengths_.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            index.docids_.push_back(detail::read_string(in, "docid"));
            index.doc_lengths_.push_back(detail::read_le<std::uint32_t>(in, "doc length"));
        }
        const auto term_count = detail::read_le<std::uint64_t>(in, "term count");
        index.postings_.reserve(term_count);
        for (std::uint64_t t = 0; t < term_count; ++t) {
            auto term = detail::read_string(in, "term");
            const auto df = detail::read_le<std::uint32_t>(in, "document frequency");
            std::vector<Posting> list;
            list.reserve(df);
            for (std::uint32_t i = 0; i < df; ++i) {
                const auto doc = detail::read_le<std::uint32_t>(in, "posting docid");
                const auto tf = detail::read_le<std::uint32_t>(in, "posting tf");
                if (doc >= n) {
                    throw Error(ErrorKind::parse, "posting refers to unknown document ordinal");
                }
                list.push_back({doc, tf});
            }
            index.postings_.emplace(std::move(term), std::move(list));
        }
        index.finalize();
        return index;
    }

  private:
    friend SparseIndex build_sparse_index(const Corpus&, std::string_view, const text::TokenizerConfig&, Bm25Params);

    [[nodiscard]] double weight(double term_idf, std::uint32_t tf, std::uint32_t dl) const {
        const double norm = avgdl_ > 0.0 ? static_cast<double>(dl) / avgdl_ : 0.0;
        const double t = static_cast<double>(tf);
        return term_idf * t / (t + params_.k1 * (1.0 - params_.b + params_.b * norm));
    }

    [[nodiscard]] std::optional<std::uint32_t> find_ordinal(std::string_view docid) const {
        const auto it = std::lower_bound(docids_.begin(), docids_.end(), docid);
        if (it == docids_.end() || *it != docid) {
            return std::nullopt;
        }
        return static_cast<std::uint32_t>(it - docids_.begin());
    }

    [[nodiscard]] std::uint32_t ordinal(std::string_view docid) const {
        const auto o = find_ordinal(docid);
        if (!o) {
            throw Error(ErrorKind::not_found,
                        "document \"" + std::string(docid) + "\" is not in the " + lang_ + " sparse index");
        }
        return *o;
    }

    void finalize() {
        std::uint64_t total = 0;
        for (auto dl : doc_lengths_) {
            total += dl;
        }
        avgdl_ = docids_.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docids_.size());
    }

    std::string lang_;
    Bm25Params params_;
    text::TokenMode mode_ = text::TokenMode::words;
    std::vector<std::string> docids_;  // ascending
    std::vector<std::uint32_t> doc_lengths_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    double avgdl_ = 0.0;
};

/// Indexes the passages of `lang`. The result depends only on the set of
/// passages, not on their order in the corpus.
[[nodiscard]] inline SparseIndex build_sparse_index(const Corpus& corpus, std::string_view lang,
                                                    const text::TokenizerConfig& tokenizer = {},
                                                    Bm25Params params = {}) {
    auto docs = corpus.passages_in(lang);
    std::sort(docs.begin(), docs.end(), [](const Passage* a, const Passage* b) { return a->id < b->id; });
    if (docs.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorKind::invalid_argument, "too many passages for one sparse index");
    }

    SparseIndex index;
    index.lang_ = std::string(lang);
    index.params_ = params;
    index.mode_ = text::token_mode(lang, tokenizer);
    index.docids_.reserve(docs.size());
    index.doc_lengths_.reserve(docs.size());

    std::unordered_map<std::string, std::uint32_t> tf;
    for (std::uint32_t ord = 0; ord < docs.size(); ++ord) {
        const Passage& p = *docs[ord];
        const auto tokens = text::tokenize_with(p.title + " " + p.text, index.mode_);
        index.docids_.push_back(p.id);
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
        tf.clear();
        for (const auto& t : tokens) {
            ++tf[t];
        }
        for (auto& [term, count] : tf) {
            index.postings_[term].push_back({ord, count});
        }
    }
    index.finalize();
    return index;
}

[[nodiscard]] inline double bm25_score(const SparseIndex& index, std::span<const std::string> query_terms,
                                       std::string_view docid) {
    return index.bm25_score(query_terms, docid);
}

[[nodiscard]] inline RankedList sparse_search(const SparseIndex& index, std::string_view question, std::size_t k) {
    return index.search(question, k);
}

}  // namespace hybrid
