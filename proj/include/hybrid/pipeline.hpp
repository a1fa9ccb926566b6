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

/// \file pipeline.hpp
/// Batch commands behind the `hybrid` tool. Each command reads its inputs
/// from the paths in a PipelineConfig and writes its artifacts atomically.
///
/// Index directory layout:
///
///   manifest.json            languages, embedder spec, tokenizer, BM25 params
///   sparse/<lang>/meta.json
///   sparse/<lang>/postings.bin
///   dense/<lang>.dvec

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hybrid/corpus.hpp"
#include "hybrid/dense.hpp"
#include "hybrid/detail/files.hpp"
#include "hybrid/error.hpp"
#include "hybrid/eval.hpp"
#include "hybrid/fusion.hpp"
#include "hybrid/run.hpp"
#include "hybrid/sparse.hpp"
#include "hybrid/text.hpp"

namespace hybrid {

namespace fs = std::filesystem;

struct PipelineConfig {
    // inputs
    fs::path corpus;                           // JSONL passages
    std::map<std::string, fs::path> corpus_tsv;  // lang -> DPR-style TSV file
    fs::path queries;
    fs::path predictions;
    fs::path vectors;        // DVEC passage vectors; replaces the hash embedder
    fs::path query_vectors;  // DVEC query vectors, required with `vectors`

    // artifacts
    fs::path index_dir;
    fs::path dense_run;
    fs::path sparse_run;
    fs::path fused_run;
    fs::path eval_run;  // run scored by eval-retrieval; defaults to fused_run
    fs::path report;
    fs::path report_jsonl;
    fs::path judgments;

    FusionConfig fusion;
    std::size_t dim = 256;
    std::uint64_t seed = 0;
    Bm25Params bm25;
    text::TokenizerConfig tokenizer;
    bool quiet = false;

    [[nodiscard]] bool use_vectors() const { return !vectors.empty(); }
};

namespace detail {

inline void require_path(const fs::path& p, std::string_view what) {
    if (p.empty()) {
        throw Error(ErrorKind::invalid_argument, "no " + std::string(what) + " path configured");
    }
    if (!fs::exists(p)) {
        throw Error(ErrorKind::not_found, std::string(what) + " " + p.string() + " does not exist");
    }
}

inline void require_output(const fs::path& p, std::string_view what) {
    if (p.empty()) {
        throw Error(ErrorKind::invalid_argument, "no " + std::string(what) + " path configured");
    }
}

inline void log(const PipelineConfig& config, const std::string& msg) {
    if (!config.quiet) {
        std::cerr << "[hybrid] " << msg << '\n';
    }
}

inline void check_lang_path_component(const std::string& lang) {
    if (lang == "." || lang == ".." || lang.find_first_of("/\\") != std::string::npos) {
        throw Error(ErrorKind::invalid_argument, "language code \"" + lang + "\" cannot be used as a path component");
    }
}

/// Resolves a possibly relative path from a config document.
[[nodiscard]] inline fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace detail

/// Reads a JSON config document. Relative paths resolve against the
/// directory holding the document.
[[nodiscard]] inline PipelineConfig load_config(const fs::path& path, PipelineConfig config = {}) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(detail::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
    if (!j.is_object()) {
        throw Error(ErrorKind::parse, path.string() + ": config must be a JSON object");
    }
    const fs::path base = path.parent_path();
    static const std::set<std::string> known = {
        "corpus", "corpus_tsv", "queries", "predictions", "vectors", "query_vectors", "index", "dense_run",
        "sparse_run", "fused_run", "eval_run", "report", "report_jsonl", "judgments", "k", "max_frac", "alpha",
        "mode", "dim", "seed", "k1", "b", "char_level_langs"};
    try {
        for (const auto& [key, value] : j.items()) {
            if (!known.contains(key)) {
                throw Error(ErrorKind::invalid_argument, path.string() + ": unknown config key \"" + key + "\"");
            }
        }
        auto path_field = [&](const char* key, fs::path& out) {
            if (j.contains(key)) {
                out = detail::resolve(base, j.at(key).get<std::string>());
            }
        };
        path_field("corpus", config.corpus);
        path_field("queries", config.queries);
        path_field("predictions", config.predictions);
        path_field("vectors", config.vectors);
        path_field("query_vectors", config.query_vectors);
        path_field("index", config.index_dir);
        path_field("dense_run", config.dense_run);
        path_field("sparse_run", config.sparse_run);
        path_field("fused_run", config.fused_run);
        path_field("eval_run", config.eval_run);
        path_field("report", config.report);
        path_field("report_jsonl", config.report_jsonl);
        path_field("judgments", config.judgments);
        if (j.contains("corpus_tsv")) {
            for (const auto& [lang, p] : j.at("corpus_tsv").items()) {
                config.corpus_tsv[lang] = detail::resolve(base, p.get<std::string>());
            }
        }
        if (j.contains("k")) config.fusion.k = j.at("k").get<std::size_t>();
        if (j.contains("max_frac")) config.fusion.max_frac = j.at("max_frac").get<double>();
        if (j.contains("alpha")) config.fusion.alpha = j.at("alpha").get<double>();
        if (j.contains("mode")) config.fusion.mode = parse_fusion_mode(j.at("mode").get<std::string>());
        if (j.contains("dim")) config.dim = j.at("dim").get<std::size_t>();
        if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("k1")) config.bm25.k1 = j.at("k1").get<double>();
        if (j.contains("b")) config.bm25.b = j.at("b").get<double>();
        if (j.contains("char_level_langs")) {
            config.tokenizer.char_level_langs.clear();
            for (const auto& l : j.at("char_level_langs")) {
                config.tokenizer.char_level_langs.insert(l.get<std::string>());
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
    return config;
}

[[nodiscard]] inline Corpus load_corpus(const PipelineConfig& config) {
    std::vector<Corpus> parts;
    for (const auto& [lang, path] : config.corpus_tsv) {
        detail::require_path(path, "corpus TSV");
        auto in = detail::open_input(path);
        parts.push_back(ingest_passages_tsv(in, lang));
    }
    if (!config.corpus.empty() || parts.empty()) {
        detail::require_path(config.corpus, "corpus");
        auto in = detail::open_input(config.corpus);
        parts.push_back(ingest_passages(in));
    }
    Corpus corpus = parts.size() == 1 ? std::move(parts.front()) : merge_corpora(parts);
    for (const auto& w : corpus.warnings()) {
        detail::log(config, "warning: " + w);
    }
    return corpus;
}

[[nodiscard]] inline QuerySet load_queries(const PipelineConfig& config) {
    detail::require_path(config.queries, "queries");
    auto in = detail::open_input(config.queries);
    return ingest_queries(in);
}

[[nodiscard]] inline Run load_run(const fs::path& path, std::string_view what) {
    detail::require_path(path, what);
    auto in = detail::open_input(path);
    try {
        return read_run(in);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

inline void save_run(const fs::path& path, const Run& run) {
    detail::write_file_atomic(path, [&](std::ostream& out) { write_run(out, run); });
}

struct IndexSummary {
    std::map<std::string, std::size_t> passages_per_lang;
    std::size_t dim = 0;
};

/// Builds one sparse and one dense index per corpus language.
inline IndexSummary cmd_index(const PipelineConfig& config) {
    config.fusion.validate();
    detail::require_output(config.index_dir, "index");
    const Corpus corpus = load_corpus(config);
    const auto langs = corpus.languages();
    for (const auto& lang : langs) {
        detail::check_lang_path_component(lang);
    }

    std::optional<DenseVectors> vectors;
    std::optional<HashEmbedder> embedder;
    if (config.use_vectors()) {
        detail::require_path(config.vectors, "vectors file");
        vectors = DenseVectors::load(config.vectors);
        for (const auto& id : vectors->ids()) {
            if (corpus.find(id) == nullptr) {
                throw Error(ErrorKind::mismatch, "vectors file has docid \"" + id + "\" which is not in the corpus");
            }
        }
    } else {
        embedder.emplace(config.dim, config.seed, config.tokenizer);
    }
    const std::size_t dim = vectors ? vectors->dim() : embedder->dim();

    auto build_lang = [&](const std::string& lang) {
        auto sparse = build_sparse_index(corpus, lang, config.tokenizer, config.bm25);
        if (vectors) {
            DenseVectors subset(vectors->dim());
            for (const auto* p : corpus.passages_in(lang)) {
                if (const auto v = vectors->find(p->id)) {
                    subset.add(p->id, *v);
                }
            }
            return std::pair{std::move(sparse), build_dense_index(corpus, lang, subset)};
        }
        return std::pair{std::move(sparse), build_dense_index(corpus, lang, *embedder)};
    };

    detail::replace_directory_atomic(config.index_dir, [&](const fs::path& dir) {
        std::vector<std::future<std::pair<SparseIndex, DenseIndex>>> jobs;
        jobs.reserve(langs.size());
        for (const auto& lang : langs) {
            jobs.push_back(std::async(std::launch::async, build_lang, lang));
        }
        for (std::size_t i = 0; i < langs.size(); ++i) {
            auto [sparse, dense] = jobs[i].get();
            sparse.save(dir / "sparse" / langs[i]);
            dense.save(dir / "dense" / (langs[i] + ".dvec"));
        }
        nlohmann::json embedder_spec = vectors ? nlohmann::json{{"kind", "vectors"}, {"dim", dim}}
                                               : nlohmann::json{{"kind", "hash"}, {"dim", dim}, {"seed", config.seed}};
        const nlohmann::json manifest = {
            {"format_version", 1},
            {"languages", langs},
            {"dim", dim},
            {"embedder", std::move(embedder_spec)},
            {"char_level_langs", config.tokenizer.char_level_langs},
            {"bm25", {{"k1", config.bm25.k1}, {"b", config.bm25.b}}},
        };
        detail::write_file_atomic(dir / "manifest.json", [&](std::ostream& out) { out << manifest.dump(2) << '\n'; });
    });

    IndexSummary summary;
    summary.dim = dim;
    for (const auto& lang : langs) {
        summary.passages_per_lang[lang] = corpus.passages_in(lang).size();
        detail::log(config, "indexed " + std::to_string(summary.passages_per_lang[lang]) + " " + lang + " passages");
    }
    return summary;
}

/// Loaded index directory.
struct IndexSet {
    std::vector<std::string> languages;
    std::vector<DenseIndex> dense;
    std::map<std::string, SparseIndex> sparse;
    std::optional<HashEmbedder> embedder;  // unset for precomputed vectors
    std::size_t dim = 0;

    [[nodiscard]] static IndexSet load(const fs::path& dir) {
        if (!fs::is_directory(dir)) {
            throw Error(ErrorKind::not_found, "index directory " + dir.string() + " does not exist");
        }
        nlohmann::json m;
        try {
            m = nlohmann::json::parse(detail::read_file(dir / "manifest.json"));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::parse, (dir / "manifest.json").string() + ": " + e.what());
        }
        IndexSet set;
        try {
            set.languages = m.at("languages").get<std::vector<std::string>>();
            set.dim = m.at("dim").get<std::size_t>();
            const auto& e = m.at("embedder");
            if (e.at("kind").get<std::string>() == "hash") {
                text::TokenizerConfig tok;
                tok.char_level_langs.clear();
                for (const auto& l : m.at("char_level_langs")) {
                    tok.char_level_langs.insert(l.get<std::string>());
                }
                set.embedder.emplace(e.at("dim").get<std::size_t>(), e.at("seed").get<std::uint64_t>(), tok);
            }
        } catch (const nlohmann::json::exception& ex) {
            throw Error(ErrorKind::parse, (dir / "manifest.json").string() + ": " + ex.what());
        }
        for (const auto& lang : set.languages) {
            detail::check_lang_path_component(lang);
            set.sparse.emplace(lang, SparseIndex::load(dir / "sparse" / lang));
            set.dense.push_back(DenseIndex::load(dir / "dense" / (lang + ".dvec"), lang));
            if (set.dense.back().dim() != set.dim) {
                throw Error(ErrorKind::mismatch, "dense index for " + lang + " has unexpected dimension");
            }
        }
        return set;
    }
};

struct SearchRuns {
    Run dense;
    Run sparse;
};

/// Dense search over every language shard; sparse search in the query's
/// own language only.
inline SearchRuns cmd_search(const PipelineConfig& config) {
    config.fusion.validate();
    detail::require_output(config.dense_run, "dense run");
    detail::require_output(config.sparse_run, "sparse run");
    detail::require_path(config.index_dir, "index");
    const auto index = IndexSet::load(config.index_dir);
    const auto queries = load_queries(config);
    const std::size_t k = config.fusion.k;

    std::optional<DenseVectors> qvecs;
    if (!index.embedder) {
        detail::require_path(config.query_vectors, "query vectors file");
        qvecs = DenseVectors::load(config.query_vectors);
        if (qvecs->dim() != index.dim) {
            throw Error(ErrorKind::mismatch, "query vectors have dimension " + std::to_string(qvecs->dim()) +
                                                 ", index has " + std::to_string(index.dim));
        }
    }

    SearchRuns runs;
    runs.dense.reserve(queries.size());
    runs.sparse.reserve(queries.size());
    for (const auto& q : queries) {
        std::vector<double> qv;
        if (index.embedder) {
            qv = index.embedder->embed(q.question, q.lang);
        } else {
            const auto v = qvecs->find(q.id);
            if (!v) {
                throw Error(ErrorKind::mismatch, "query vectors file is missing query \"" + q.id + "\"");
            }
            qv.assign(v->begin(), v->end());
        }
        runs.dense.push_back({q.id, dense_search_global(index.dense, qv, k)});

        const auto it = index.sparse.find(q.lang);
        runs.sparse.push_back({q.id, it == index.sparse.end() ? RankedList{} : it->second.search(q.question, k)});
    }
    save_run(config.dense_run, runs.dense);
    save_run(config.sparse_run, runs.sparse);
    detail::log(config, "searched " + std::to_string(queries.size()) + " queries");
    return runs;
}

/// Fuses the dense and sparse runs query by query, in dense-run order.
inline Run cmd_fuse(const PipelineConfig& config) {
    config.fusion.validate();
    detail::require_output(config.fused_run, "fused run");
    const Run dense = load_run(config.dense_run, "dense run");
    const Run sparse = load_run(config.sparse_run, "sparse run");

    std::map<std::string, const RunEntry*> sparse_by_id;
    for (const auto& e : sparse) {
        sparse_by_id.emplace(e.query_id, &e);
    }
    std::set<std::string> dense_ids;
    for (const auto& e : dense) {
        dense_ids.insert(e.query_id);
    }
    std::vector<std::string> diff;
    for (const auto& id : dense_ids) {
        if (!sparse_by_id.contains(id)) diff.push_back(id);
    }
    for (const auto& [id, _] : sparse_by_id) {
        if (!dense_ids.contains(id)) diff.push_back(id);
    }
    if (!diff.empty()) {
        std::sort(diff.begin(), diff.end());
        std::string msg = "dense and sparse runs cover different queries:";
        for (const auto& id : diff) msg += " " + id;
        throw Error(ErrorKind::mismatch, msg);
    }

    Run fused;
    fused.reserve(dense.size());
    for (const auto& e : dense) {
        fused.push_back({e.query_id, fuse(e.hits, sparse_by_id.at(e.query_id)->hits, config.fusion)});
    }
    save_run(config.fused_run, fused);
    detail::log(config, "fused " + std::to_string(fused.size()) + " queries with mode " +
                            std::string(to_string(config.fusion.mode)));
    return fused;
}

inline void save_report(const PipelineConfig& config, const EvalReport& report) {
    if (!config.report.empty()) {
        detail::write_file_atomic(config.report, [&](std::ostream& out) { out << to_json(report).dump(2) << '\n'; });
    }
    if (!config.report_jsonl.empty()) {
        detail::write_file_atomic(config.report_jsonl, [&](std::ostream& out) { write_report_jsonl(out, report); });
    }
}

/// MRR@k and Recall@k of `eval_run` (or `fused_run`).
inline EvalReport cmd_eval_retrieval(const PipelineConfig& config) {
    config.fusion.validate();
    const fs::path& run_path = config.eval_run.empty() ? config.fused_run : config.eval_run;
    const Run run = load_run(run_path, "run");
    const QuerySet queries = load_queries(config);
    const Corpus corpus = load_corpus(config);
    const Judgments judgments = judge_run(run, queries, corpus);
    const EvalReport report = evaluate_retrieval(run, judgments, config.fusion.k);
    if (!config.judgments.empty()) {
        detail::write_file_atomic(config.judgments, [&](std::ostream& out) {
            for (const auto& j : judgments.records()) {
                out << nlohmann::json{{"query_id", j.query_id}, {"docid", j.docid}, {"relevant", j.relevant}}.dump()
                    << '\n';
            }
        });
    }
    save_report(config, report);
    return report;
}

inline EvalReport cmd_eval_answers(const PipelineConfig& config) {
    detail::require_path(config.predictions, "predictions");
    const QuerySet queries = load_queries(config);
    auto in = detail::open_input(config.predictions);
    const EvalReport report = evaluate_predictions(in, queries, config.tokenizer);
    save_report(config, report);
    return report;
}

inline CorpusStats cmd_stats(const PipelineConfig& config) { return corpus_stats(load_corpus(config)); }

}  // namespace hybrid
