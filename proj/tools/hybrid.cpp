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

// Command line front-end: index, search, fuse, eval-retrieval, eval-answers, stats.

#include <cstdint>
#include <exception>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hybrid/hybrid.hpp"

namespace {

void print_stats(const hybrid::CorpusStats& stats) {
    std::cout << std::left << std::setw(10) << "lang" << std::right << std::setw(12) << "passages" << std::setw(10)
              << "percent" << '\n';
    std::cout << std::fixed << std::setprecision(2);
    for (const auto& [lang, n] : stats.counts) {
        std::cout << std::left << std::setw(10) << lang << std::right << std::setw(12) << n << std::setw(9)
                  << 100.0 * stats.fractions.at(lang) << "%\n";
    }
    std::cout << std::left << std::setw(10) << "total" << std::right << std::setw(12) << stats.total << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multilingual hybrid dense/sparse passage retrieval"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string corpus, queries, predictions, vectors, query_vectors, index_dir;
    std::string dense_run, sparse_run, output, run, report, report_jsonl, judgments;
    std::vector<std::string> tsv;
    std::vector<std::string> char_level;
    std::size_t k = 60;
    double max_frac = 0.2;
    double alpha = 0.5;
    std::string mode = "scd";
    std::size_t dim = 256;
    std::uint64_t seed = 0;
    bool quiet = false;

    auto* o_config = app.add_option("--config", config_path, "JSON config document; flags override it")
                         ->check(CLI::ExistingFile);
    auto* o_corpus = app.add_option("--corpus", corpus, "Passages (JSONL)");
    auto* o_tsv = app.add_option("--tsv", tsv, "DPR-style TSV passages as LANG=PATH (repeatable)");
    auto* o_queries = app.add_option("--queries", queries, "Queries (JSONL)");
    auto* o_predictions = app.add_option("--predictions", predictions, "Answer predictions (JSONL)");
    auto* o_vectors = app.add_option("--vectors", vectors, "Precomputed passage vectors (DVEC)");
    auto* o_qvectors = app.add_option("--query-vectors", query_vectors, "Precomputed query vectors (DVEC)");
    auto* o_index = app.add_option("--index", index_dir, "Index directory");
    auto* o_dense = app.add_option("--dense-run", dense_run, "Dense run file");
    auto* o_sparse = app.add_option("--sparse-run", sparse_run, "Sparse run file");
    auto* o_output = app.add_option("--output", output, "Fused run file written by `fuse`");
    auto* o_run = app.add_option("--run", run, "Run file scored by `eval-retrieval`");
    auto* o_report = app.add_option("--report", report, "Report output (JSON)");
    auto* o_report_jsonl = app.add_option("--report-jsonl", report_jsonl, "Report output (line-delimited)");
    auto* o_judgments = app.add_option("--judgments", judgments, "Per-hit relevance judgments output");
    auto* o_char = app.add_option("--char-level-langs", char_level, "Languages tokenized per character");
    auto* o_k = app.add_option("--k", k, "Result list length / metric cutoff")->check(CLI::PositiveNumber);
    auto* o_max_frac = app.add_option("--max-frac", max_frac, "Sparse influence budget fraction")
                           ->check(CLI::Range(0.0, 1.0));
    auto* o_alpha = app.add_option("--alpha", alpha, "Combine-Score dense weight")->check(CLI::Range(0.0, 1.0));
    auto* o_mode = app.add_option("--mode", mode, "Fusion mode")
                       ->check(CLI::IsMember({"scd", "combine", "dense_only", "sparse_only"}));
    auto* o_dim = app.add_option("--dim", dim, "Hash embedding dimensionality");
    auto* o_seed = app.add_option("--seed", seed, "Hash embedding seed");
    app.add_flag("--quiet", quiet, "Suppress progress messages");

    auto* c_index = app.add_subcommand("index", "Build per-language sparse and dense indices");
    auto* c_search = app.add_subcommand("search", "Write dense and sparse run files");
    auto* c_fuse = app.add_subcommand("fuse", "Fuse dense and sparse runs");
    auto* c_eval_retrieval = app.add_subcommand("eval-retrieval", "MRR@k and Recall@k of a run");
    auto* c_eval_answers = app.add_subcommand("eval-answers", "EM and F1 of answer predictions");
    auto* c_stats = app.add_subcommand("stats", "Passage counts per language");

    CLI11_PARSE(app, argc, argv);

    try {
        hybrid::PipelineConfig cfg;
        if (*o_config) {
            cfg = hybrid::load_config(config_path);
        }
        auto set_path = [](CLI::Option* opt, const std::string& value, std::filesystem::path& out) {
            if (*opt) {
                out = value;
            }
        };
        set_path(o_corpus, corpus, cfg.corpus);
        set_path(o_queries, queries, cfg.queries);
        set_path(o_predictions, predictions, cfg.predictions);
        set_path(o_vectors, vectors, cfg.vectors);
        set_path(o_qvectors, query_vectors, cfg.query_vectors);
        set_path(o_index, index_dir, cfg.index_dir);
        set_path(o_dense, dense_run, cfg.dense_run);
        set_path(o_sparse, sparse_run, cfg.sparse_run);
        set_path(o_output, output, cfg.fused_run);
        set_path(o_run, run, cfg.eval_run);
        set_path(o_report, report, cfg.report);
        set_path(o_report_jsonl, report_jsonl, cfg.report_jsonl);
        set_path(o_judgments, judgments, cfg.judgments);
        if (*o_tsv) {
            cfg.corpus_tsv.clear();
            for (const auto& spec : tsv) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos || eq == 0) {
                    throw hybrid::Error(hybrid::ErrorKind::invalid_argument, "--tsv expects LANG=PATH, got " + spec);
                }
                cfg.corpus_tsv[spec.substr(0, eq)] = spec.substr(eq + 1);
            }
        }
        if (*o_char) {
            cfg.tokenizer.char_level_langs = {char_level.begin(), char_level.end()};
        }
        if (*o_k) cfg.fusion.k = k;
        if (*o_max_frac) cfg.fusion.max_frac = max_frac;
        if (*o_alpha) cfg.fusion.alpha = alpha;
        if (*o_mode) cfg.fusion.mode = hybrid::parse_fusion_mode(mode);
        if (*o_dim) cfg.dim = dim;
        if (*o_seed) cfg.seed = seed;
        cfg.quiet = quiet;

        if (*c_index) {
            const auto summary = hybrid::cmd_index(cfg);
            std::cout << "indexed " << summary.passages_per_lang.size() << " languages, dim " << summary.dim << '\n';
        } else if (*c_search) {
            const auto runs = hybrid::cmd_search(cfg);
            std::cout << "wrote " << runs.dense.size() << " dense and " << runs.sparse.size() << " sparse entries\n";
        } else if (*c_fuse) {
            const auto fused = hybrid::cmd_fuse(cfg);
            std::cout << "wrote " << fused.size() << " fused entries\n";
        } else if (*c_eval_retrieval) {
            std::cout << hybrid::format_report_table(hybrid::cmd_eval_retrieval(cfg));
        } else if (*c_eval_answers) {
            std::cout << hybrid::format_report_table(hybrid::cmd_eval_answers(cfg));
        } else if (*c_stats) {
            print_stats(hybrid::cmd_stats(cfg));
        }
    } catch (const hybrid::Error& e) {
        std::cerr << "error: " << hybrid::to_string(e.kind()) << ": " << e.what() << '\n';
        return hybrid::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
