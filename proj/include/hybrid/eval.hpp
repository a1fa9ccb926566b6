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

/// \file eval.hpp
/// Retrieval metrics (MRR@k, Recall@k) under answer-substring relevance,
/// and SQuAD-style answer metrics (EM, token F1). Every metric is averaged
/// per language first; the macro value is the mean over languages.

#include <algorithm>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hybrid/corpus.hpp"
#include "hybrid/error.hpp"
#include "hybrid/run.hpp"
#include "hybrid/text.hpp"

namespace hybrid {

struct RelevanceJudgment {
    std::string query_id;
    std::string docid;
    bool relevant = false;

    bool operator==(const RelevanceJudgment&) const = default;
};

/// Normalized, non-empty answer strings used for substring matching.
[[nodiscard]] inline std::vector<std::string> normalized_answers(const Query& query) {
    std::vector<std::string> out;
    for (const auto& a : query.answer_universe()) {
        auto n = text::normalize(a);
        if (!n.empty()) {
            out.push_back(std::move(n));
        }
    }
    return out;
}

[[nodiscard]] inline bool contains_any(std::string_view haystack, const std::vector<std::string>& needles) {
    return std::any_of(needles.begin(), needles.end(),
                       [&](const std::string& n) { return haystack.find(n) != std::string_view::npos; });
}

/// True iff some normalized answer from the query's universe is a substring
/// of the normalized passage text.
[[nodiscard]] inline bool judge_relevant(const Query& query, const Passage& passage) {
    const auto answers = normalized_answers(query);
    if (answers.empty()) {
        return false;
    }
    return contains_any(text::normalize(passage.text), answers);
}

/// Relevance of the hits in a run, keyed by query.
class Judgments {
  public:
    void add_query(const std::string& query_id, const std::string& lang) { query_lang_.emplace(query_id, lang); }

    void add(RelevanceJudgment j) {
        if (j.relevant) {
            relevant_.emplace(j.query_id, j.docid);
        }
        records_.push_back(std::move(j));
    }

    [[nodiscard]] bool has_query(const std::string& query_id) const { return query_lang_.contains(query_id); }

    [[nodiscard]] bool is_relevant(const std::string& query_id, const std::string& docid) const {
        return relevant_.contains({query_id, docid});
    }

    /// Query id -> language, ordered by id.
    [[nodiscard]] const std::map<std::string, std::string>& queries() const noexcept { return query_lang_; }

    [[nodiscard]] const std::vector<RelevanceJudgment>& records() const noexcept { return records_; }

  private:
    std::map<std::string, std::string> query_lang_;
    std::set<std::pair<std::string, std::string>> relevant_;
    std::vector<RelevanceJudgment> records_;
};

/// Judges every hit of every run entry. All queries of `queries` are
/// registered, so queries missing from the run score zero.
[[nodiscard]] inline Judgments judge_run(const Run& run, const QuerySet& queries, const Corpus& corpus) {
    Judgments judgments;
    for (const auto& q : queries) {
        judgments.add_query(q.id, q.lang);
    }
    std::unordered_map<std::string, std::string> normalized_text;
    for (const auto& entry : run) {
        const Query* q = queries.find(entry.query_id);
        if (q == nullptr) {
            throw Error(ErrorKind::not_found, "run has query \"" + entry.query_id + "\" which is not in the query set");
        }
        const auto answers = normalized_answers(*q);
        for (const auto& hit : entry.hits) {
            const Passage* p = corpus.find(hit.docid);
            if (p == nullptr) {
                throw Error(ErrorKind::not_found, "run for query \"" + entry.query_id + "\" has docid \"" + hit.docid +
                                                      "\" which is not in the corpus");
            }
            auto it = normalized_text.find(p->id);
            if (it == normalized_text.end()) {
                it = normalized_text.emplace(p->id, text::normalize(p->text)).first;
            }
            judgments.add({.query_id = entry.query_id,
                           .docid = hit.docid,
                           .relevant = !answers.empty() && contains_any(it->second, answers)});
        }
    }
    return judgments;
}

struct MetricValues {
    std::map<std::string, double> per_lang;
    double macro = 0.0;
};

struct EvalReport {
    std::optional<std::size_t> k;
    std::map<std::string, MetricValues> metrics;
    std::map<std::string, std::size_t> query_counts;
};

namespace detail {

/// Per-language means of per-query values, then the mean over languages.
[[nodiscard]] inline MetricValues aggregate(const std::map<std::string, std::vector<double>>& by_lang) {
    MetricValues out;
    double sum = 0.0;
    for (const auto& [lang, values] : by_lang) {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        const double mean = values.empty() ? 0.0 : s / static_cast<double>(values.size());
        out.per_lang[lang] = mean;
        sum += mean;
    }
    out.macro = by_lang.empty() ? 0.0 : sum / static_cast<double>(by_lang.size());
    return out;
}

/// 1-based rank of the first relevant hit within the top k, or 0.
template <typename Fn>
void for_each_first_relevant(const Run& run, const Judgments& judgments, std::size_t k, Fn&& fn) {
    if (k == 0) {
        throw Error(ErrorKind::invalid_argument, "metric cutoff k must be >= 1");
    }
    std::unordered_map<std::string_view, const RunEntry*> by_query;
    for (const auto& e : run) {
        if (!judgments.has_query(e.query_id)) {
            throw Error(ErrorKind::not_found, "run has query \"" + e.query_id + "\" with no judgments");
        }
        by_query.emplace(e.query_id, &e);
    }
    for (const auto& [qid, lang] : judgments.queries()) {
        std::size_t first = 0;
        const auto it = by_query.find(qid);
        if (it != by_query.end()) {
            const auto& hits = it->second->hits;
            const auto depth = std::min(k, hits.size());
            for (std::size_t r = 0; r < depth; ++r) {
                if (judgments.is_relevant(qid, hits[r].docid)) {
                    first = r + 1;
                    break;
                }
            }
        }
        fn(lang, first);
    }
}

[[nodiscard]] inline bool is_english(std::string_view lang) {
    return lang == "en" || lang.starts_with("en_") || lang.starts_with("en-");
}

[[nodiscard]] inline std::string answer_normalize(std::string_view s, std::string_view lang) {
    return text::normalize(s, {.strip_english_articles = is_english(lang)});
}

}  // namespace detail

[[nodiscard]] inline MetricValues mrr_at_k(const Run& run, const Judgments& judgments, std::size_t k) {
    std::map<std::string, std::vector<double>> by_lang;
    detail::for_each_first_relevant(run, judgments, k, [&](const std::string& lang, std::size_t first) {
        by_lang[lang].push_back(first == 0 ? 0.0 : 1.0 / static_cast<double>(first));
    });
    return detail::aggregate(by_lang);
}

[[nodiscard]] inline MetricValues recall_at_k(const Run& run, const Judgments& judgments, std::size_t k) {
    std::map<std::string, std::vector<double>> by_lang;
    detail::for_each_first_relevant(run, judgments, k, [&](const std::string& lang, std::size_t first) {
        by_lang[lang].push_back(first == 0 ? 0.0 : 1.0);
    });
    return detail::aggregate(by_lang);
}

[[nodiscard]] inline EvalReport evaluate_retrieval(const Run& run, const Judgments& judgments, std::size_t k) {
    EvalReport report;
    report.k = k;
    report.metrics["MRR@" + std::to_string(k)] = mrr_at_k(run, judgments, k);
    report.metrics["Recall@" + std::to_string(k)] = recall_at_k(run, judgments, k);
    for (const auto& [_, lang] : judgments.queries()) {
        ++report.query_counts[lang];
    }
    return report;
}

/// 1 iff the normalized prediction equals some normalized gold. English
/// articles are stripped for English only.
[[nodiscard]] inline int exact_match(std::string_view prediction, const std::vector<std::string>& golds,
                                     std::string_view lang) {
    const auto pred = detail::answer_normalize(prediction, lang);
    for (const auto& g : golds) {
        if (detail::answer_normalize(g, lang) == pred) {
            return 1;
        }
    }
    return 0;
}

/// Max over golds of the F1 of clipped token overlap.
[[nodiscard]] inline double token_f1(std::string_view prediction, const std::vector<std::string>& golds,
                                     std::string_view lang, const text::TokenizerConfig& tokenizer = {}) {
    const auto mode = text::token_mode(lang, tokenizer);
    const auto pred = text::tokenize_with(detail::answer_normalize(prediction, lang), mode);
    std::unordered_map<std::string, int> pred_counts;
    for (const auto& t : pred) {
        ++pred_counts[t];
    }
    double best = 0.0;
    for (const auto& g : golds) {
        const auto gold = text::tokenize_with(detail::answer_normalize(g, lang), mode);
        double f1 = 0.0;
        if (pred.empty() || gold.empty()) {
            f1 = pred.empty() && gold.empty() ? 1.0 : 0.0;
        } else {
            auto remaining = pred_counts;
            std::size_t common = 0;
            for (const auto& t : gold) {
                auto it = remaining.find(t);
                if (it != remaining.end() && it->second > 0) {
                    --it->second;
                    ++common;
                }
            }
            if (common > 0) {
                const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
                const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
                f1 = 2.0 * precision * recall / (precision + recall);
            }
        }
        best = std::max(best, f1);
    }
    return best;
}

/// Scores `{"query_id", "prediction"}` lines against each gold query's
/// in-language answers.
[[nodiscard]] inline EvalReport evaluate_predictions(std::istream& predictions, const QuerySet& gold,
                                                     const text::TokenizerConfig& tokenizer = {}) {
    std::unordered_map<std::string, std::string> preds;
    std::vector<std::string> unknown;
    detail::for_each_line(predictions, [&](const std::string& line, std::size_t line_no) {
        const auto j = detail::parse_record(line, line_no);
        auto id = detail::required_string(j, "query_id", line_no);
        auto prediction = detail::required_string(j, "prediction", line_no);
        if (gold.find(id) == nullptr) {
            unknown.push_back(id);
            return;
        }
        if (!preds.emplace(id, std::move(prediction)).second) {
            throw Error(ErrorKind::duplicate_id,
                        "line " + std::to_string(line_no) + ": duplicate prediction for \"" + id + "\"");
        }
    });
    if (!unknown.empty()) {
        std::string msg = "predictions for unknown query ids:";
        for (const auto& id : unknown) {
            msg += " " + id;
        }
        throw Error(ErrorKind::not_found, msg);
    }
    std::vector<std::string> missing;
    for (const auto& q : gold) {
        if (!preds.contains(q.id)) {
            missing.push_back(q.id);
        }
    }
    if (!missing.empty()) {
        std::string msg = "missing predictions for query ids:";
        for (const auto& id : missing) {
            msg += " " + id;
        }
        throw Error(ErrorKind::mismatch, msg);
    }

    std::map<std::string, std::vector<double>> em;
    std::map<std::string, std::vector<double>> f1;
    EvalReport report;
    for (const auto& q : gold) {
        const auto& p = preds.at(q.id);
        em[q.lang].push_back(exact_match(p, q.answers, q.lang));
        f1[q.lang].push_back(token_f1(p, q.answers, q.lang, tokenizer));
        ++report.query_counts[q.lang];
    }
    report.metrics["EM"] = detail::aggregate(em);
    report.metrics["F1"] = detail::aggregate(f1);
    return report;
}

[[nodiscard]] inline nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& [name, values] : report.metrics) {
        metrics[name] = {{"per_lang", values.per_lang}, {"macro", values.macro}};
    }
    nlohmann::json j = {{"metrics", std::move(metrics)}, {"query_counts", report.query_counts}};
    if (report.k) {
        j["k"] = *report.k;
    }
    return j;
}

/// One line per (metric, language), plus a "macro" line per metric.
inline void write_report_jsonl(std::ostream& out, const EvalReport& report) {
    for (const auto& [name, values] : report.metrics) {
        for (const auto& [lang, v] : values.per_lang) {
            out << nlohmann::json{{"metric", name}, {"lang", lang}, {"value", v},
                                  {"queries", report.query_counts.count(lang) ? report.query_counts.at(lang) : 0}}
                       .dump()
                << '\n';
        }
        out << nlohmann::json{{"metric", name}, {"lang", "macro"}, {"value", values.macro}}.dump() << '\n';
    }
}

/// Fixed-width text table: languages as rows, metrics as columns.
[[nodiscard]] inline std::string format_report_table(const EvalReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "lang" << std::right << std::setw(8) << "queries";
    for (const auto& [name, _] : report.metrics) {
        out << std::setw(12) << name;
    }
    out << '\n' << std::fixed << std::setprecision(4);
    for (const auto& [lang, n] : report.query_counts) {
        out << std::left << std::setw(10) << lang << std::right << std::setw(8) << n;
        for (const auto& [_, values] : report.metrics) {
            const auto it = values.per_lang.find(lang);
            out << std::setw(12) << (it == values.per_lang.end() ? 0.0 : it->second);
        }
        out << '\n';
    }
    std::size_t total = 0;
    for (const auto& [_, n] : report.query_counts) {
        total += n;
    }
    out << std::left << std::setw(10) << "macro" << std::right << std::setw(8) << total;
    for (const auto& [_, values] : report.metrics) {
        out << std::setw(12) << values.macro;
    }
    out << '\n';
    return out.str();
}

}  // namespace hybrid
