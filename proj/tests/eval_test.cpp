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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "hybrid/eval.hpp"

namespace hybrid {
namespace {

Query query(std::string id, std::string lang, std::vector<std::string> answers,
            std::optional<std::vector<std::string>> answers_en = std::nullopt) {
    return Query{std::move(id), "question", std::move(lang), std::move(answers), std::move(answers_en)};
}

Passage passage(std::string id, std::string text) { return Passage{std::move(id), "", std::move(text), "en"}; }

TEST(JudgeRelevant, Examples) {
    EXPECT_TRUE(judge_relevant(query("q", "en", {"Obama"}), passage("p", "In 2008 Barack Obama was elected.")));
    EXPECT_TRUE(judge_relevant(query("q", "en", {"U.S."}), passage("p", "the u s economy")));
    EXPECT_FALSE(judge_relevant(query("q", "en", {"Paris"}), passage("p", "a report on the city of Lyon")));
    EXPECT_FALSE(judge_relevant(query("q", "en", {}), passage("p", "anything")));
    EXPECT_FALSE(judge_relevant(query("q", "en", {"?!", ""}), passage("p", "anything ?!")));
}

TEST(JudgeRelevant, PlainSubstringAcrossWordBoundaries) {
    // Substring matching is not token aligned.
    EXPECT_TRUE(judge_relevant(query("q", "en", {"Paris"}), passage("p", "a comparison of method")));
}

TEST(JudgeRelevant, UsesEnglishAnswersToo) {
    const auto q = query("q", "fi", {"Yhdysvallat"}, std::vector<std::string>{"United States"});
    EXPECT_TRUE(judge_relevant(q, passage("p", "The United States is ...")));
    EXPECT_TRUE(judge_relevant(q, passage("p", "yhdysvallat on")));
}

TEST(JudgeRelevant, InvariantUnderCaseAndPunctuation) {
    const auto q = query("q", "en", {"new york"});
    EXPECT_TRUE(judge_relevant(q, passage("p", "...NEW-YORK!!")));
    EXPECT_TRUE(judge_relevant(q, passage("p", "New---York")));
    EXPECT_EQ(judge_relevant(q, passage("p", "new yorkshire")), judge_relevant(q, passage("p", "NEW, YORKSHIRE")));
}

// Builds judgments directly: rank r (1-based) of each query is relevant.
Judgments judged(const hybrid::Run& run, const std::map<std::string, std::pair<std::string, std::size_t>>& first_relevant) {
    Judgments j;
    for (const auto& [qid, lr] : first_relevant) j.add_query(qid, lr.first);
    for (const auto& e : run) {
        const auto& [lang, rank] = first_relevant.at(e.query_id);
        for (std::size_t i = 0; i < e.hits.size(); ++i) {
            j.add({e.query_id, e.hits[i].docid, rank != 0 && i + 1 == rank});
        }
    }
    return j;
}

RunEntry entry(std::string qid, std::size_t n) {
    RunEntry e{std::move(qid), {}};
    for (std::size_t i = 0; i < n; ++i) e.hits.push_back({e.query_id + "_h" + std::to_string(i), 1.0, Source::dense, "en"});
    return e;
}

TEST(RetrievalMetrics, MrrFixture) {
    const hybrid::Run run{entry("q1", 5), entry("q2", 5), entry("q3", 5)};
    const auto j = judged(run, {{"q1", {"en", 1}}, {"q2", {"en", 2}}, {"q3", {"en", 0}}});
    EXPECT_NEAR(mrr_at_k(run, j, 5).per_lang.at("en"), 0.5, 1e-12);
    EXPECT_NEAR(mrr_at_k(run, j, 5).macro, 0.5, 1e-12);
    EXPECT_NEAR(recall_at_k(run, j, 5).per_lang.at("en"), 2.0 / 3.0, 1e-12);
}

TEST(RetrievalMetrics, SingleQueryValues) {
    const hybrid::Run run{entry("q", 5)};
    EXPECT_NEAR(mrr_at_k(run, judged(run, {{"q", {"en", 3}}}), 5).macro, 1.0 / 3.0, 1e-12);
    EXPECT_EQ(mrr_at_k(run, judged(run, {{"q", {"en", 0}}}), 5).macro, 0.0);
}

TEST(RetrievalMetrics, RecallCutoffIsInclusive) {
    const hybrid::Run run{entry("q", 6)};
    EXPECT_EQ(recall_at_k(run, judged(run, {{"q", {"en", 5}}}), 5).macro, 1.0);
    EXPECT_EQ(recall_at_k(run, judged(run, {{"q", {"en", 6}}}), 5).macro, 0.0);
    const hybrid::Run three{entry("a", 6), entry("b", 6), entry("c", 6)};
    EXPECT_NEAR(recall_at_k(three, judged(three, {{"a", {"en", 1}}, {"b", {"en", 0}}, {"c", {"en", 5}}}), 5).macro,
                2.0 / 3.0, 1e-12);
}

TEST(RetrievalMetrics, Errors) {
    const hybrid::Run run{entry("q", 2)};
    Judgments empty;
    EXPECT_THROW((void)mrr_at_k(run, empty, 5), Error);
    EXPECT_THROW((void)recall_at_k(run, judged(run, {{"q", {"en", 1}}}), 0), Error);
}

TEST(RetrievalMetrics, MissingRunEntryScoresZero) {
    const hybrid::Run run{entry("a", 3)};
    auto j = judged(run, {{"a", {"en", 1}}});
    j.add_query("b", "en");
    EXPECT_NEAR(mrr_at_k(run, j, 3).macro, 0.5, 1e-12);
}

TEST(RetrievalMetrics, RandomizedProperties) {
    std::mt19937_64 rng(64);
    for (int trial = 0; trial < 300; ++trial) {
        hybrid::Run run;
        std::map<std::string, std::pair<std::string, std::size_t>> first;
        const std::size_t n = 1 + rng() % 20;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string qid = "q" + std::to_string(i);
            run.push_back(entry(qid, rng() % 15));
            const std::string lang = (rng() % 3 == 0) ? "bn" : (rng() % 2 ? "fi" : "ja");
            first[qid] = {lang, run.back().hits.empty() ? 0 : rng() % (run.back().hits.size() + 1)};
        }
        const auto j = judged(run, first);
        double prev_mrr = -1, prev_rec = -1;
        for (std::size_t k = 1; k <= 16; ++k) {
            const auto m = mrr_at_k(run, j, k);
            const auto r = recall_at_k(run, j, k);
            EXPECT_LE(0.0, m.macro);
            EXPECT_LE(m.macro, r.macro + 1e-12);
            EXPECT_LE(r.macro, 1.0);
            for (const auto& [lang, v] : m.per_lang) EXPECT_LE(v, r.per_lang.at(lang) + 1e-12);
            EXPECT_GE(m.macro, prev_mrr - 1e-12);
            EXPECT_GE(r.macro, prev_rec - 1e-12);
            prev_mrr = m.macro;
            prev_rec = r.macro;
            double mean = 0;
            for (const auto& [_, v] : r.per_lang) mean += v;
            EXPECT_NEAR(r.macro, mean / static_cast<double>(r.per_lang.size()), 1e-9);
        }
    }
}

TEST(JudgeRun, ChecksCorpusAndQueries) {
    const Corpus corpus({passage("p1", "Obama spoke"), passage("p2", "nothing")});
    const QuerySet qs({query("q1", "en", {"obama"})});
    const hybrid::Run run{{"q1", {{"p2", 2.0, Source::dense, "en"}, {"p1", 1.0, Source::dense, "en"}}}};
    const auto j = judge_run(run, qs, corpus);
    ASSERT_EQ(j.records().size(), 2u);
    EXPECT_FALSE(j.records()[0].relevant);
    EXPECT_TRUE(j.records()[1].relevant);
    EXPECT_NEAR(mrr_at_k(run, j, 10).macro, 0.5, 1e-12);

    const hybrid::Run bad_doc{{"q1", {{"p9", 2.0, Source::dense, "en"}}}};
    EXPECT_THROW((void)judge_run(bad_doc, qs, corpus), Error);
    const hybrid::Run bad_query{{"q9", {}}};
    EXPECT_THROW((void)judge_run(bad_query, qs, corpus), Error);
}

TEST(ExactMatch, Examples) {
    EXPECT_EQ(exact_match("The Beatles", {"beatles"}, "en"), 1);
    EXPECT_EQ(exact_match("beatle", {"beatles"}, "en"), 0);
    EXPECT_EQ(exact_match("", {""}, "fi"), 1);
    EXPECT_EQ(exact_match("x", {}, "en"), 0);
    // Articles are only stripped for English.
    EXPECT_EQ(exact_match("the beatles", {"beatles"}, "fi"), 0);
}

TEST(TokenF1, Examples) {
    EXPECT_NEAR(token_f1("barack obama", {"obama"}, "en"), 2.0 / 3.0, 1e-9);
    EXPECT_EQ(token_f1("Barack Obama", {"barack obama"}, "en"), 1.0);
    EXPECT_NEAR(token_f1("東京", {"東京都"}, "ja"), 0.8, 1e-9);
    EXPECT_EQ(token_f1("", {""}, "en"), 1.0);
    EXPECT_EQ(token_f1("", {"x"}, "en"), 0.0);
    EXPECT_EQ(token_f1("x", {""}, "en"), 0.0);
    EXPECT_EQ(token_f1("x", {}, "en"), 0.0);
    // clipped overlap: "a a" style repetition counts min(count)
    EXPECT_NEAR(token_f1("go go go", {"go"}, "fi"), 0.5, 1e-12);
    // max over golds
    EXPECT_EQ(token_f1("paris", {"lyon", "paris"}, "en"), 1.0);
}

TEST(AnswerMetrics, ExactMatchImpliesFullF1) {
    const std::vector<std::string> pool = {"The", "Beatles", "an", "U.S.", "東京", "a", "x", "", "!", "Obama"};
    std::mt19937_64 rng(11);
    auto phrase = [&] {
        std::string s;
        for (std::size_t i = 0, n = rng() % 4; i < n; ++i) s += pool[rng() % pool.size()] + " ";
        return s;
    };
    for (int i = 0; i < 2000; ++i) {
        const auto pred = phrase();
        const std::vector<std::string> golds{phrase(), phrase()};
        for (const auto* lang : {"en", "ja", "fi"}) {
            if (exact_match(pred, golds, lang) == 1) {
                EXPECT_EQ(token_f1(pred, golds, lang), 1.0) << pred;
            }
            const double f = token_f1(pred, golds, lang);
            EXPECT_GE(f, 0.0);
            EXPECT_LE(f, 1.0);
        }
    }
}

QuerySet six_queries() {
    return QuerySet({query("e1", "en", {"The Beatles"}), query("e2", "en", {"barack obama"}),
                     query("e3", "en", {"Paris", "City of Light"}), query("j1", "ja", {"東京都"}),
                     query("j2", "ja", {"富士山"}), query("j3", "ja", {"京都"})});
}

TEST(EvaluatePredictions, BilingualFixture) {
    std::istringstream preds(R"({"query_id":"e1","prediction":"beatles"}
{"query_id":"e2","prediction":"obama"}
{"query_id":"e3","prediction":"london"}
{"query_id":"j1","prediction":"東京"}
{"query_id":"j2","prediction":"富士山"}
{"query_id":"j3","prediction":"大阪"}
)");
    const auto r = evaluate_predictions(preds, six_queries());
    // en: EM {1,0,0}, F1 {1, 2/3, 0}; ja: EM {0,1,0}, F1 {0.8, 1, 0}
    EXPECT_NEAR(r.metrics.at("EM").per_lang.at("en"), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.metrics.at("EM").per_lang.at("ja"), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.metrics.at("F1").per_lang.at("en"), (1.0 + 2.0 / 3.0) / 3.0, 1e-12);
    EXPECT_NEAR(r.metrics.at("F1").per_lang.at("ja"), 1.8 / 3.0, 1e-12);
    EXPECT_NEAR(r.metrics.at("F1").macro, ((1.0 + 2.0 / 3.0) / 3.0 + 0.6) / 2.0, 1e-12);
    EXPECT_EQ(r.query_counts.at("en"), 3u);
}

TEST(EvaluatePredictions, PerfectPredictions) {
    std::ostringstream lines;
    for (const auto& q : six_queries()) {
        lines << nlohmann::json{{"query_id", q.id}, {"prediction", q.answers.front()}}.dump() << '\n';
    }
    std::istringstream in(lines.str());
    const auto r = evaluate_predictions(in, six_queries());
    for (const auto* m : {"EM", "F1"}) {
        EXPECT_EQ(r.metrics.at(m).macro, 1.0);
        for (const auto& [_, v] : r.metrics.at(m).per_lang) EXPECT_EQ(v, 1.0);
    }
}

TEST(EvaluatePredictions, MacroIsMeanOfLanguages) {
    // en: pred "x" vs 9 gold tokens -> P=1, R=1/9, F1=0.2
    // fi: pred "x q q" vs "x y"     -> P=1/3, R=1/2, F1=0.4
    const QuerySet qs2({query("a", "en", {"x b c d e f g h i"}), query("b", "fi", {"x y"})});
    std::istringstream in(R"({"query_id":"a","prediction":"x"}
{"query_id":"b","prediction":"x q q"})");
    const auto r = evaluate_predictions(in, qs2);
    EXPECT_NEAR(r.metrics.at("F1").per_lang.at("en"), 0.2, 1e-12);
    EXPECT_NEAR(r.metrics.at("F1").per_lang.at("fi"), 0.4, 1e-12);
    EXPECT_NEAR(r.metrics.at("F1").macro, 0.3, 1e-9);
}

TEST(EvaluatePredictions, Errors) {
    std::istringstream missing(R"({"query_id":"e1","prediction":"x"})");
    try {
        (void)evaluate_predictions(missing, six_queries());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::mismatch);
        EXPECT_NE(std::string(e.what()).find("j3"), std::string::npos);
    }
    std::istringstream unknown(R"({"query_id":"zz","prediction":"x"})");
    EXPECT_THROW((void)evaluate_predictions(unknown, six_queries()), Error);
}

TEST(Report, Formats) {
    EvalReport r;
    r.k = 10;
    r.metrics["MRR@10"] = {{{"bn", 0.25}, {"fi", 0.75}}, 0.5};
    r.query_counts = {{"bn", 2}, {"fi", 4}};
    const auto j = to_json(r);
    EXPECT_EQ(j["k"], 10);
    EXPECT_EQ(j["metrics"]["MRR@10"]["macro"], 0.5);
    std::ostringstream lines;
    write_report_jsonl(lines, r);
    EXPECT_EQ(lines.str(),
              "{\"lang\":\"bn\",\"metric\":\"MRR@10\",\"queries\":2,\"value\":0.25}\n"
              "{\"lang\":\"fi\",\"metric\":\"MRR@10\",\"queries\":4,\"value\":0.75}\n"
              "{\"lang\":\"macro\",\"metric\":\"MRR@10\",\"value\":0.5}\n");
    const auto table = format_report_table(r);
    EXPECT_NE(table.find("macro"), std::string::npos);
    EXPECT_NE(table.find("0.7500"), std::string::npos);
}

}  // namespace
}  // namespace hybrid
