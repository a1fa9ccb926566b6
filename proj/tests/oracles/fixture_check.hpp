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

#include <algorithm>
#include <string>
#include <vector>

#include "hybrid/dense.hpp"
#include "hybrid/eval.hpp"
#include "hybrid/text.hpp"
#include "oracles/bm25_oracle.hpp"
#include "oracles/hybrid_fixture.hpp"

namespace hybrid::testing {

struct FixtureVerdict {
    std::string query_id;
    std::size_t relevant_passages = 0;
    bool dense_top10 = false;
    bool sparse_top10 = false;
    bool sparse_in_budget = false;
    bool ok = false;
};

/// Brute-force reachability of each fixture answer, independent of the indexes.
inline std::vector<FixtureVerdict> verify_fixture(std::size_t k = 10, std::size_t budget = 2) {
    const auto passages = fixture_passages();
    std::vector<FixtureVerdict> out;
    for (const auto& fq : fixture_queries()) {
        FixtureVerdict v;
        v.query_id = fq.query.id;
        for (const auto& p : passages) v.relevant_passages += judge_relevant(fq.query, p);

        const auto qv = hash_embed(fq.query.question, fq.query.lang, fixture_dim, fixture_seed);
        std::vector<std::pair<double, std::string>> dense;
        for (const auto& p : passages) {
            const auto pv = hash_embed(p.title + " " + p.text, p.lang, fixture_dim, fixture_seed);
            double s = 0;
            for (std::size_t i = 0; i < qv.size(); ++i) s += static_cast<double>(static_cast<float>(pv[i])) * qv[i];
            dense.emplace_back(-s, p.id);
        }
        std::sort(dense.begin(), dense.end());
        for (std::size_t i = 0; i < std::min(k, dense.size()); ++i) v.dense_top10 |= dense[i].second == fq.answer_doc;

        Bm25Oracle oracle;
        for (const auto& p : passages) {
            if (p.lang == fq.query.lang) oracle.docs.push_back({p.id, split_ws(text::normalize(p.title + " " + p.text))});
        }
        const auto ranking = oracle.rank(split_ws(text::normalize(fq.query.question)));
        for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
            if (ranking[i].first == fq.answer_doc) {
                v.sparse_top10 = true;
                v.sparse_in_budget = i < budget;
            }
        }

        switch (fq.reach) {
        case Reach::sparse_only: v.ok = v.sparse_in_budget && !v.dense_top10; break;
        case Reach::dense_only: v.ok = v.dense_top10 && !v.sparse_top10; break;
        case Reach::both: v.ok = v.dense_top10 && v.sparse_top10; break;
        }
        v.ok &= v.relevant_passages == 1;
        out.push_back(v);
    }
    return out;
}

}  // namespace hybrid::testing
