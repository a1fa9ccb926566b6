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

/// \file run.hpp
/// Run files: one `{"query_id", "hits": [{"docid", "score", "source", "lang"}]}`
/// record per line, in query order.

#include <istream>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "hybrid/corpus.hpp"
#include "hybrid/hit.hpp"

namespace hybrid {

struct RunEntry {
    std::string query_id;
    RankedList hits;

    bool operator==(const RunEntry&) const = default;
};

using Run = std::vector<RunEntry>;

[[nodiscard]] inline nlohmann::json to_json(const Hit& h) {
    return {{"docid", h.docid}, {"score", h.score}, {"source", to_string(h.source)}, {"lang", h.lang}};
}

[[nodiscard]] inline nlohmann::json to_json(const RunEntry& e) {
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : e.hits) {
        hits.push_back(to_json(h));
    }
    return {{"query_id", e.query_id}, {"hits", std::move(hits)}};
}

inline void write_run(std::ostream& out, const Run& run) {
    for (const auto& e : run) {
        out << to_json(e).dump() << '\n';
    }
}

[[nodiscard]] inline Run read_run(std::istream& in) {
    Run run;
    std::unordered_set<std::string> seen;
    detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
        const auto j = detail::parse_record(line, line_no);
        RunEntry entry{.query_id = detail::required_string(j, "query_id", line_no), .hits = {}};
        if (!seen.insert(entry.query_id).second) {
            throw Error(ErrorKind::duplicate_id,
                        "line " + std::to_string(line_no) + ": duplicate query id \"" + entry.query_id + "\"");
        }
        const auto it = j.find("hits");
        if (it == j.end() || !it->is_array()) {
            throw ParseError(line_no, "missing or non-list field \"hits\"");
        }
        for (const auto& h : *it) {
            if (!h.is_object()) {
                throw ParseError(line_no, "hit is not an object");
            }
            const auto score = h.find("score");
            if (score == h.end() || !score->is_number()) {
                throw ParseError(line_no, "hit missing numeric \"score\"");
            }
            try {
                entry.hits.push_back(Hit{
                    .docid = detail::required_string(h, "docid", line_no),
                    .score = score->get<double>(),
                    .source = parse_source(detail::required_string(h, "source", line_no)),
                    .lang = detail::required_string(h, "lang", line_no),
                });
            } catch (const ParseError&) {
                throw;
            } catch (const Error& e) {
                throw ParseError(line_no, e.what());
            }
        }
        run.push_back(std::move(entry));
    });
    return run;
}

}  // namespace hybrid
