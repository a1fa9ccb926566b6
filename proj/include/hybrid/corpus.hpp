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

/// \file corpus.hpp
/// Passage collections and query sets read from line-delimited JSON.
///
/// Passage record: {"id", "title", "text", "lang"}
/// Query record:   {"id", "question", "lang", "answers"?, "answers_en"?}

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hybrid/error.hpp"

namespace hybrid {

struct Passage {
    std::string id;
    std::string title;
    std::string text;
    std::string lang;

    bool operator==(const Passage&) const = default;
};

struct Query {
    std::string id;
    std::string question;
    std::string lang;
    std::vector<std::string> answers;
    std::optional<std::vector<std::string>> answers_en;

    /// answers followed by answers_en, first occurrence wins.
    [[nodiscard]] std::vector<std::string> answer_universe() const {
        std::vector<std::string> out;
        std::unordered_set<std::string_view> seen;
        auto add = [&](const std::vector<std::string>& list) {
            for (const auto& a : list) {
                if (seen.insert(a).second) {
                    out.push_back(a);
                }
            }
        };
        add(answers);
        if (answers_en) {
            add(*answers_en);
        }
        return out;
    }

    bool operator==(const Query&) const = default;
};

struct CorpusStats {
    std::map<std::string, std::size_t> counts;
    std::map<std::string, double> fractions;
    std::size_t total = 0;
};

namespace detail {

[[nodiscard]] inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

[[nodiscard]] inline bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

[[nodiscard]] inline nlohmann::json parse_record(const std::string& line, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ParseError(line_no, "record is not a JSON object");
    }
    return j;
}

[[nodiscard]] inline std::string required_string(const nlohmann::json& j, std::string_view field,
                                                 std::size_t line_no) {
    const auto it = j.find(field);
    if (it == j.end()) {
        throw ParseError(line_no, "missing field \"" + std::string(field) + "\"");
    }
    if (!it->is_string()) {
        throw ParseError(line_no, "field \"" + std::string(field) + "\" is not a string");
    }
    return it->get<std::string>();
}

[[nodiscard]] inline std::optional<std::vector<std::string>> optional_string_list(
    const nlohmann::json& j, std::string_view field, std::size_t line_no) {
    const auto it = j.find(field);
    if (it == j.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_array()) {
        throw ParseError(line_no, "field \"" + std::string(field) + "\" is not a list");
    }
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) {
            throw ParseError(line_no, "field \"" + std::string(field) + "\" contains a non-string");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (is_blank(line)) {
            continue;
        }
        fn(line, line_no);
    }
}

}  // namespace detail

/// Immutable passage collection grouped by language.
class Corpus {
  public:
    Corpus() = default;

    /// Validates ids and builds the language grouping. Passages keep their
    /// input order.
    explicit Corpus(std::vector<Passage> passages, std::vector<std::string> warnings = {})
        : passages_(std::move(passages)), warnings_(std::move(warnings)) {
        by_id_.reserve(passages_.size());
        for (std::size_t i = 0; i < passages_.size(); ++i) {
            const auto& p = passages_[i];
            if (p.id.empty()) {
                throw Error(ErrorKind::invalid_argument, "passage with empty id");
            }
            if (p.lang.empty()) {
                throw Error(ErrorKind::invalid_argument, "passage " + p.id + " has empty lang");
            }
            if (!by_id_.emplace(p.id, i).second) {
                throw Error(ErrorKind::duplicate_id, "duplicate passage id \"" + p.id + "\"");
            }
            by_lang_[p.lang].push_back(i);
        }
    }

    [[nodiscard]] std::span<const Passage> passages() const noexcept { return passages_; }
    [[nodiscard]] std::size_t size() const noexcept { return passages_.size(); }
    [[nodiscard]] bool empty() const noexcept { return passages_.empty(); }

    /// Ingestion notes such as passages with empty text.
    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    [[nodiscard]] std::vector<std::string> languages() const {
        std::vector<std::string> out;
        out.reserve(by_lang_.size());
        for (const auto& [lang, _] : by_lang_) {
            out.push_back(lang);
        }
        return out;
    }

    [[nodiscard]] std::vector<const Passage*> passages_in(std::string_view lang) const {
        std::vector<const Passage*> out;
        const auto it = by_lang_.find(std::string(lang));
        if (it == by_lang_.end()) {
            return out;
        }
        out.reserve(it->second.size());
        for (auto i : it->second) {
            out.push_back(&passages_[i]);
        }
        return out;
    }

    [[nodiscard]] const Passage* find(std::string_view id) const {
        const auto it = by_id_.find(std::string(id));
        return it == by_id_.end() ? nullptr : &passages_[it->second];
    }

    [[nodiscard]] const Passage& at(std::string_view id) const {
        const auto* p = find(id);
        if (p == nullptr) {
            throw Error(ErrorKind::not_found, "unknown passage id \"" + std::string(id) + "\"");
        }
        return *p;
    }

  private:
    std::vector<Passage> passages_;
    std::vector<std::string> warnings_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::map<std::string, std::vector<std::size_t>> by_lang_;
};

[[nodiscard]] inline CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    for (const auto& lang : corpus.languages()) {
        stats.counts[lang] = corpus.passages_in(lang).size();
    }
    stats.total = corpus.size();
    for (const auto& [lang, n] : stats.counts) {
        stats.fractions[lang] = static_cast<double>(n) / static_cast<double>(stats.total);
    }
    return stats;
}

/// Reads one JSON passage record per line. Blank lines are skipped.
[[nodiscard]] inline Corpus ingest_passages(std::istream& in) {
    std::vector<Passage> passages;
    std::vector<std::string> warnings;
    std::unordered_set<std::string> ids;
    detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
        const auto j = detail::parse_record(line, line_no);
        Passage p{
            .id = detail::required_string(j, "id", line_no),
            .title = detail::required_string(j, "title", line_no),
            .text = detail::required_string(j, "text", line_no),
            .lang = detail::ascii_lower(detail::required_string(j, "lang", line_no)),
        };
        if (p.id.empty()) {
            throw ParseError(line_no, "empty id");
        }
        if (p.lang.empty()) {
            throw ParseError(line_no, "empty lang");
        }
        if (!ids.insert(p.id).second) {
            throw Error(ErrorKind::duplicate_id,
                        "line " + std::to_string(line_no) + ": duplicate passage id \"" + p.id + "\"");
        }
        if (p.text.empty()) {
            warnings.push_back("line " + std::to_string(line_no) + ": passage \"" + p.id + "\" has empty text");
        }
        passages.push_back(std::move(p));
    });
    return Corpus(std::move(passages), std::move(warnings));
}

/// Reads DPR-style tab-separated `id<TAB>text<TAB>title` rows, all tagged
/// with `lang`. A leading `id text title` header row is skipped.
[[nodiscard]] inline Corpus ingest_passages_tsv(std::istream& in, std::string_view lang) {
    const std::string code = detail::ascii_lower(lang);
    if (code.empty()) {
        throw Error(ErrorKind::invalid_argument, "TSV ingestion requires a language code");
    }
    std::vector<Passage> passages;
    std::vector<std::string> warnings;
    std::unordered_set<std::string> ids;
    bool first = true;
    detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
        std::vector<std::string> cols;
        std::size_t pos = 0;
        while (true) {
            const auto tab = line.find('\t', pos);
            cols.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
            if (tab == std::string::npos) {
                break;
            }
            pos = tab + 1;
        }
        if (std::exchange(first, false) && cols.size() == 3 && cols[0] == "id" && cols[1] == "text" &&
            cols[2] == "title") {
            return;
        }
        if (cols.size() != 3) {
            throw ParseError(line_no, "expected 3 tab-separated columns, got " + std::to_string(cols.size()));
        }
        Passage p{.id = cols[0], .title = cols[2], .text = cols[1], .lang = code};
        if (p.id.empty()) {
            throw ParseError(line_no, "empty id");
        }
        if (!ids.insert(p.id).second) {
            throw Error(ErrorKind::duplicate_id,
                        "line " + std::to_string(line_no) + ": duplicate passage id \"" + p.id + "\"");
        }
        if (p.text.empty()) {
            warnings.push_back("line " + std::to_string(line_no) + ": passage \"" + p.id + "\" has empty text");
        }
        passages.push_back(std::move(p));
    });
    return Corpus(std::move(passages), std::move(warnings));
}

/// Concatenates corpora (e.g. one TSV file per language).
[[nodiscard]] inline Corpus merge_corpora(std::span<const Corpus> parts) {
    std::vector<Passage> all;
    std::vector<std::string> warnings;
    for (const auto& c : parts) {
        all.insert(all.end(), c.passages().begin(), c.passages().end());
        warnings.insert(warnings.end(), c.warnings().begin(), c.warnings().end());
    }
    return Corpus(std::move(all), std::move(warnings));
}

[[nodiscard]] inline nlohmann::json to_json(const Passage& p) {
    return {{"id", p.id}, {"title", p.title}, {"text", p.text}, {"lang", p.lang}};
}

[[nodiscard]] inline nlohmann::json to_json(const Query& q) {
    nlohmann::json j = {{"id", q.id}, {"question", q.question}, {"lang", q.lang}, {"answers", q.answers}};
    if (q.answers_en) {
        j["answers_en"] = *q.answers_en;
    }
    return j;
}

inline void write_passages(std::ostream& out, const Corpus& corpus) {
    for (const auto& p : corpus.passages()) {
        out << to_json(p).dump() << '\n';
    }
}

/// Query set in input order.
class QuerySet {
  public:
    QuerySet() = default;

    explicit QuerySet(std::vector<Query> queries) : queries_(std::move(queries)) {
        for (std::size_t i = 0; i < queries_.size(); ++i) {
            if (queries_[i].id.empty()) {
                throw Error(ErrorKind::invalid_argument, "query with empty id");
            }
            if (queries_[i].lang.empty()) {
                throw Error(ErrorKind::invalid_argument, "query " + queries_[i].id + " has empty lang");
            }
            if (!by_id_.emplace(queries_[i].id, i).second) {
                throw Error(ErrorKind::duplicate_id, "duplicate query id \"" + queries_[i].id + "\"");
            }
        }
    }

    [[nodiscard]] std::span<const Query> queries() const noexcept { return queries_; }
    [[nodiscard]] std::size_t size() const noexcept { return queries_.size(); }
    [[nodiscard]] auto begin() const noexcept { return queries_.begin(); }
    [[nodiscard]] auto end() const noexcept { return queries_.end(); }

    [[nodiscard]] const Query* find(std::string_view id) const {
        const auto it = by_id_.find(std::string(id));
        return it == by_id_.end() ? nullptr : &queries_[it->second];
    }

  private:
    std::vector<Query> queries_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

[[nodiscard]] inline QuerySet ingest_queries(std::istream& in) {
    std::vector<Query> queries;
    std::unordered_set<std::string> ids;
    detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
        const auto j = detail::parse_record(line, line_no);
        Query q{
            .id = detail::required_string(j, "id", line_no),
            .question = detail::required_string(j, "question", line_no),
            .lang = detail::ascii_lower(detail::required_string(j, "lang", line_no)),
            .answers = detail::optional_string_list(j, "answers", line_no).value_or(std::vector<std::string>{}),
            .answers_en = detail::optional_string_list(j, "answers_en", line_no),
        };
        if (q.id.empty()) {
            throw ParseError(line_no, "empty id");
        }
        if (q.lang.empty()) {
            throw ParseError(line_no, "empty lang");
        }
        if (!ids.insert(q.id).second) {
            throw Error(ErrorKind::duplicate_id,
                        "line " + std::to_string(line_no) + ": duplicate query id \"" + q.id + "\"");
        }
        queries.push_back(std::move(q));
    });
    return QuerySet(std::move(queries));
}

inline void write_queries(std::ostream& out, const QuerySet& queries) {
    for (const auto& q : queries) {
        out << to_json(q).dump() << '\n';
    }
}

}  // namespace hybrid
