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
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "hybrid/error.hpp"

namespace hybrid {

enum class Source { dense, sparse, fused };

[[nodiscard]] constexpr std::string_view to_string(Source s) noexcept {
    switch (s) {
    case Source::dense: return "dense";
    case Source::sparse: return "sparse";
    case Source::fused: return "fused";
    }
    return "unknown";
}

[[nodiscard]] inline Source parse_source(std::string_view s) {
    if (s == "dense") return Source::dense;
    if (s == "sparse") return Source::sparse;
    if (s == "fused") return Source::fused;
    throw Error(ErrorKind::invalid_argument, "unknown hit source \"" + std::string(s) + "\"");
}

struct Hit {
    std::string docid;
    double score = 0.0;
    Source source = Source::dense;
    std::string lang;

    bool operator==(const Hit&) const = default;
};

using RankedList = std::vector<Hit>;

/// Score descending, then docid ascending. Every ranked list in the
/// library is ordered by this relation.
struct RankOrder {
    bool operator()(const Hit& a, const Hit& b) const {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.docid < b.docid;
    }
};

/// Keeps the best `k` hits in rank order.
inline void keep_top_k(RankedList& hits, std::size_t k) {
    if (hits.size() > k) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), RankOrder{});
        hits.resize(k);
    } else {
        std::sort(hits.begin(), hits.end(), RankOrder{});
    }
}

}  // namespace hybrid
