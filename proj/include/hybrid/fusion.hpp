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

/// \file fusion.hpp
/// Merging a dense and a sparse ranked list into one.
///
/// Sparse-Corroborate-Dense builds its output from three slices:
///
///   budget = min(floor(max_frac * k), |sparse|)
///
///   The first `budget` sparse hits are scanned in sparse rank order. A hit
///   whose docid is also dense is *corroborated*; any other is queued for
///   backfill. Each scanned hit uses one unit of budget, so sparse hits past
///   the budget never influence the result.
///
///   1. corroborated docs, in dense rank order, carrying their dense hit
///   2. remaining dense hits in dense order, until the list holds
///      k - (budget - |corroborated|) entries
///   3. queued backfill hits in sparse order, up to length k
///
/// Combine-Score min-max normalizes each list on its own and ranks the
/// union by alpha * dense + (1 - alpha) * sparse.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hybrid/error.hpp"
#include "hybrid/hit.hpp"

namespace hybrid {

enum class FusionMode { scd, combine, dense_only, sparse_only };

[[nodiscard]] constexpr std::string_view to_string(FusionMode m) noexcept {
    switch (m) {
    case FusionMode::scd: return "scd";
    case FusionMode::combine: return "combine";
    case FusionMode::dense_only: return "dense_only";
    case FusionMode::sparse_only: return "sparse_only";
    }
    return "unknown";
}

[[nodiscard]] inline FusionMode parse_fusion_mode(std::string_view s) {
    if (s == "scd") return FusionMode::scd;
    if (s == "combine") return FusionMode::combine;
    if (s == "dense_only" || s == "dense-only") return FusionMode::dense_only;
    if (s == "sparse_only" || s == "sparse-only") return FusionMode::sparse_only;
    throw Error(ErrorKind::invalid_argument, "unknown fusion mode \"" + std::string(s) + "\"");
}

struct FusionConfig {
    std::size_t k = 60;
    double max_frac = 0.2;
    double alpha = 0.5;
    FusionMode mode = FusionMode::scd;

    void validate() const {
        if (k < 1) {
            throw Error(ErrorKind::invalid_argument, "fusion requires k >= 1");
        }
        if (!(max_frac >= 0.0 && max_frac <= 1.0)) {
            throw Error(ErrorKind::invalid_argument, "max_frac must lie in [0, 1]");
        }
        if (!(alpha >= 0.0 && alpha <= 1.0)) {
            throw Error(ErrorKind::invalid_argument, "alpha must lie in [0, 1]");
        }
    }
};

/// Output of scd_fuse_traced(): the fused list plus where each slice ends.
struct ScdTrace {
    RankedList hits;
    std::size_t budget = 0;
    std::size_t corroborated = 0;  // length of slice 1
    std::size_t dense_only = 0;    // length of slice 2
    std::size_t backfilled = 0;    // length of slice 3
};

namespace detail {

inline void require_unique(const RankedList& hits, std::string_view which) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(hits.size());
    for (const auto& h : hits) {
        if (!seen.insert(h.docid).second) {
            throw Error(ErrorKind::invalid_argument,
                        std::string(which) + " hits contain duplicate docid \"" + h.docid + "\"");
        }
    }
}

}  // namespace detail

[[nodiscard]] inline std::size_t scd_budget(std::size_t k, double max_frac, std::size_t sparse_size) {
    const auto cap = static_cast<std::size_t>(std::floor(max_frac * static_cast<double>(k)));
    return std::min(cap, sparse_size);
}

[[nodiscard]] inline ScdTrace scd_fuse_traced(const RankedList& dense_hits, const RankedList& sparse_hits,
                                              std::size_t k, double max_frac) {
    FusionConfig{.k = k, .max_frac = max_frac}.validate();
    detail::require_unique(dense_hits, "dense");
    detail::require_unique(sparse_hits, "sparse");

    std::unordered_set<std::string_view> dense_ids;
    dense_ids.reserve(dense_hits.size());
    for (const auto& h : dense_hits) {
        dense_ids.insert(h.docid);
    }

    ScdTrace trace;
    trace.budget = scd_budget(k, max_frac, sparse_hits.size());

    std::unordered_set<std::string_view> corroborated;
    std::vector<const Hit*> backfill;
    for (std::size_t i = 0; i < trace.budget; ++i) {
        const Hit& h = sparse_hits[i];
        if (dense_ids.contains(h.docid)) {
            corroborated.insert(h.docid);
        } else {
            backfill.push_back(&h);
        }
    }
    const std::size_t reserved = trace.budget - corroborated.size();

    RankedList& out = trace.hits;
    out.reserve(std::min(k, dense_hits.size() + backfill.size()));
    for (const auto& h : dense_hits) {
        if (corroborated.contains(h.docid)) {
            out.push_back(h);
        }
    }
    trace.corroborated = out.size();

    for (const auto& h : dense_hits) {
        if (out.size() >= k - reserved) {
            break;
        }
        if (!corroborated.contains(h.docid)) {
            out.push_back(h);
            ++trace.dense_only;
        }
    }

    for (const Hit* h : backfill) {
        if (out.size() >= k) {
            break;
        }
        out.push_back(*h);
        ++trace.backfilled;
    }
    return trace;
}

[[nodiscard]] inline RankedList scd_fuse(const RankedList& dense_hits, const RankedList& sparse_hits, std::size_t k,
                                         double max_frac) {
    return scd_fuse_traced(dense_hits, sparse_hits, k, max_frac).hits;
}

namespace detail {

/// Min-max scaling to [0, 1]; a constant list maps to all ones.
[[nodiscard]] inline std::unordered_map<std::string_view, double> min_max(const RankedList& hits) {
    std::unordered_map<std::string_view, double> out;
    if (hits.empty()) {
        return out;
    }
    const auto [lo, hi] = std::minmax_element(hits.begin(), hits.end(),
                                              [](const Hit& a, const Hit& b) { return a.score < b.score; });
    const double range = hi->score - lo->score;
    for (const auto& h : hits) {
        out.emplace(h.docid, range > 0.0 ? (h.score - lo->score) / range : 1.0);
    }
    return out;
}

}  // namespace detail

[[nodiscard]] inline RankedList combine_score_fuse(const RankedList& dense_hits, const RankedList& sparse_hits,
                                                   std::size_t k, double alpha) {
    FusionConfig{.k = k, .alpha = alpha}.validate();
    detail::require_unique(dense_hits, "dense");
    detail::require_unique(sparse_hits, "sparse");

    const auto dense_norm = detail::min_max(dense_hits);
    const auto sparse_norm = detail::min_max(sparse_hits);

    RankedList out;
    out.reserve(dense_hits.size() + sparse_hits.size());
    for (const auto& h : dense_hits) {
        const auto s = sparse_norm.find(h.docid);
        const double sparse_part = s == sparse_norm.end() ? 0.0 : s->second;
        out.push_back(Hit{.docid = h.docid,
                          .score = alpha * dense_norm.at(h.docid) + (1.0 - alpha) * sparse_part,
                          .source = Source::fused,
                          .lang = h.lang});
    }
    for (const auto& h : sparse_hits) {
        if (dense_norm.contains(h.docid)) {
            continue;
        }
        out.push_back(Hit{.docid = h.docid,
                          .score = (1.0 - alpha) * sparse_norm.at(h.docid),
                          .source = Source::fused,
                          .lang = h.lang});
    }
    keep_top_k(out, k);
    return out;
}

[[nodiscard]] inline RankedList fuse(const RankedList& dense_hits, const RankedList& sparse_hits,
                                     const FusionConfig& config) {
    config.validate();
    switch (config.mode) {
    case FusionMode::scd: return scd_fuse(dense_hits, sparse_hits, config.k, config.max_frac);
    case FusionMode::combine: return combine_score_fuse(dense_hits, sparse_hits, config.k, config.alpha);
    case FusionMode::dense_only:
        return RankedList(dense_hits.begin(),
                          dense_hits.begin() + static_cast<std::ptrdiff_t>(std::min(config.k, dense_hits.size())));
    case FusionMode::sparse_only:
        return RankedList(sparse_hits.begin(),
                          sparse_hits.begin() + static_cast<std::ptrdiff_t>(std::min(config.k, sparse_hits.size())));
    }
    throw Error(ErrorKind::invalid_argument, "unknown fusion mode");
}

}  // namespace hybrid
