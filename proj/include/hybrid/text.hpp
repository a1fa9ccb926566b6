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

/// \file text.hpp
/// Normalization and tokenization shared by BM25 indexing, the hash
/// embedder and the answer metrics.
///
/// normalize():
///   1. NFKC, lowercase (root locale), NFKC again
///   2. every code point in P*, S*, Cc or White_Space becomes a separator
///   3. separators collapse to one ASCII space, ends trimmed
///   4. optionally the English articles "a", "an", "the" are dropped

#include <algorithm>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "hybrid/error.hpp"

namespace hybrid::text {

struct NormalizeOptions {
    bool strip_english_articles = false;
};

/// Languages whose text is split into one token per code point.
/// A code matches if it equals an entry or its primary subtag does
/// ("zh_cn" and "zh-TW" match "zh").
struct TokenizerConfig {
    std::set<std::string, std::less<>> char_level_langs{"zh", "ja", "km"};

    [[nodiscard]] bool is_char_level(std::string_view lang) const {
        if (char_level_langs.contains(lang)) {
            return true;
        }
        const auto cut = lang.find_first_of("_-");
        return cut != std::string_view::npos && char_level_langs.contains(lang.substr(0, cut));
    }
};

using TokenStream = std::vector<std::string>;

namespace detail {

[[nodiscard]] inline bool is_separator(UChar32 c) {
    constexpr std::uint32_t mask = U_GC_P_MASK | U_GC_S_MASK | U_GC_CC_MASK;
    return (U_GET_GC_MASK(c) & mask) != 0 || u_isUWhiteSpace(c);
}

[[nodiscard]] inline bool is_english_article(std::string_view token) {
    return token == "a" || token == "an" || token == "the";
}

[[nodiscard]] inline const icu::Normalizer2& nfkc() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
    if (U_FAILURE(status) || n == nullptr) {
        throw Error(ErrorKind::io, std::string("ICU NFKC data unavailable: ") + u_errorName(status));
    }
    return *n;
}

[[nodiscard]] inline icu::UnicodeString nfkc_lower(std::string_view input) {
    const auto& norm = nfkc();
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString s = icu::UnicodeString::fromUTF8(
        icu::StringPiece(input.data(), static_cast<int32_t>(input.size())));
    s = norm.normalize(s, status);
    s.toLower(icu::Locale::getRoot());
    s = norm.normalize(s, status);
    if (U_FAILURE(status)) {
        throw Error(ErrorKind::invalid_argument, std::string("normalization failed: ") + u_errorName(status));
    }
    return s;
}

/// Splits already-normalized text on single spaces.
[[nodiscard]] inline TokenStream split_spaces(std::string_view s) {
    TokenStream out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto end = std::min(s.find(' ', pos), s.size());
        if (end > pos) {
            out.emplace_back(s.substr(pos, end - pos));
        }
        pos = end + 1;
    }
    return out;
}

/// One string per UTF-8 code point.
[[nodiscard]] inline TokenStream split_code_points(std::string_view s) {
    TokenStream out;
    const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
    const auto len = static_cast<int32_t>(s.size());
    int32_t i = 0;
    while (i < len) {
        const int32_t start = i;
        UChar32 c = 0;
        U8_NEXT(bytes, i, len, c);
        out.emplace_back(s.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)));
    }
    return out;
}

}  // namespace detail

[[nodiscard]] inline std::string normalize(std::string_view input, NormalizeOptions options = {}) {
    if (input.empty()) {
        return {};
    }
    const icu::UnicodeString s = detail::nfkc_lower(input);

    icu::UnicodeString collapsed;
    bool pending_space = false;
    for (int32_t i = 0; i < s.length();) {
        const UChar32 c = s.char32At(i);
        i += U16_LENGTH(c);
        if (detail::is_separator(c)) {
            pending_space = !collapsed.isEmpty();
            continue;
        }
        if (pending_space) {
            collapsed.append(static_cast<UChar>(u' '));
            pending_space = false;
        }
        collapsed.append(c);
    }

    std::string out;
    collapsed.toUTF8String(out);
    if (!options.strip_english_articles) {
        return out;
    }

    std::string stripped;
    for (const auto& tok : detail::split_spaces(out)) {
        if (detail::is_english_article(tok)) {
            continue;
        }
        if (!stripped.empty()) {
            stripped.push_back(' ');
        }
        stripped += tok;
    }
    return stripped;
}

enum class TokenMode { words, code_points };

[[nodiscard]] inline TokenMode token_mode(std::string_view lang, const TokenizerConfig& config) {
    return config.is_char_level(lang) ? TokenMode::code_points : TokenMode::words;
}

[[nodiscard]] inline TokenStream tokenize_with(std::string_view input, TokenMode mode) {
    const std::string norm = normalize(input);
    TokenStream words = detail::split_spaces(norm);
    if (mode == TokenMode::words) {
        return words;
    }
    TokenStream chars;
    for (const auto& w : words) {
        auto cps = detail::split_code_points(w);
        chars.insert(chars.end(), std::make_move_iterator(cps.begin()), std::make_move_iterator(cps.end()));
    }
    return chars;
}

/// Normalizes (without article stripping) and splits into terms.
[[nodiscard]] inline TokenStream tokenize(std::string_view input, std::string_view lang,
                                          const TokenizerConfig& config = {}) {
    return tokenize_with(input, token_mode(lang, config));
}

}  // namespace hybrid::text
