// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "inqpipe/errors.hpp"
#include "inqpipe/types.hpp"

namespace inqpipe {

/// Lowercased tokens; no token is empty or contains whitespace.
using TokenSeq = std::vector<std::string>;

namespace detail {

inline bool is_ascii_punct(unsigned char c) {
    return c < 0x80 && std::ispunct(c);
}

/// Unicode whitespace at byte offset i; advances `len` to the codepoint size.
inline bool is_unicode_space(std::string_view s, std::size_t i, std::size_t& len) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    len = 1;
    if (c < 0x80) return std::isspace(c);
    // multi-byte sequences: decode just enough to catch the common space
    // codepoints (U+00A0, U+1680, U+2000..U+200A, U+2028, U+2029, U+202F,
    // U+205F, U+3000, U+0085)
    uint32_t cp = 0;
    std::size_t n = 0;
    if ((c & 0xE0) == 0xC0) { cp = c & 0x1F; n = 2; }
    else if ((c & 0xF0) == 0xE0) { cp = c & 0x0F; n = 3; }
    else if ((c & 0xF8) == 0xF0) { cp = c & 0x07; n = 4; }
    else return false;  // stray continuation byte: treat as opaque text
    if (i + n > s.size()) return false;
    for (std::size_t k = 1; k < n; ++k) {
        unsigned char cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) return false;
        cp = (cp << 6) | (cc & 0x3F);
    }
    len = n;
    return cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
           (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
           cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

}  // namespace detail

/// Lowercases, splits on Unicode whitespace, and detaches leading/trailing
/// ASCII punctuation as separate tokens. Internal hyphens and apostrophes
/// stay inside the token ("third-quarter" is one token).
inline TokenSeq tokenize(std::string_view text) {
    TokenSeq out;
    std::vector<std::string_view> chunks;
    std::size_t start = 0, i = 0;
    while (i < text.size()) {
        std::size_t len = 1;
        if (detail::is_unicode_space(text, i, len)) {
            if (i > start) chunks.push_back(text.substr(start, i - start));
            i += len;
            start = i;
        } else {
            i += len;
        }
    }
    if (i > start) chunks.push_back(text.substr(start, i - start));

    auto lower = [](std::string_view sv) {
        std::string s(sv);
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
            return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
        });
        return s;
    };

    for (std::string_view chunk : chunks) {
        std::size_t lo = 0, hi = chunk.size();
        while (lo < hi && detail::is_ascii_punct(static_cast<unsigned char>(chunk[lo]))) ++lo;
        while (hi > lo && detail::is_ascii_punct(static_cast<unsigned char>(chunk[hi - 1]))) --hi;
        for (std::size_t k = 0; k < lo; ++k) out.emplace_back(1, chunk[k]);
        if (hi > lo) out.push_back(lower(chunk.substr(lo, hi - lo)));
        for (std::size_t k = hi; k < chunk.size(); ++k) out.emplace_back(1, chunk[k]);
    }
    return out;
}

/// Multiset of contiguous n-token windows. Keys are the window token
/// vectors, values their multiplicities; map keys give deterministic
/// iteration order.
struct NgramBag {
    std::size_t n = 1;
    std::map<std::vector<std::string>, std::size_t> counts;
    std::size_t total = 0;

    bool contains(const std::vector<std::string>& gram) const {
        return counts.find(gram) != counts.end();
    }
};

inline NgramBag ngrams(const TokenSeq& tokens, std::size_t n) {
    if (n < 1) throw InvalidN("ngrams requires n >= 1");
    NgramBag bag;
    bag.n = n;
    if (tokens.size() >= n) {
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::vector<std::string> gram(tokens.begin() + i, tokens.begin() + i + n);
            ++bag.counts[std::move(gram)];
            ++bag.total;
        }
    }
    return bag;
}

struct LeadingNgramRow {
    QuestionType type;
    std::string ngram;  // tokens joined with a single space
    std::size_t count;
};

/// Counts of the first n tokens of each lowercased question, grouped by
/// type. Rows are grouped by type (canonical type order), sorted by count
/// descending with lexicographic tie-break on the ngram. Questions with
/// fewer than n tokens contribute nothing.
inline std::vector<LeadingNgramRow> leading_ngram_table(
    const std::vector<std::pair<QuestionType, std::string>>& labeled_questions,
    std::size_t n) {
    if (n != 1 && n != 2) throw InvalidN("leading_ngram_table supports n in {1,2}");
    std::array<std::map<std::string, std::size_t>, kNumTypes> per_type;
    for (const auto& [type, question] : labeled_questions) {
        if (question.empty()) throw EmptyQuestion("leading_ngram_table: empty question");
        TokenSeq toks = tokenize(question);
        if (toks.size() < n) continue;
        std::string lead = toks[0];
        for (std::size_t k = 1; k < n; ++k) lead += " " + toks[k];
        ++per_type[type_index(type)][lead];
    }
    std::vector<LeadingNgramRow> rows;
    for (QuestionType t : all_types) {
        const auto& table = per_type[type_index(t)];
        std::vector<LeadingNgramRow> block;
        block.reserve(table.size());
        for (const auto& [gram, count] : table) block.push_back({t, gram, count});
        std::stable_sort(block.begin(), block.end(),
                         [](const LeadingNgramRow& a, const LeadingNgramRow& b) {
                             if (a.count != b.count) return a.count > b.count;
                             return a.ngram < b.ngram;
                         });
        rows.insert(rows.end(), block.begin(), block.end());
    }
    return rows;
}

}  // namespace inqpipe
