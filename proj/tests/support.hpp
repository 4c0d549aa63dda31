// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures and the independent brute-force oracles the metric tests
// check against. The oracles deliberately share no counting code with the
// library: they enumerate every window with plain loops.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "inqpipe/corpus.hpp"
#include "inqpipe/textproc.hpp"

namespace testsupport {

using inqpipe::Instance;
using inqpipe::TokenSeq;

// ---------------------------------------------------------------------------
// brute-force oracles (quadratic window scans)

inline bool window_equals(const TokenSeq& a, std::size_t i, const TokenSeq& b, std::size_t j,
                          std::size_t n) {
    for (std::size_t k = 0; k < n; ++k)
        if (a[i + k] != b[j + k]) return false;
    return true;
}

inline bool window_occurs_in(const TokenSeq& window_src, std::size_t i, std::size_t n,
                             const TokenSeq& haystack) {
    if (haystack.size() < n) return false;
    for (std::size_t j = 0; j + n <= haystack.size(); ++j)
        if (window_equals(window_src, i, haystack, j, n)) return true;
    return false;
}

inline double oracle_train_n(const std::vector<TokenSeq>& generated,
                             const std::vector<TokenSeq>& train, std::size_t n) {
    std::size_t num = 0, den = 0;
    for (const TokenSeq& g : generated) {
        if (g.size() < n) continue;
        for (std::size_t i = 0; i + n <= g.size(); ++i) {
            ++den;
            bool found = false;
            for (const TokenSeq& t : train) {
                if (window_occurs_in(g, i, n, t)) {
                    found = true;
                    break;
                }
            }
            if (found) ++num;
        }
    }
    if (den == 0) return 0.0;
    return static_cast<double>(num) / static_cast<double>(den);
}

inline double oracle_article_n(const TokenSeq& generated, const std::string& context,
                               const std::string& source, std::size_t n) {
    TokenSeq ctx = inqpipe::tokenize(context);
    TokenSeq src = inqpipe::tokenize(source);
    std::size_t num = 0, den = 0;
    if (generated.size() >= n) {
        for (std::size_t i = 0; i + n <= generated.size(); ++i) {
            ++den;
            if (window_occurs_in(generated, i, n, ctx) || window_occurs_in(generated, i, n, src))
                ++num;
        }
    }
    if (den == 0) return 0.0;
    return static_cast<double>(num) / static_cast<double>(den);
}

inline double oracle_span_overlap(const TokenSeq& generated, const std::string& span_text) {
    TokenSeq span_tokens = inqpipe::tokenize(span_text);
    std::vector<std::string> unique;
    for (const std::string& t : span_tokens) {
        bool seen = false;
        for (const std::string& u : unique)
            if (u == t) seen = true;
        if (!seen) unique.push_back(t);
    }
    if (unique.empty()) return 0.0;
    std::size_t present = 0;
    for (const std::string& u : unique) {
        for (const std::string& g : generated) {
            if (g == u) {
                ++present;
                break;
            }
        }
    }
    return static_cast<double>(present) / static_cast<double>(unique.size());
}

// ---------------------------------------------------------------------------
// random inputs

inline const std::vector<std::string>& small_vocab() {
    static const std::vector<std::string> vocab = {
        "the",    "a",      "of",     "why",  "what",   "how",    "did",    "plan",
        "review", "market", "profit", "drop", "report", "week",   "billion", "share",
        "rose",   "fell",   "today",  "bank", "deal",   "stock",  "price",  "board",
    };
    return vocab;
}

inline TokenSeq random_tokens(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
    const auto& vocab = small_vocab();
    std::size_t len = min_len + rng() % (max_len - min_len + 1);
    TokenSeq out;
    for (std::size_t i = 0; i < len; ++i) out.push_back(vocab[rng() % vocab.size()]);
    return out;
}

inline std::string join_tokens(const TokenSeq& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// fixture instances

/// The worked generation example: review span, Explanation control code.
inline Instance table1_instance() {
    Instance inst;
    inst.instance_id = "wsj-0001-3";
    inst.article_id = "wsj-0001";
    inst.sentence_index = 3;
    inst.context =
        "The plan places an indicated value on the real estate operation, Santa Fe Pacific "
        "Realty Corp., of $ 2 billion.";
    inst.source =
        "Santa Fe Pacific directors are expected to review the plan at a meeting today, "
        "according to people familiar with the transaction.";
    inst.span_start = inst.source.find("review");
    inst.span_end = inst.span_start + std::string("review").size();
    inst.question = "Why are they reviewing the plan?";
    inst.split = inqpipe::Split::test;
    return inst;
}

inline Instance make_instance(const std::string& id, const std::string& context,
                              const std::string& source, const std::string& span,
                              const std::string& question,
                              inqpipe::Split split = inqpipe::Split::test) {
    Instance inst;
    inst.instance_id = id;
    inst.article_id = "article-" + id;
    inst.sentence_index = 1;
    inst.context = context;
    inst.source = source;
    inst.span_start = source.find(span);
    inst.span_end = inst.span_start + span.size();
    inst.question = question;
    inst.split = split;
    return inst;
}

/// Deterministic synthetic corpus: contexts/sources built from the small
/// vocabulary, one-word spans, gold questions with question-word leads.
inline inqpipe::Dataset synthetic_corpus(std::size_t count, std::uint64_t seed,
                                         inqpipe::Split split = inqpipe::Split::test) {
    std::mt19937_64 rng(seed);
    inqpipe::Dataset ds;
    for (std::size_t i = 0; i < count; ++i) {
        TokenSeq source_tokens = random_tokens(rng, 6, 12);
        TokenSeq context_tokens = rng() % 4 == 0 ? TokenSeq{} : random_tokens(rng, 4, 10);
        std::size_t span_word = rng() % source_tokens.size();

        Instance inst;
        inst.instance_id = "syn-" + std::to_string(i);
        inst.article_id = "article-" + std::to_string(i / 5);
        inst.sentence_index = static_cast<std::int64_t>(i % 5) + 1;
        inst.context = join_tokens(context_tokens);
        inst.source = join_tokens(source_tokens);
        std::size_t offset = 0;
        for (std::size_t w = 0; w < span_word; ++w) offset += source_tokens[w].size() + 1;
        inst.span_start = offset;
        inst.span_end = offset + source_tokens[span_word].size();
        TokenSeq question_tokens = random_tokens(rng, 3, 8);
        question_tokens.insert(question_tokens.begin(),
                               rng() % 2 == 0 ? "why" : "what");
        inst.question = join_tokens(question_tokens) + "?";
        inst.split = split;
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("inqpipe_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

}  // namespace testsupport
