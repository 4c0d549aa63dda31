// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "inqpipe/corpus.hpp"
#include "inqpipe/errors.hpp"
#include "inqpipe/textproc.hpp"
#include "inqpipe/types.hpp"

namespace inqpipe {

/// 7-way distribution over question types, indexed by QuestionType.
struct ProbDist {
    std::array<double, kNumTypes> probabilities{};

    void validate() const {
        double sum = 0.0;
        for (double p : probabilities) {
            if (!(p >= 0.0 && p <= 1.0))
                throw InvalidDistribution("probability outside [0,1]: " + std::to_string(p));
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
    }

    QuestionType argmax() const {
        QuestionType best = all_types[0];
        for (QuestionType t : all_types) {
            double p = probabilities[type_index(t)];
            double q = probabilities[type_index(best)];
            if (p > q || (p == q && type_name_less(t, best))) best = t;
        }
        return best;
    }

    static ProbDist uniform() {
        ProbDist d;
        d.probabilities.fill(1.0 / kNumTypes);
        return d;
    }

    static ProbDist one_hot(QuestionType t) {
        ProbDist d;
        d.probabilities[type_index(t)] = 1.0;
        return d;
    }
};

using TokenPair = std::pair<TokenSeq, TokenSeq>;  // (candidate, reference)

// ---------------------------------------------------------------------------
// reference-overlap metrics

/// Corpus-level BLEU, single reference, no smoothing. Geometric mean of the
/// clipped modified n-gram precisions for n = 1..max_n, times the brevity
/// penalty; zero whenever any precision is zero.
inline double corpus_bleu(const std::vector<TokenPair>& pairs, std::size_t max_n) {
    if (max_n < 1) throw InvalidN("corpus_bleu requires max_n >= 1");
    if (pairs.empty()) throw EmptyCorpus("corpus_bleu over zero pairs");

    std::size_t cand_len = 0, ref_len = 0;
    for (const auto& [cand, ref] : pairs) {
        cand_len += cand.size();
        ref_len += ref.size();
    }
    if (cand_len == 0) return 0.0;

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= max_n; ++n) {
        std::size_t matched = 0, total = 0;
        for (const auto& [cand, ref] : pairs) {
            NgramBag cbag = ngrams(cand, n);
            NgramBag rbag = ngrams(ref, n);
            total += cbag.total;
            for (const auto& [gram, count] : cbag.counts) {
                auto it = rbag.counts.find(gram);
                if (it != rbag.counts.end()) matched += std::min(count, it->second);
            }
        }
        if (total == 0 || matched == 0) return 0.0;
        log_sum += std::log(static_cast<double>(matched) / static_cast<double>(total));
    }
    double bp = cand_len < ref_len
                    ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len))
                    : 1.0;
    return bp * std::exp(log_sum / static_cast<double>(max_n));
}

namespace detail {

inline std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace detail

/// LCS-based F1. Symmetric in its arguments since |LCS| is.
inline double rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
    std::size_t l = detail::lcs_length(candidate, reference);
    if (l == 0) return 0.0;
    double p = static_cast<double>(l) / static_cast<double>(candidate.size());
    double r = static_cast<double>(l) / static_cast<double>(reference.size());
    return 2.0 * p * r / (p + r);
}

inline double corpus_rouge_l(const std::vector<TokenPair>& pairs) {
    if (pairs.empty()) throw EmptyCorpus("corpus_rouge_l over zero pairs");
    double sum = 0.0;
    for (const auto& [cand, ref] : pairs) sum += rouge_l(cand, ref);
    return sum / static_cast<double>(pairs.size());
}

/// Exact-match METEOR: unigram matches under a left-to-right
/// maximal-contiguity alignment, harmonic mean weighted 9:1 toward recall,
/// and the classic 0.5 * (chunks/matches)^3 fragmentation penalty.
inline double meteor_lite(const TokenSeq& candidate, const TokenSeq& reference) {
    if (candidate.empty() || reference.empty()) return 0.0;
    std::vector<bool> used(reference.size(), false);
    std::size_t m = 0, chunks = 0;
    std::ptrdiff_t last_ci = -2, last_ri = -2;
    for (std::size_t ci = 0; ci < candidate.size(); ++ci) {
        std::ptrdiff_t ri = -1;
        // prefer extending the current chunk, then the leftmost unused match
        std::size_t next = static_cast<std::size_t>(last_ri + 1);
        if (last_ri >= -1 && next < reference.size() && !used[next] &&
            reference[next] == candidate[ci]) {
            ri = static_cast<std::ptrdiff_t>(next);
        } else {
            for (std::size_t j = 0; j < reference.size(); ++j) {
                if (!used[j] && reference[j] == candidate[ci]) {
                    ri = static_cast<std::ptrdiff_t>(j);
                    break;
                }
            }
        }
        if (ri < 0) continue;
        used[static_cast<std::size_t>(ri)] = true;
        ++m;
        if (!(static_cast<std::ptrdiff_t>(ci) == last_ci + 1 && ri == last_ri + 1)) ++chunks;
        last_ci = static_cast<std::ptrdiff_t>(ci);
        last_ri = ri;
    }
    if (m == 0) return 0.0;
    double p = static_cast<double>(m) / static_cast<double>(candidate.size());
    double r = static_cast<double>(m) / static_cast<double>(reference.size());
    double fmean = 10.0 * p * r / (r + 9.0 * p);
    double frag = static_cast<double>(chunks) / static_cast<double>(m);
    double penalty = 0.5 * frag * frag * frag;
    return fmean * (1.0 - penalty);
}

inline double corpus_meteor_lite(const std::vector<TokenPair>& pairs) {
    if (pairs.empty()) throw EmptyCorpus("corpus_meteor_lite over zero pairs");
    double sum = 0.0;
    for (const auto& [cand, ref] : pairs) sum += meteor_lite(cand, ref);
    return sum / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------------------
// copying / novelty metrics

namespace detail {

using NgramSet = std::set<std::vector<std::string>>;

inline NgramSet ngram_set(const TokenSeq& tokens, std::size_t n) {
    NgramSet out;
    NgramBag bag = ngrams(tokens, n);
    for (const auto& [gram, count] : bag.counts) out.insert(gram);
    return out;
}

/// (occurrences of `tokens` n-grams found in `reference`) / (total n-gram
/// occurrences). Numerator and denominator are exact integers; 0/0 maps to
/// 0 with a warning.
inline double containment_ratio(const TokenSeq& tokens, const NgramSet& reference, std::size_t n,
                                const char* what) {
    NgramBag bag = ngrams(tokens, n);
    std::size_t matched = 0;
    for (const auto& [gram, count] : bag.counts)
        if (reference.count(gram)) matched += count;
    if (bag.total == 0) {
        warn(std::string(what) + ": 0/0 ratio (question shorter than n), counted as 0");
        return 0.0;
    }
    return static_cast<double>(matched) / static_cast<double>(bag.total);
}

}  // namespace detail

/// Fraction of n-gram occurrences in the generated questions that appear
/// anywhere in the training questions. Pooled over the whole collection.
inline double train_n(const std::vector<TokenSeq>& generated,
                      const std::vector<TokenSeq>& train_questions, std::size_t n) {
    if (n < 1) throw InvalidN("train_n requires n >= 1");
    detail::NgramSet train_set;
    for (const TokenSeq& q : train_questions) {
        NgramBag bag = ngrams(q, n);
        for (const auto& [gram, count] : bag.counts) train_set.insert(gram);
    }
    std::size_t matched = 0, total = 0;
    for (const TokenSeq& q : generated) {
        NgramBag bag = ngrams(q, n);
        total += bag.total;
        for (const auto& [gram, count] : bag.counts)
            if (train_set.count(gram)) matched += count;
    }
    if (total == 0) {
        warn("train_n: 0/0 ratio (no generated n-grams), counted as 0");
        return 0.0;
    }
    return static_cast<double>(matched) / static_cast<double>(total);
}

/// Per-question Article-n: the reference n-gram set pools the question's own
/// context and source sentence (tokenized separately, so no n-gram spans
/// their boundary).
inline double article_n(const TokenSeq& generated, const Instance& instance, std::size_t n) {
    if (n < 1) throw InvalidN("article_n requires n >= 1");
    detail::NgramSet article = detail::ngram_set(tokenize(instance.context), n);
    detail::NgramSet source = detail::ngram_set(tokenize(instance.source), n);
    article.insert(source.begin(), source.end());
    return detail::containment_ratio(generated, article, n, "article_n");
}

inline double corpus_article_n(const std::vector<TokenSeq>& generated,
                               const std::vector<const Instance*>& instances, std::size_t n) {
    if (generated.size() != instances.size())
        throw LengthMismatch("corpus_article_n: question/instance counts differ");
    if (generated.empty()) throw EmptyCorpus("corpus_article_n over zero questions");
    double sum = 0.0;
    for (std::size_t i = 0; i < generated.size(); ++i)
        sum += article_n(generated[i], *instances[i], n);
    return sum / static_cast<double>(generated.size());
}

/// Fraction of distinct span words present in the generated question
/// (unique-token basis, case-insensitive through the shared tokenizer).
inline double span_overlap(const TokenSeq& generated, const std::string& span_text) {
    if (span_text.empty()) throw EmptySpan("span_overlap over an empty span");
    TokenSeq span_tokens = tokenize(span_text);
    std::set<std::string> span_set(span_tokens.begin(), span_tokens.end());
    if (span_set.empty()) {
        warn("span_overlap: span has no tokens, counted as 0");
        return 0.0;
    }
    std::set<std::string> gen_set(generated.begin(), generated.end());
    std::size_t present = 0;
    for (const std::string& tok : span_set)
        if (gen_set.count(tok)) ++present;
    return static_cast<double>(present) / static_cast<double>(span_set.size());
}

inline double corpus_span_overlap(const std::vector<TokenSeq>& generated,
                                  const std::vector<const Instance*>& instances) {
    if (generated.size() != instances.size())
        throw LengthMismatch("corpus_span_overlap: question/instance counts differ");
    if (generated.empty()) throw EmptyCorpus("corpus_span_overlap over zero questions");
    double sum = 0.0;
    for (std::size_t i = 0; i < generated.size(); ++i)
        sum += span_overlap(generated[i], instances[i]->span_text());
    return sum / static_cast<double>(generated.size());
}

// ---------------------------------------------------------------------------
// distribution metrics

/// Shannon entropy in nats, with 0 * ln 0 = 0.
inline double type_entropy(const ProbDist& dist) {
    dist.validate();
    double h = 0.0;
    for (double p : dist.probabilities)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

/// exp(-mean(token_logprobs)). Log-probs come from the external token
/// scorer; this is just the aggregation.
inline double perplexity(const std::vector<double>& token_logprobs) {
    if (token_logprobs.empty()) throw EmptySequence("perplexity over zero log-probs");
    double mean = std::accumulate(token_logprobs.begin(), token_logprobs.end(), 0.0) /
                  static_cast<double>(token_logprobs.size());
    return std::exp(-mean);
}

// ---------------------------------------------------------------------------
// controllability

/// Requested (six generatable types) x predicted (all seven: the classifier
/// may answer Other) counts.
struct ConfusionMatrix {
    std::array<std::array<std::size_t, kNumTypes>, kNumGeneratable> counts{};

    std::size_t row_sum(QuestionType requested) const {
        std::size_t sum = 0;
        for (std::size_t p = 0; p < kNumTypes; ++p) sum += counts[type_index(requested)][p];
        return sum;
    }
};

struct ControllabilityResult {
    ConfusionMatrix matrix;
    std::array<double, kNumGeneratable> per_type_accuracy{};
};

inline ControllabilityResult controllability(const std::vector<QuestionType>& requested,
                                             const std::vector<QuestionType>& predicted) {
    if (requested.size() != predicted.size())
        throw LengthMismatch("controllability: requested and predicted lengths differ");
    ControllabilityResult result;
    for (std::size_t i = 0; i < requested.size(); ++i) {
        if (requested[i] == QuestionType::Other)
            throw OtherNotGeneratable("controllability: Other cannot be a requested type");
        ++result.matrix.counts[type_index(requested[i])][type_index(predicted[i])];
    }
    for (QuestionType t : generatable_types) {
        std::size_t row = result.matrix.row_sum(t);
        std::size_t diag = result.matrix.counts[type_index(t)][type_index(t)];
        if (row == 0) {
            warn("controllability: no generations requested for type " + std::string(type_name(t)));
            result.per_type_accuracy[type_index(t)] = 0.0;
        } else {
            result.per_type_accuracy[type_index(t)] =
                static_cast<double>(diag) / static_cast<double>(row);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// multi-run aggregation

struct RunSummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single run
};

inline RunSummary aggregate_runs(const std::vector<double>& per_run_values) {
    if (per_run_values.empty()) throw EmptyList("aggregate_runs over zero values");
    RunSummary s;
    s.mean = std::accumulate(per_run_values.begin(), per_run_values.end(), 0.0) /
             static_cast<double>(per_run_values.size());
    if (per_run_values.size() > 1) {
        double ss = 0.0;
        for (double v : per_run_values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(per_run_values.size() - 1));
    }
    return s;
}

// ---------------------------------------------------------------------------
// report row

/// One row of the automatic-metric table. Overlap metrics are percentages,
/// copying metrics fractions in [0,1], entropy in nats.
struct MetricReport {
    std::string model;
    double bleu_1 = 0.0;
    double bleu_2 = 0.0;
    double bleu_3 = 0.0;
    double bleu_4 = 0.0;
    double meteor = 0.0;
    double rouge_l = 0.0;
    std::optional<double> f_bert;  // externally supplied, absent otherwise
    double gpt2_ppl = 0.0;
    double entropy = 0.0;
    double train_2 = 0.0;
    double article_2 = 0.0;
    double span = 0.0;
};

inline const std::vector<std::string>& metric_report_columns() {
    static const std::vector<std::string> cols = {
        "model",  "bleu_1",   "bleu_2",  "bleu_3",  "bleu_4",  "meteor",    "rouge_l",
        "f_bert", "gpt2_ppl", "entropy", "train_2", "article_2", "span"};
    return cols;
}

}  // namespace inqpipe
