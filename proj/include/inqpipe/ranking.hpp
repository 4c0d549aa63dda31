// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "inqpipe/corpus.hpp"
#include "inqpipe/errors.hpp"
#include "inqpipe/metrics.hpp"
#include "inqpipe/rng.hpp"
#include "inqpipe/types.hpp"

namespace inqpipe {

/// One annotator's partial ranking over the six typed questions of an
/// instance. Unranked types are implicitly non-relevant.
struct RankingAnnotation {
    std::string instance_id;
    std::string annotator_id;
    std::map<QuestionType, int> ranks;  // 1 = best

    /// Between 3 and 5 types ranked; ranks distinct, contiguous, starting
    /// at 1; only generatable types may carry a rank.
    void validate() const {
        if (ranks.size() < 3 || ranks.size() > 5)
            throw InvalidRanks(instance_id + "/" + annotator_id + ": " +
                               std::to_string(ranks.size()) + " ranked types (expected 3-5)");
        std::vector<int> values;
        for (const auto& [type, rank] : ranks) {
            if (type == QuestionType::Other)
                throw InvalidRanks(instance_id + ": Other cannot be ranked");
            values.push_back(rank);
        }
        std::sort(values.begin(), values.end());
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] != static_cast<int>(i) + 1)
                throw InvalidRanks(instance_id + "/" + annotator_id +
                                   ": ranks must be distinct and contiguous from 1");
        }
    }

    /// Ranked types, best first.
    std::vector<QuestionType> relevant() const {
        std::vector<std::pair<int, QuestionType>> by_rank;
        for (const auto& [type, rank] : ranks) by_rank.emplace_back(rank, type);
        std::sort(by_rank.begin(), by_rank.end());
        std::vector<QuestionType> out;
        for (const auto& [rank, type] : by_rank) out.push_back(type);
        return out;
    }

    /// Unranked generatable types, in canonical type order.
    std::vector<QuestionType> non_relevant() const {
        std::vector<QuestionType> out;
        for (QuestionType t : generatable_types)
            if (!ranks.count(t)) out.push_back(t);
        return out;
    }

    /// Types with rank <= k, unordered.
    std::vector<QuestionType> top_k(int k) const {
        std::vector<QuestionType> out;
        for (const auto& [type, rank] : ranks)
            if (rank <= k) out.push_back(type);
        return out;
    }
};

enum class PairLabel { positive, negative };

/// Ordered training example for the pairwise ranker. Label is positive iff
/// `first` held the strictly better (smaller) rank.
struct PairExample {
    std::string source;
    std::string first;
    std::string second;
    PairLabel label = PairLabel::positive;

    std::string input_text() const {
        std::string text = source;
        text += kSep;
        text += first;
        text += kSep;
        text += second;
        return text;
    }
};

using QuestionKey = std::pair<std::string, QuestionType>;  // (instance_id, type)

/// Pair construction for the ranker training set. For each annotation:
/// (a) every (relevant, non-relevant) pair, and (b) every relevant pair
/// (q_j, q_k) with k scanning from j+2 whose rank difference is >= 2.
/// Every yielded pair emits both orders with opposite labels.
inline std::vector<PairExample> build_pair_dataset(
    const std::vector<RankingAnnotation>& annotations,
    const std::map<QuestionKey, std::string>& questions,
    const std::map<std::string, std::string>& sources) {
    std::vector<PairExample> out;
    for (const RankingAnnotation& ann : annotations) {
        ann.validate();
        auto src_it = sources.find(ann.instance_id);
        if (src_it == sources.end())
            throw MissingQuestion("no source sentence for instance " + ann.instance_id);
        const std::string& source = src_it->second;

        std::array<const std::string*, kNumGeneratable> question_of{};
        for (QuestionType t : generatable_types) {
            auto it = questions.find({ann.instance_id, t});
            if (it == questions.end())
                throw MissingQuestion("instance " + ann.instance_id + " lacks a " +
                                      std::string(type_name(t)) + " question");
            question_of[type_index(t)] = &it->second;
        }
        auto text_of = [&](QuestionType t) -> const std::string& {
            return *question_of[type_index(t)];
        };

        auto emit = [&](QuestionType better, QuestionType worse) {
            out.push_back({source, text_of(better), text_of(worse), PairLabel::positive});
            out.push_back({source, text_of(worse), text_of(better), PairLabel::negative});
        };

        std::vector<QuestionType> rel = ann.relevant();
        std::vector<QuestionType> nonrel = ann.non_relevant();

        for (QuestionType qj : rel)
            for (QuestionType qk : nonrel) emit(qj, qk);

        // relevant pairs: k starts two positions past j, rank gap >= 2
        const std::size_t n = rel.size();
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = j + 2; k < n; ++k) {
                if (ann.ranks.at(rel[k]) - ann.ranks.at(rel[j]) >= 2) emit(rel[j], rel[k]);
            }
        }
    }
    return out;
}

/// Seeded split that keeps both orders of the same unordered pair on the
/// same side. Throws CountTooLarge when train_count exceeds the corpus and
/// ConfigError when the exact count is unreachable without separating a
/// mirrored pair.
inline std::pair<std::vector<PairExample>, std::vector<PairExample>> split_pairs(
    const std::vector<PairExample>& examples, std::size_t train_count, std::uint64_t seed = 0) {
    if (train_count > examples.size())
        throw CountTooLarge("train_count " + std::to_string(train_count) + " > " +
                            std::to_string(examples.size()) + " examples");

    std::map<std::tuple<std::string, std::string, std::string>, std::size_t> group_of;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const PairExample& ex = examples[i];
        auto key = std::make_tuple(ex.source, std::min(ex.first, ex.second),
                                   std::max(ex.first, ex.second));
        auto [it, inserted] = group_of.try_emplace(key, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(i);
    }

    std::vector<std::size_t> order(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) order[g] = g;
    std::mt19937_64 rng(seed);
    deterministic_shuffle(order, rng);

    std::vector<bool> in_train(examples.size(), false);
    std::size_t train_size = 0;
    for (std::size_t g : order) {
        if (train_size + groups[g].size() <= train_count) {
            for (std::size_t i : groups[g]) in_train[i] = true;
            train_size += groups[g].size();
        }
    }
    if (train_size != train_count)
        throw ConfigError("train_count " + std::to_string(train_count) +
                          " is unreachable without separating mirrored pairs");

    std::vector<PairExample> train, validation;
    for (std::size_t i = 0; i < examples.size(); ++i)
        (in_train[i] ? train : validation).push_back(examples[i]);
    return {std::move(train), std::move(validation)};
}

// ---------------------------------------------------------------------------
// selection strategies

/// probability that the first question is the better one, in [0,1]
using PreferenceOracle =
    std::function<double(const std::string& source, const std::string& first,
                         const std::string& second)>;
/// probability that a question is inquisitive, in [0,1]
using InquisitivenessOracle = std::function<double(const std::string& question)>;
/// 7-way type distribution for a classifier input string
using TypeClassifierOracle = std::function<ProbDist(const std::string& input)>;

/// Outcome of the 30 ordered comparisons of one instance. Indexed by
/// type_index over the six generatable types.
struct VoteTally {
    std::array<int, kNumGeneratable> preferred_counts{};
    std::array<double, kNumGeneratable> preference_sums{};  // tie-break key
};

namespace detail {

inline std::array<const std::string*, kNumGeneratable> six_questions(
    const std::map<QuestionType, std::string>& typed_questions) {
    if (typed_questions.size() != kNumGeneratable)
        throw MissingQuestion("expected exactly six typed questions, got " +
                              std::to_string(typed_questions.size()));
    std::array<const std::string*, kNumGeneratable> out{};
    for (QuestionType t : generatable_types) {
        auto it = typed_questions.find(t);
        if (it == typed_questions.end())
            throw MissingQuestion(std::string("missing question for type ") +
                                  std::string(type_name(t)));
        out[type_index(t)] = &it->second;
    }
    return out;
}

inline double checked_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0))
        throw OracleFailure(std::string(what) + " returned probability " + std::to_string(p));
    return p;
}

}  // namespace detail

/// Max-vote selection over all 30 ordered pairs. A question is preferred in
/// an ordered example when the decision (probability >= 0.5 for the first
/// position) favors it. Ties break on the larger summed preference
/// probability, then on type name.
inline std::pair<QuestionType, VoteTally> select_type_r(
    const std::string& source, const std::map<QuestionType, std::string>& typed_questions,
    const PreferenceOracle& preference) {
    auto question_of = detail::six_questions(typed_questions);
    VoteTally tally;
    for (QuestionType a : generatable_types) {
        for (QuestionType b : generatable_types) {
            if (a == b) continue;
            double p;
            try {
                p = preference(source, *question_of[type_index(a)], *question_of[type_index(b)]);
            } catch (const Error&) {
                throw;
            } catch (const std::exception& e) {
                throw OracleFailure(std::string("preference oracle: ") + e.what());
            }
            detail::checked_probability(p, "preference oracle");
            QuestionType winner = p >= 0.5 ? a : b;
            ++tally.preferred_counts[type_index(winner)];
            tally.preference_sums[type_index(a)] += p;
            tally.preference_sums[type_index(b)] += 1.0 - p;
        }
    }
    QuestionType best = generatable_types[0];
    for (QuestionType t : generatable_types) {
        const std::size_t ti = type_index(t), bi = type_index(best);
        if (tally.preferred_counts[ti] > tally.preferred_counts[bi] ||
            (tally.preferred_counts[ti] == tally.preferred_counts[bi] &&
             (tally.preference_sums[ti] > tally.preference_sums[bi] ||
              (tally.preference_sums[ti] == tally.preference_sums[bi] &&
               type_name_less(t, best))))) {
            best = t;
        }
    }
    return {best, tally};
}

/// Argmax of the inquisitiveness probability; ties break on type name.
inline QuestionType select_type_s(const std::map<QuestionType, std::string>& typed_questions,
                                  const InquisitivenessOracle& inquisitiveness) {
    auto question_of = detail::six_questions(typed_questions);
    QuestionType best = generatable_types[0];
    double best_p = -1.0;
    for (QuestionType t : generatable_types) {
        double p;
        try {
            p = inquisitiveness(*question_of[type_index(t)]);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw OracleFailure(std::string("inquisitiveness oracle: ") + e.what());
        }
        detail::checked_probability(p, "inquisitiveness oracle");
        if (p > best_p || (p == best_p && type_name_less(t, best))) {
            best = t;
            best_p = p;
        }
    }
    return best;
}

/// Oracle strategy: the type the classifier predicts for the reference
/// question. A prediction of Other falls back to Explanation, the majority
/// annotated type.
inline QuestionType select_type_o(const Instance& instance, const std::string& reference_question,
                                  const TypeClassifierOracle& type_classifier) {
    std::string input = build_classifier_input(instance, reference_question);
    ProbDist dist;
    try {
        dist = type_classifier(input);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw OracleFailure(std::string("type classifier oracle: ") + e.what());
    }
    dist.validate();
    QuestionType predicted = dist.argmax();
    if (predicted == QuestionType::Other) {
        warn("select_type_o: classifier predicted Other for instance " + instance.instance_id +
             ", falling back to Explanation");
        return QuestionType::Explanation;
    }
    return predicted;
}

}  // namespace inqpipe
