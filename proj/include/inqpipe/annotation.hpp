// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "inqpipe/errors.hpp"
#include "inqpipe/ranking.hpp"
#include "inqpipe/types.hpp"

namespace inqpipe {

/// Independent type labels for one question.
struct TypeLabelRecord {
    std::string question_id;
    std::vector<std::pair<std::string, QuestionType>> labels;  // (annotator_id, label)

    void validate() const {
        if (labels.empty()) throw EmptyInput("label record " + question_id + " has no labels");
        std::set<std::string> annotators;
        for (const auto& [annotator, label] : labels) {
            if (!annotators.insert(annotator).second)
                throw EmptyInput("label record " + question_id + " repeats annotator " + annotator);
        }
    }
};

/// Strict-majority label; nullopt when no strict majority exists, flagging
/// the record for adjudication.
inline std::optional<QuestionType> majority_vote(const TypeLabelRecord& record) {
    record.validate();
    std::map<QuestionType, std::size_t> counts;
    for (const auto& [annotator, label] : record.labels) ++counts[label];
    for (const auto& [label, count] : counts) {
        if (2 * count > record.labels.size()) return label;
    }
    return std::nullopt;
}

/// Cohen's kappa over two aligned labelings. pe = 1 only when both sides are
/// the same constant labeling, which forces po = 1; that degenerate case
/// returns 1 with a warning.
template <typename Label>
double cohen_kappa(const std::vector<Label>& labels_a, const std::vector<Label>& labels_b) {
    if (labels_a.size() != labels_b.size())
        throw LengthMismatch("cohen_kappa: labelings of different length");
    if (labels_a.empty()) throw EmptyInput("cohen_kappa over zero items");
    const double n = static_cast<double>(labels_a.size());
    std::map<Label, std::size_t> marg_a, marg_b;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        ++marg_a[labels_a[i]];
        ++marg_b[labels_b[i]];
        if (labels_a[i] == labels_b[i]) ++agree;
    }
    double po = static_cast<double>(agree) / n;
    double pe = 0.0;
    for (const auto& [label, count_a] : marg_a) {
        auto it = marg_b.find(label);
        if (it != marg_b.end())
            pe += (static_cast<double>(count_a) / n) * (static_cast<double>(it->second) / n);
    }
    if (pe >= 1.0) {
        warn("cohen_kappa: both labelings are the same constant; kappa reported as 1");
        return 1.0;
    }
    return (po - pe) / (1.0 - pe);
}

/// 1 iff at least one of a's top-k types appears in b's top-3.
inline int precision_at_k(const RankingAnnotation& a, const RankingAnnotation& b, int k) {
    if (k < 1) throw InvalidN("precision_at_k requires k >= 1");
    if (a.instance_id != b.instance_id)
        throw InstanceMismatch("precision_at_k across instances " + a.instance_id + " and " +
                               b.instance_id);
    std::vector<QuestionType> b_top = b.top_k(3);
    for (QuestionType t : a.top_k(k)) {
        for (QuestionType u : b_top)
            if (t == u) return 1;
    }
    return 0;
}

struct PrecisionAtK {
    double a_to_b = 0.0;
    double b_to_a = 0.0;
    double mean = 0.0;
};

/// Mean of the per-instance indicator for each ordered annotator direction,
/// plus their average. Annotations are aligned index-wise.
inline PrecisionAtK corpus_precision_at_k(const std::vector<RankingAnnotation>& a,
                                          const std::vector<RankingAnnotation>& b, int k) {
    if (a.size() != b.size()) throw LengthMismatch("precision_at_k: annotation lists differ");
    if (a.empty()) throw EmptyInput("precision_at_k over zero instances");
    PrecisionAtK result;
    for (std::size_t i = 0; i < a.size(); ++i) {
        result.a_to_b += precision_at_k(a[i], b[i], k);
        result.b_to_a += precision_at_k(b[i], a[i], k);
    }
    result.a_to_b /= static_cast<double>(a.size());
    result.b_to_a /= static_cast<double>(a.size());
    result.mean = (result.a_to_b + result.b_to_a) / 2.0;
    return result;
}

// ---------------------------------------------------------------------------
// human evaluation

enum class Aspect { syntax, semantics, relevancy, inquisitiveness };
inline constexpr std::array<Aspect, 4> all_aspects = {Aspect::syntax, Aspect::semantics,
                                                      Aspect::relevancy, Aspect::inquisitiveness};

inline std::string_view aspect_name(Aspect a) {
    switch (a) {
        case Aspect::syntax: return "syntax";
        case Aspect::semantics: return "semantics";
        case Aspect::relevancy: return "relevancy";
        case Aspect::inquisitiveness: return "inquisitiveness";
    }
    return "";
}

inline std::optional<Aspect> parse_aspect(std::string_view name) {
    for (Aspect a : all_aspects)
        if (name == aspect_name(a)) return a;
    return std::nullopt;
}

enum class Response { yes, somewhat, no };

inline std::string_view response_name(Response r) {
    switch (r) {
        case Response::yes: return "yes";
        case Response::somewhat: return "somewhat";
        case Response::no: return "no";
    }
    return "";
}

inline std::optional<Response> parse_response(std::string_view name) {
    if (name == "yes") return Response::yes;
    if (name == "somewhat") return Response::somewhat;
    if (name == "no") return Response::no;
    return std::nullopt;
}

/// yes -> 5, somewhat -> 3, no -> 1.
inline int response_score(Response r) {
    switch (r) {
        case Response::yes: return 5;
        case Response::somewhat: return 3;
        case Response::no: return 1;
    }
    return 0;
}

struct HumanJudgment {
    std::string instance_id;
    std::string model;
    Aspect aspect = Aspect::syntax;
    Response response = Response::yes;
    std::string annotator_id;
};

struct HumanEvalReport {
    /// model -> aspect-indexed mean score over all judgments, in [1,5]
    std::map<std::string, std::array<double, 4>> means;
    /// (instance_id, model, aspect) tuples whose strict-majority rating is 1
    std::vector<std::tuple<std::string, std::string, Aspect>> majority_low;
};

inline HumanEvalReport aggregate_human_eval(const std::vector<HumanJudgment>& judgments) {
    HumanEvalReport report;
    std::map<std::pair<std::string, Aspect>, std::pair<double, std::size_t>> sums;
    std::map<std::tuple<std::string, std::string, Aspect>, std::vector<Response>> per_question;
    for (const HumanJudgment& j : judgments) {
        auto& [sum, count] = sums[{j.model, j.aspect}];
        sum += response_score(j.response);
        ++count;
        per_question[{j.instance_id, j.model, j.aspect}].push_back(j.response);
    }
    for (const auto& [key, agg] : sums) {
        auto it = report.means.find(key.first);
        if (it == report.means.end()) it = report.means.emplace(key.first, std::array<double, 4>{}).first;
        it->second[static_cast<std::size_t>(key.second)] = agg.first / static_cast<double>(agg.second);
    }
    for (const auto& [key, responses] : per_question) {
        std::size_t lows = 0;
        for (Response r : responses)
            if (r == Response::no) ++lows;
        if (2 * lows > responses.size()) report.majority_low.push_back(key);
    }
    return report;
}

}  // namespace inqpipe
