// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

// JSONL record formats for everything the pipeline reads or writes besides
// the corpus itself: generations, selections, pair examples, ranking
// annotations, type-label records, and human judgments.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "inqpipe/annotation.hpp"
#include "inqpipe/errors.hpp"
#include "inqpipe/io.hpp"
#include "inqpipe/ranking.hpp"
#include "inqpipe/types.hpp"

namespace inqpipe {

namespace detail {

inline nlohmann::json parse_json_line(const std::string& line, std::size_t line_no) {
    try {
        nlohmann::json j = nlohmann::json::parse(line);
        if (!j.is_object()) throw MalformedRecord(line_no, "record is not a JSON object");
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedRecord(line_no, std::string("invalid JSON: ") + e.what());
    }
}

inline std::string json_string(const nlohmann::json& j, const char* key, std::size_t line_no) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
        throw MalformedRecord(line_no, std::string("missing string field: ") + key);
    return it->get<std::string>();
}

inline QuestionType json_type(const nlohmann::json& j, const char* key, std::size_t line_no) {
    std::string name = json_string(j, key, line_no);
    auto t = parse_type(name);
    if (!t) throw MalformedRecord(line_no, "unknown question type: " + name);
    return *t;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generations

struct GenerationRecord {
    std::string instance_id;
    std::string strategy;  // "base", "span" or "per-type"
    std::optional<QuestionType> control;
    std::string question;
    int token_count = 0;
};

inline std::string to_jsonl(const GenerationRecord& rec) {
    nlohmann::ordered_json j;
    j["instance_id"] = rec.instance_id;
    j["strategy"] = rec.strategy;
    j["control"] = rec.control ? nlohmann::json(std::string(type_name(*rec.control)))
                               : nlohmann::json(nullptr);
    j["question"] = rec.question;
    j["token_count"] = rec.token_count;
    return j.dump();
}

inline std::vector<GenerationRecord> load_generations(const std::string& path) {
    std::vector<GenerationRecord> out;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        nlohmann::json j = detail::parse_json_line(line, line_no);
        GenerationRecord rec;
        rec.instance_id = detail::json_string(j, "instance_id", line_no);
        rec.strategy = detail::json_string(j, "strategy", line_no);
        if (auto it = j.find("control"); it != j.end() && !it->is_null())
            rec.control = detail::json_type(j, "control", line_no);
        rec.question = detail::json_string(j, "question", line_no);
        if (auto it = j.find("token_count"); it != j.end() && it->is_number_integer())
            rec.token_count = it->get<int>();
        out.push_back(std::move(rec));
    });
    return out;
}

// ---------------------------------------------------------------------------
// selections

struct SelectionRecord {
    std::string instance_id;
    std::string strategy;  // "base", "span", "type_s", "type_r", "type_o"
    std::optional<QuestionType> chosen_type;
    std::string question;
    std::optional<VoteTally> tally;  // present for type_r only
};

inline std::string to_jsonl(const SelectionRecord& rec) {
    nlohmann::ordered_json j;
    j["instance_id"] = rec.instance_id;
    j["strategy"] = rec.strategy;
    j["chosen_type"] = rec.chosen_type ? nlohmann::json(std::string(type_name(*rec.chosen_type)))
                                       : nlohmann::json(nullptr);
    j["question"] = rec.question;
    if (rec.tally) {
        nlohmann::ordered_json counts, sums;
        for (QuestionType t : generatable_types) {
            counts[std::string(type_name(t))] = rec.tally->preferred_counts[type_index(t)];
            sums[std::string(type_name(t))] =
                format_double(rec.tally->preference_sums[type_index(t)], 4);
        }
        j["tally"] = counts;
        j["preference_sums"] = sums;
    }
    return j.dump();
}

inline std::vector<SelectionRecord> load_selections(const std::string& path) {
    std::vector<SelectionRecord> out;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        nlohmann::json j = detail::parse_json_line(line, line_no);
        SelectionRecord rec;
        rec.instance_id = detail::json_string(j, "instance_id", line_no);
        rec.strategy = detail::json_string(j, "strategy", line_no);
        if (auto it = j.find("chosen_type"); it != j.end() && !it->is_null())
            rec.chosen_type = detail::json_type(j, "chosen_type", line_no);
        rec.question = detail::json_string(j, "question", line_no);
        out.push_back(std::move(rec));
    });
    return out;
}

// ---------------------------------------------------------------------------
// pair examples

inline std::string to_jsonl(const PairExample& ex) {
    nlohmann::ordered_json j;
    j["source"] = ex.source;
    j["first"] = ex.first;
    j["second"] = ex.second;
    j["label"] = ex.label == PairLabel::positive ? "positive" : "negative";
    return j.dump();
}

inline std::vector<PairExample> load_pair_examples(const std::string& path) {
    std::vector<PairExample> out;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        nlohmann::json j = detail::parse_json_line(line, line_no);
        PairExample ex;
        ex.source = detail::json_string(j, "source", line_no);
        ex.first = detail::json_string(j, "first", line_no);
        ex.second = detail::json_string(j, "second", line_no);
        std::string label = detail::json_string(j, "label", line_no);
        if (label == "positive") ex.label = PairLabel::positive;
        else if (label == "negative") ex.label = PairLabel::negative;
        else throw MalformedRecord(line_no, "label must be positive or negative");
        out.push_back(std::move(ex));
    });
    return out;
}

// ---------------------------------------------------------------------------
// ranking annotations

inline std::string to_jsonl(const RankingAnnotation& ann) {
    nlohmann::ordered_json j;
    j["instance_id"] = ann.instance_id;
    j["annotator_id"] = ann.annotator_id;
    nlohmann::ordered_json ranks;
    for (QuestionType t : generatable_types) {
        auto it = ann.ranks.find(t);
        if (it != ann.ranks.end()) ranks[std::string(type_name(t))] = it->second;
    }
    j["ranks"] = ranks;
    return j.dump();
}

inline std::vector<RankingAnnotation> load_ranking_annotations(const std::string& path) {
    std::vector<RankingAnnotation> out;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        nlohmann::json j = detail::parse_json_line(line, line_no);
        RankingAnnotation ann;
        ann.instance_id = detail::json_string(j, "instance_id", line_no);
        ann.annotator_id = detail::json_string(j, "annotator_id", line_no);
        auto it = j.find("ranks");
        if (it == j.end() || !it->is_object())
            throw MalformedRecord(line_no, "missing ranks object");
        for (const auto& [name, value] : it->items()) {
            auto t = parse_type(name);
            if (!t) throw MalformedRecord(line_no, "unknown question type: " + name);
            if (!value.is_number_integer())
                throw MalformedRecord(line_no, "rank for " + name + " must be an integer");
            ann.ranks[*t] = value.get<int>();
        }
        ann.validate();
        out.push_back(std::move(ann));
    });
    return out;
}

// ---------------------------------------------------------------------------
// type-label records

inline std::string to_jsonl(const TypeLabelRecord& rec) {
    nlohmann::ordered_json j;
    j["question_id"] = rec.question_id;
    nlohmann::ordered_json labels = nlohmann::ordered_json::array();
    for (const auto& [annotator, label] : rec.labels)
        labels.push_back({{"annotator_id", annotator}, {"type", std::string(type_name(label))}});
    j["labels"] = labels;
    return j.dump();
}

inline std::vector<TypeLabelRecord> load_type_labels(const std::string& path) {
    std::vector<TypeLabelRecord> out;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        nlohmann::json j = detail::parse_json_line(line, line_no);
        TypeLabelRecord rec;
        rec.question_id = detail::json_string(j, "question_id", line_no);
        auto it = j.find("labels");
        if (it == j.end() || !it->is_array())
            throw MalformedRecord(line_no, "missing labels array");
        for (const auto& entry : *it) {
            rec.labels.emplace_back(detail::json_string(entry, "annotator_id", line_no),
                                    detail::json_type(entry, "type", line_no));
        }
        rec.validate();
        out.push_back(std::move(rec));
    });
    return out;
}

// ---------------------------------------------------------------------------
// human judgments

inline std::string to_jsonl(const HumanJudgment& j) {
    nlohmann::ordered_json out;
    out["instance_id"] = j.instance_id;
    out["model"] = j.model;
    out["aspect"] = std::string(aspect_name(j.aspect));
    out["response"] = std::string(response_name(j.response));
    out["annotator_id"] = j.annotator_id;
    return out.dump();
}

inline std::vector<HumanJudgment> load_human_judgments(const std::string& path) {
    std::vector<HumanJudgment> out;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        nlohmann::json j = detail::parse_json_line(line, line_no);
        HumanJudgment rec;
        rec.instance_id = detail::json_string(j, "instance_id", line_no);
        rec.model = detail::json_string(j, "model", line_no);
        std::string aspect = detail::json_string(j, "aspect", line_no);
        auto a = parse_aspect(aspect);
        if (!a) throw MalformedResponse("line " + std::to_string(line_no) + ": unknown aspect " + aspect);
        rec.aspect = *a;
        std::string response = detail::json_string(j, "response", line_no);
        auto r = parse_response(response);
        if (!r)
            throw MalformedResponse("line " + std::to_string(line_no) + ": unknown response " + response);
        rec.response = *r;
        rec.annotator_id = detail::json_string(j, "annotator_id", line_no);
        out.push_back(std::move(rec));
    });
    return out;
}

template <typename Record>
std::string records_to_jsonl(const std::vector<Record>& records) {
    std::string out;
    for (const Record& rec : records) {
        out += to_jsonl(rec);
        out += '\n';
    }
    return out;
}

}  // namespace inqpipe
