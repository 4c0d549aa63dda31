// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "inqpipe/errors.hpp"
#include "inqpipe/rng.hpp"
#include "inqpipe/types.hpp"

namespace inqpipe {

/// One corpus record. Span offsets are character (byte) offsets into
/// `source`; span text is always derived from them, so the two can never
/// disagree. Offsets in foreign corpora that are token-based must go
/// through a converter (see span_offsets_from_tokens below) before load.
struct Instance {
    std::string instance_id;
    std::string article_id;
    std::int64_t sentence_index = 1;
    std::string context;  // may be empty: first sentence of the article
    std::string source;
    std::size_t span_start = 0;
    std::size_t span_end = 0;
    std::string question;
    Split split = Split::train;
    std::optional<QuestionType> type_label;

    std::string span_text() const {
        return source.substr(span_start, span_end - span_start);
    }
};

namespace detail {

inline void validate_instance(const Instance& inst, std::size_t line_no) {
    auto fail = [&](const std::string& reason) { throw MalformedRecord(line_no, reason); };
    if (inst.instance_id.empty()) fail("instance_id must be non-empty");
    if (inst.sentence_index < 1) fail("sentence_index must be >= 1");
    if (inst.source.empty()) fail("source must be non-empty");
    if (inst.question.empty()) fail("question must be non-empty");
    if (!(inst.span_start < inst.span_end) || inst.span_end > inst.source.size())
        throw SpanOutOfBounds(inst.instance_id + ": span [" + std::to_string(inst.span_start) +
                              ", " + std::to_string(inst.span_end) + ") not within source of length " +
                              std::to_string(inst.source.size()));
    // the delimiter literal must never occur inside corpus text, otherwise
    // assembled inputs could not be split back into their segments
    for (const std::string* field : {&inst.context, &inst.source, &inst.question}) {
        if (field->find("[SEP]") != std::string::npos) fail("corpus text contains \"[SEP]\"");
    }
}

}  // namespace detail

/// Immutable after load; all reads are shareable across threads.
struct Dataset {
    std::vector<Instance> instances;

    std::size_t count(Split s) const {
        std::size_t n = 0;
        for (const Instance& inst : instances)
            if (inst.split == s) ++n;
        return n;
    }

    std::vector<const Instance*> split_view(Split s) const {
        std::vector<const Instance*> out;
        for (const Instance& inst : instances)
            if (inst.split == s) out.push_back(&inst);
        return out;
    }
};

/// Parses one JSONL record. `line_no` is 1-based and only used in errors.
inline Instance parse_instance_json(const std::string& line, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedRecord(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw MalformedRecord(line_no, "record is not a JSON object");

    auto require = [&](const char* key) -> const nlohmann::json& {
        auto it = j.find(key);
        if (it == j.end()) throw MalformedRecord(line_no, std::string("missing field: ") + key);
        return *it;
    };
    auto str = [&](const char* key) -> std::string {
        const auto& v = require(key);
        if (!v.is_string()) throw MalformedRecord(line_no, std::string(key) + " must be a string");
        return v.get<std::string>();
    };
    auto integer = [&](const char* key) -> std::int64_t {
        const auto& v = require(key);
        if (!v.is_number_integer()) throw MalformedRecord(line_no, std::string(key) + " must be an integer");
        return v.get<std::int64_t>();
    };

    Instance inst;
    inst.instance_id = str("instance_id");
    inst.article_id = str("article_id");
    inst.sentence_index = integer("sentence_index");
    inst.context = str("context");
    inst.source = str("source");
    std::int64_t s0 = integer("span_start");
    std::int64_t s1 = integer("span_end");
    if (s0 < 0 || s1 < 0) throw MalformedRecord(line_no, "span offsets must be non-negative");
    inst.span_start = static_cast<std::size_t>(s0);
    inst.span_end = static_cast<std::size_t>(s1);
    inst.question = str("question");
    auto split = parse_split(str("split"));
    if (!split) throw MalformedRecord(line_no, "split must be one of train/dev/test");
    inst.split = *split;
    if (auto it = j.find("type_label"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw MalformedRecord(line_no, "type_label must be a string or null");
        auto t = parse_type(it->get<std::string>());
        if (!t) throw MalformedRecord(line_no, "unknown type_label: " + it->get<std::string>());
        inst.type_label = *t;
    }
    detail::validate_instance(inst, line_no);
    return inst;
}

/// Loads a JSONL corpus, validating every record and preserving file order.
inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput("cannot open corpus file: " + path);
    Dataset ds;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Instance inst = parse_instance_json(line, line_no);
        if (!ids.insert(inst.instance_id).second)
            throw DuplicateId("duplicate instance_id at line " + std::to_string(line_no) + ": " +
                              inst.instance_id);
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

/// Canonical JSONL form: fixed field order, type_label omitted when absent,
/// LF line endings. export_dataset(load_dataset(f)) is byte-identical for
/// files in this form.
inline std::string instance_to_jsonl(const Instance& inst) {
    nlohmann::ordered_json j;
    j["instance_id"] = inst.instance_id;
    j["article_id"] = inst.article_id;
    j["sentence_index"] = inst.sentence_index;
    j["context"] = inst.context;
    j["source"] = inst.source;
    j["span_start"] = inst.span_start;
    j["span_end"] = inst.span_end;
    j["question"] = inst.question;
    j["split"] = std::string(split_name(inst.split));
    if (inst.type_label) j["type_label"] = std::string(type_name(*inst.type_label));
    return j.dump();
}

inline void export_dataset(const Dataset& ds, std::ostream& out) {
    for (const Instance& inst : ds.instances) out << instance_to_jsonl(inst) << '\n';
}

inline void export_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingInput("cannot open output file: " + path);
    export_dataset(ds, out);
}

/// Converter hook for corpora whose span offsets are token positions rather
/// than character offsets: maps a [token_start, token_end) range over the
/// whitespace tokens of `source` to character offsets.
inline std::pair<std::size_t, std::size_t> span_offsets_from_tokens(const std::string& source,
                                                                    std::size_t token_start,
                                                                    std::size_t token_end) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t i = 0;
    while (i < source.size()) {
        while (i < source.size() && std::isspace(static_cast<unsigned char>(source[i]))) ++i;
        std::size_t begin = i;
        while (i < source.size() && !std::isspace(static_cast<unsigned char>(source[i]))) ++i;
        if (i > begin) spans.emplace_back(begin, i);
    }
    if (token_start >= token_end || token_end > spans.size())
        throw SpanOutOfBounds("token span [" + std::to_string(token_start) + ", " +
                              std::to_string(token_end) + ") not within " +
                              std::to_string(spans.size()) + " tokens");
    return {spans[token_start].first, spans[token_end - 1].second};
}

// ---------------------------------------------------------------------------
// model-input assembly

enum class Strategy { BASE, SPAN, TYPE };

inline std::string_view strategy_name(Strategy s) {
    switch (s) {
        case Strategy::BASE: return "BASE";
        case Strategy::SPAN: return "SPAN";
        case Strategy::TYPE: return "TYPE";
    }
    return "";
}

/// Delimiter-joined input string for one generation strategy. Splitting
/// `text` on " [SEP] " yields 2 segments for BASE, 3 for SPAN, 4 for TYPE.
struct ModelInput {
    Strategy strategy = Strategy::BASE;
    std::optional<QuestionType> control;
    std::string text;
};

inline std::vector<std::string> split_on_sep(std::string_view text) {
    std::vector<std::string> segments;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = text.find(kSep, pos);
        if (next == std::string_view::npos) {
            segments.emplace_back(text.substr(pos));
            return segments;
        }
        segments.emplace_back(text.substr(pos, next - pos));
        pos = next + kSep.size();
    }
}

inline ModelInput build_model_input(const Instance& inst, Strategy strategy,
                                    std::optional<QuestionType> control = std::nullopt) {
    if (strategy == Strategy::TYPE) {
        if (!control) throw MissingControl("strategy TYPE requires a control code");
        if (*control == QuestionType::Other)
            throw OtherNotGeneratable("Other is not a generation control code");
    } else {
        control.reset();
    }
    std::string text = inst.context.empty() ? std::string(kNoContext) : inst.context;
    text += kSep;
    text += inst.source;
    if (strategy != Strategy::BASE) {
        text += kSep;
        text += inst.span_text();
    }
    if (strategy == Strategy::TYPE) {
        text += kSep;
        text += type_name(*control);
    }
    return ModelInput{strategy, control, std::move(text)};
}

/// Four segments joined with " [SEP] ": context-or-NO_CONTEXT, source,
/// span, question. This is the type-classifier input format.
inline std::string build_classifier_input(const Instance& inst, std::string_view question) {
    if (question.empty()) throw EmptyQuestion("classifier input requires a question");
    std::string text = inst.context.empty() ? std::string(kNoContext) : inst.context;
    text += kSep;
    text += inst.source;
    text += kSep;
    text += inst.span_text();
    text += kSep;
    text += question;
    return text;
}

// ---------------------------------------------------------------------------
// decoding configuration

struct DecodeParams {
    int top_k = 5;
    int min_tokens = 5;
    int max_tokens = 30;
    double length_penalty = 2.0;  // exponent; >1 favors longer outputs

    void validate() const {
        if (top_k < 1) throw ConfigError("top_k must be >= 1");
        if (min_tokens < 1 || min_tokens > max_tokens)
            throw ConfigError("decode params require 0 < min_tokens <= max_tokens");
    }
};

// ---------------------------------------------------------------------------
// holdout split

/// Seeded uniform draw of n test-split instances without replacement.
/// Returns (eval_set, holdout_set); both preserve corpus order, are
/// disjoint, and their union is the test split.
inline std::pair<Dataset, Dataset> split_holdout(const Dataset& ds, std::size_t n,
                                                 std::uint64_t seed) {
    std::vector<std::size_t> test_positions;
    for (std::size_t i = 0; i < ds.instances.size(); ++i)
        if (ds.instances[i].split == Split::test) test_positions.push_back(i);
    if (n > test_positions.size())
        throw NotEnoughInstances("requested holdout of " + std::to_string(n) + " from a test split of " +
                                 std::to_string(test_positions.size()));

    std::vector<std::size_t> order = test_positions;
    std::mt19937_64 rng(seed);
    deterministic_shuffle(order, rng);
    std::set<std::size_t> holdout_positions(order.begin(), order.begin() + n);

    Dataset eval_set, holdout_set;
    for (std::size_t i : test_positions) {
        (holdout_positions.count(i) ? holdout_set : eval_set).instances.push_back(ds.instances[i]);
    }
    return {std::move(eval_set), std::move(holdout_set)};
}

}  // namespace inqpipe
