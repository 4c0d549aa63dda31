// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inqpipe/errors.hpp"

namespace inqpipe {

/// Segment delimiter used in every assembled model input.
inline constexpr std::string_view kSep = " [SEP] ";
/// Placeholder emitted when an instance has no preceding context.
inline constexpr std::string_view kNoContext = "NO_CONTEXT";

/// The seven question types. Other exists as an annotation label but is
/// never usable as a generation control code.
enum class QuestionType {
    Explanation,
    Elaboration,
    Background,
    Definition,
    Instantiation,
    ForwardLooking,
    Other,
};

inline constexpr std::size_t kNumTypes = 7;
inline constexpr std::size_t kNumGeneratable = 6;

inline constexpr std::array<QuestionType, kNumTypes> all_types = {
    QuestionType::Explanation,  QuestionType::Elaboration,    QuestionType::Background,
    QuestionType::Definition,   QuestionType::Instantiation,  QuestionType::ForwardLooking,
    QuestionType::Other,
};

/// Control-code subset: everything except Other.
inline constexpr std::array<QuestionType, kNumGeneratable> generatable_types = {
    QuestionType::Explanation, QuestionType::Elaboration,   QuestionType::Background,
    QuestionType::Definition,  QuestionType::Instantiation, QuestionType::ForwardLooking,
};

/// Canonical name, also the control-code token appended to TYPE inputs.
inline std::string_view type_name(QuestionType t) {
    switch (t) {
        case QuestionType::Explanation: return "Explanation";
        case QuestionType::Elaboration: return "Elaboration";
        case QuestionType::Background: return "Background";
        case QuestionType::Definition: return "Definition";
        case QuestionType::Instantiation: return "Instantiation";
        case QuestionType::ForwardLooking: return "Forward-looking";
        case QuestionType::Other: return "Other";
    }
    return "";
}

inline std::optional<QuestionType> parse_type(std::string_view name) {
    for (QuestionType t : all_types) {
        if (name == type_name(t)) return t;
    }
    // accepted aliases seen in annotation exports
    if (name == "Forward" || name == "Forward-Looking" || name == "ForwardLooking")
        return QuestionType::ForwardLooking;
    return std::nullopt;
}

inline std::size_t type_index(QuestionType t) { return static_cast<std::size_t>(t); }

/// Order used by every deterministic tie-break ("lexicographically by type
/// name"). Background < Definition < Elaboration < Explanation <
/// Forward-looking < Instantiation < Other.
inline bool type_name_less(QuestionType a, QuestionType b) {
    return type_name(a) < type_name(b);
}

enum class Split { train, dev, test };

inline std::string_view split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        case Split::test: return "test";
    }
    return "";
}

inline std::optional<Split> parse_split(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "dev") return Split::dev;
    if (name == "test") return Split::test;
    return std::nullopt;
}

}  // namespace inqpipe
