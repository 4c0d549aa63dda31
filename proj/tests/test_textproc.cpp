// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>

#include "inqpipe/textproc.hpp"
#include "support.hpp"

using namespace inqpipe;

TEST_CASE("tokenize applies the lowercase/split/detach rules") {
    CHECK(tokenize("Why did he go?") == TokenSeq{"why", "did", "he", "go", "?"});
    CHECK(tokenize("") == TokenSeq{});
    CHECK(tokenize("third-quarter profit dropped 41%.") ==
          TokenSeq{"third-quarter", "profit", "dropped", "41", "%", "."});
}

TEST_CASE("tokenize keeps internal hyphens and apostrophes") {
    CHECK(tokenize("it's a so-called 'deal'") ==
          TokenSeq{"it's", "a", "so-called", "'", "deal", "'"});
    CHECK(tokenize("(hello)") == TokenSeq{"(", "hello", ")"});
    CHECK(tokenize("--") == TokenSeq{"-", "-"});
}

TEST_CASE("tokenize splits on unicode whitespace") {
    // U+00A0 no-break space and U+2009 thin space
    CHECK(tokenize("a\xc2\xa0"
                   "b\xe2\x80\x89"
                   "c") == TokenSeq{"a", "b", "c"});
}

TEST_CASE("tokenize is idempotent on its own joined output") {
    std::mt19937_64 rng(17);
    std::vector<std::string> texts = {
        "Why are they reviewing the plan?",
        "What is the \"arms plug\"?",
        "How much has inflation?  (really)",
        "it's third-quarter: profit fell 41%, to $42.7 million!",
    };
    for (std::size_t i = 0; i < 50; ++i)
        texts.push_back(testsupport::join_tokens(testsupport::random_tokens(rng, 1, 12)) + "?");
    for (const std::string& text : texts) {
        TokenSeq once = tokenize(text);
        TokenSeq twice = tokenize(testsupport::join_tokens(once));
        CHECK(once == twice);
        for (const std::string& tok : once) {
            CHECK(!tok.empty());
            CHECK(tok.find(' ') == std::string::npos);
        }
    }
}

TEST_CASE("ngrams enumerates windows with multiplicity") {
    NgramBag bag = ngrams({"a", "b", "c"}, 2);
    CHECK(bag.total == 2);
    CHECK(bag.counts.at({"a", "b"}) == 1);
    CHECK(bag.counts.at({"b", "c"}) == 1);

    CHECK(ngrams({"a"}, 2).total == 0);
    CHECK(ngrams({"a", "a", "a"}, 2).counts.at({"a", "a"}) == 2);
    CHECK_THROWS_AS(ngrams({"a"}, 0), InvalidN);
}

TEST_CASE("ngram multiplicities always sum to max(0, len - n + 1)") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        TokenSeq tokens = testsupport::random_tokens(rng, 0, 12);
        std::size_t n = 1 + rng() % 4;
        NgramBag bag = ngrams(tokens, n);
        std::size_t expected = tokens.size() + 1 > n ? tokens.size() - n + 1 : 0;
        std::size_t sum = 0;
        for (const auto& [gram, count] : bag.counts) sum += count;
        CHECK(sum == expected);
        CHECK(bag.total == expected);
    }
}

TEST_CASE("leading_ngram_table counts first tokens per type") {
    std::vector<std::pair<QuestionType, std::string>> questions = {
        {QuestionType::Explanation, "why is it"},
        {QuestionType::Explanation, "why did he"},
        {QuestionType::Background, "what is that"},
    };
    auto rows = leading_ngram_table(questions, 1);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].type == QuestionType::Explanation);
    CHECK(rows[0].ngram == "why");
    CHECK(rows[0].count == 2);
    CHECK(rows[1].type == QuestionType::Background);
    CHECK(rows[1].ngram == "what");
    CHECK(rows[1].count == 1);

    auto bigrams = leading_ngram_table(questions, 2);
    REQUIRE(bigrams.size() == 3);
    CHECK(bigrams[0].ngram == "why did");  // count tie broken lexicographically
    CHECK(bigrams[1].ngram == "why is");
    CHECK(bigrams[2].ngram == "what is");
}

TEST_CASE("leading_ngram_table edge cases") {
    CHECK(leading_ngram_table({}, 1).empty());
    CHECK_THROWS_AS(leading_ngram_table({{QuestionType::Other, ""}}, 1), EmptyQuestion);
    CHECK_THROWS_AS(leading_ngram_table({}, 3), InvalidN);
    // a one-token question contributes no leading bigram
    auto rows = leading_ngram_table({{QuestionType::Definition, "what?"}}, 2);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ngram == "what ?");
}

TEST_CASE("leading_ngram_table counts per type sum to the question count") {
    std::mt19937_64 rng(31);
    std::vector<std::pair<QuestionType, std::string>> questions;
    std::map<QuestionType, std::size_t> per_type;
    for (int i = 0; i < 300; ++i) {
        QuestionType t = all_types[rng() % all_types.size()];
        // at least two tokens so both unigram and bigram rows cover it
        std::string q = testsupport::join_tokens(testsupport::random_tokens(rng, 2, 6));
        questions.emplace_back(t, q);
        ++per_type[t];
    }
    for (std::size_t n : {std::size_t{1}, std::size_t{2}}) {
        auto rows = leading_ngram_table(questions, n);
        std::map<QuestionType, std::size_t> sums;
        for (const auto& row : rows) sums[row.type] += row.count;
        CHECK(sums == per_type);
    }
}
