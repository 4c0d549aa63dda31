// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "inqpipe/metrics.hpp"
#include "support.hpp"

using namespace inqpipe;
using Catch::Matchers::WithinAbs;

TEST_CASE("corpus_bleu identities and hand-derived values") {
    SECTION("identical corpora score 1 for every max_n") {
        std::vector<TokenPair> pairs = {
            {{"why", "did", "he", "go", "?"}, {"why", "did", "he", "go", "?"}},
            {{"what", "is", "that", "?"}, {"what", "is", "that", "?"}},
        };
        for (std::size_t n = 1; n <= 4; ++n)
            CHECK_THAT(corpus_bleu(pairs, n), WithinAbs(1.0, 1e-12));
    }
    SECTION("clipping: the/the/the against the/cat") {
        std::vector<TokenPair> pairs = {{{"the", "the", "the"}, {"the", "cat"}}};
        CHECK_THAT(corpus_bleu(pairs, 1), WithinAbs(1.0 / 3.0, 1e-12));
    }
    SECTION("disjoint vocabulary scores zero") {
        std::vector<TokenPair> pairs = {{{"aa", "bb"}, {"cc", "dd"}}};
        CHECK(corpus_bleu(pairs, 1) == 0.0);
    }
    SECTION("brevity penalty fires when candidates are shorter") {
        std::vector<TokenPair> pairs = {{{"the", "cat"}, {"the", "cat", "sat", "on"}}};
        // p1 = 1, p2 = 1/1, BP = exp(1 - 4/2)
        CHECK_THAT(corpus_bleu(pairs, 2), WithinAbs(std::exp(-1.0), 1e-12));
    }
    SECTION("any zero precision zeroes the score") {
        std::vector<TokenPair> pairs = {{{"the", "big", "cat"}, {"cat", "big", "the"}}};
        CHECK(corpus_bleu(pairs, 1) > 0.0);
        CHECK(corpus_bleu(pairs, 2) == 0.0);  // no bigram overlap
    }
    SECTION("errors") {
        CHECK_THROWS_AS(corpus_bleu({}, 1), EmptyCorpus);
        CHECK_THROWS_AS(corpus_bleu({{{"a"}, {"a"}}}, 0), InvalidN);
    }
}

TEST_CASE("rouge_l hand-derived values and symmetry") {
    TokenSeq cand = {"the", "cat", "sat", "on", "the", "mat"};
    TokenSeq ref = {"the", "cat", "on", "the", "mat"};
    CHECK_THAT(rouge_l(cand, ref), WithinAbs(10.0 / 11.0, 1e-12));
    CHECK(rouge_l(cand, cand) == 1.0);
    CHECK(rouge_l({"aa"}, {"bb"}) == 0.0);
    CHECK(rouge_l({}, ref) == 0.0);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        TokenSeq a = testsupport::random_tokens(rng, 0, 10);
        TokenSeq b = testsupport::random_tokens(rng, 0, 10);
        CHECK(rouge_l(a, b) == rouge_l(b, a));
    }
}

TEST_CASE("meteor_lite formula evaluation") {
    SECTION("identical sequences: 1 - 0.5/m^3 shape") {
        TokenSeq toks = {"the", "cat", "sat"};
        CHECK_THAT(meteor_lite(toks, toks), WithinAbs(1.0 - 0.5 / 27.0, 1e-12));
    }
    SECTION("swapped pair: Fmean 1, two chunks, penalty 0.5") {
        CHECK_THAT(meteor_lite({"the", "cat"}, {"cat", "the"}), WithinAbs(0.5, 1e-12));
    }
    SECTION("no matches") {
        CHECK(meteor_lite({"aa"}, {"bb"}) == 0.0);
        CHECK(meteor_lite({}, {"bb"}) == 0.0);
    }
    SECTION("partial match favors recall 9:1") {
        // cand [a b], ref [a c]: m=1, chunks=1, P=R=0.5, Fmean=0.5
        double expected = 0.5 * (1.0 - 0.5);
        CHECK_THAT(meteor_lite({"a", "b"}, {"a", "c"}), WithinAbs(expected, 1e-12));
    }
}

TEST_CASE("overlap metrics stay in range on random input") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        TokenSeq a = testsupport::random_tokens(rng, 1, 12);
        TokenSeq b = testsupport::random_tokens(rng, 1, 12);
        double r = rouge_l(a, b);
        double m = meteor_lite(a, b);
        double bleu = corpus_bleu({{a, b}}, 2);
        CHECK((r >= 0.0 && r <= 1.0));
        CHECK((m >= 0.0 && m <= 1.0));
        CHECK((bleu >= 0.0 && bleu <= 1.0));
        // exact equality only at full token equality
        if (a != b) CHECK(corpus_bleu({{a, b}}, 4) < 1.0);
    }
}

TEST_CASE("train_n hand-derived values") {
    std::vector<TokenSeq> generated = {{"why", "did", "he", "go"}};
    std::vector<TokenSeq> train = {{"why", "did", "she", "leave"}};
    CHECK_THAT(train_n(generated, train, 2), WithinAbs(1.0 / 3.0, 1e-12));
    CHECK(train_n({{"why", "did", "he", "go"}}, {{"why", "did", "he", "go"}}, 2) == 1.0);
    CHECK(train_n({{"aa", "bb"}}, {{"cc", "dd"}}, 1) == 0.0);
    CHECK_THROWS_AS(train_n(generated, train, 0), InvalidN);
}

TEST_CASE("train_n is a pooled ratio over the collection") {
    // 3 bigrams in q1 (one shared), 1 bigram in q2 (shared): (1+1)/(3+1)
    std::vector<TokenSeq> generated = {{"why", "did", "he", "go"}, {"why", "did"}};
    std::vector<TokenSeq> train = {{"why", "did", "she", "leave"}};
    CHECK_THAT(train_n(generated, train, 2), WithinAbs(2.0 / 4.0, 1e-12));
}

TEST_CASE("article_n hand-derived value on the worked instance") {
    Instance inst = testsupport::table1_instance();
    TokenSeq question = {"why", "did", "santa", "fe", "review"};
    CHECK_THAT(article_n(question, inst, 2), WithinAbs(1.0 / 4.0, 1e-12));
    // question copied verbatim from inside the source sentence
    TokenSeq copied = tokenize("expected to review the plan at a meeting");
    CHECK(article_n(copied, inst, 2) == 1.0);
    CHECK(article_n({"zz", "qq"}, inst, 1) == 0.0);
}

TEST_CASE("span_overlap hand-derived values") {
    CHECK(span_overlap(tokenize("How will the directors review the plan?"), "review") == 1.0);
    CHECK(span_overlap(tokenize("How can a book provoke hatred and enmity?"),
                       "hatred and enmity") == 1.0);
    CHECK(span_overlap(tokenize("Unrelated words entirely?"), "hatred and enmity") == 0.0);
    CHECK_THAT(span_overlap(tokenize("only hatred here"), "hatred and enmity"),
               WithinAbs(1.0 / 3.0, 1e-12));
    CHECK_THROWS_AS(span_overlap({"a"}, ""), EmptySpan);
}

TEST_CASE("copying metrics match the brute-force oracle exactly") {
    std::mt19937_64 rng(41);
    for (int corpus_trial = 0; corpus_trial < 50; ++corpus_trial) {
        std::vector<TokenSeq> generated, train;
        std::size_t gen_count = 1 + rng() % 6, train_count = rng() % 6;
        for (std::size_t i = 0; i < gen_count; ++i)
            generated.push_back(testsupport::random_tokens(rng, 0, 12));
        for (std::size_t i = 0; i < train_count; ++i)
            train.push_back(testsupport::random_tokens(rng, 0, 12));
        std::size_t n = 1 + rng() % 3;
        double got = train_n(generated, train, n);
        double expected = testsupport::oracle_train_n(generated, train, n);
        REQUIRE(got == expected);  // bit-for-bit

        Instance inst = testsupport::synthetic_corpus(1, rng()).instances[0];
        TokenSeq question = testsupport::random_tokens(rng, 1, 12);
        REQUIRE(article_n(question, inst, n) ==
                testsupport::oracle_article_n(question, inst.context, inst.source, n));
        REQUIRE(span_overlap(question, inst.span_text()) ==
                testsupport::oracle_span_overlap(question, inst.span_text()));
    }
}

TEST_CASE("type_entropy closed forms") {
    CHECK(type_entropy(ProbDist::one_hot(QuestionType::Definition)) == 0.0);
    CHECK_THAT(type_entropy(ProbDist::uniform()), WithinAbs(std::log(7.0), 1e-12));
    ProbDist half;
    half.probabilities[0] = 0.5;
    half.probabilities[1] = 0.5;
    CHECK_THAT(type_entropy(half), WithinAbs(std::log(2.0), 1e-12));
}

TEST_CASE("type_entropy is maximal at uniform and permutation-invariant") {
    std::mt19937_64 rng(55);
    double uniform_entropy = type_entropy(ProbDist::uniform());
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, kNumTypes> raw{};
        double sum = 0.0;
        for (double& p : raw) {
            p = static_cast<double>(rng() % 1000 + 1);
            sum += p;
        }
        ProbDist dist;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < kNumTypes; ++i) {
            dist.probabilities[i] = raw[i] / sum;
            acc += dist.probabilities[i];
        }
        dist.probabilities[kNumTypes - 1] = 1.0 - acc;  // exact unit sum
        double h = type_entropy(dist);
        CHECK(h <= uniform_entropy + 1e-12);
        ProbDist rotated;
        for (std::size_t i = 0; i < kNumTypes; ++i)
            rotated.probabilities[(i + 3) % kNumTypes] = dist.probabilities[i];
        CHECK_THAT(type_entropy(rotated), WithinAbs(h, 1e-12));
    }
}

TEST_CASE("type_entropy rejects invalid distributions") {
    ProbDist bad;
    bad.probabilities.fill(0.2);  // sums to 1.4
    CHECK_THROWS_AS(type_entropy(bad), InvalidDistribution);
    ProbDist negative = ProbDist::one_hot(QuestionType::Other);
    negative.probabilities[0] = -0.1;
    negative.probabilities[1] = 0.1;
    CHECK_THROWS_AS(type_entropy(negative), InvalidDistribution);
}

TEST_CASE("perplexity closed forms") {
    CHECK_THAT(perplexity({0.0, 0.0, 0.0}), WithinAbs(1.0, 1e-12));
    CHECK_THAT(perplexity(std::vector<double>(4, std::log(0.5))), WithinAbs(2.0, 1e-12));
    CHECK_THAT(perplexity({std::log(0.5), std::log(0.25)}),
               WithinAbs(2.0 * std::sqrt(2.0), 1e-12));
    CHECK_THROWS_AS(perplexity({}), EmptySequence);
}

TEST_CASE("controllability confusion matrix and per-type accuracy") {
    SECTION("perfect prediction") {
        std::vector<QuestionType> requested(generatable_types.begin(), generatable_types.end());
        ControllabilityResult r = controllability(requested, requested);
        for (QuestionType t : generatable_types) {
            CHECK(r.matrix.counts[type_index(t)][type_index(t)] == 1);
            CHECK(r.matrix.row_sum(t) == 1);
            CHECK(r.per_type_accuracy[type_index(t)] == 1.0);
        }
    }
    SECTION("half-right explanation row") {
        auto& handler = warning_handler();
        auto saved = handler;
        handler = [](const std::string&) {};  // rows with no generations warn
        std::vector<QuestionType> requested = {QuestionType::Explanation,
                                               QuestionType::Explanation};
        std::vector<QuestionType> predicted = {QuestionType::Explanation,
                                               QuestionType::Background};
        ControllabilityResult r = controllability(requested, predicted);
        CHECK(r.per_type_accuracy[type_index(QuestionType::Explanation)] == 0.5);
        CHECK(r.matrix.row_sum(QuestionType::Explanation) == 2);
        CHECK(r.matrix.counts[type_index(QuestionType::Explanation)]
                             [type_index(QuestionType::Background)] == 1);
        handler = saved;
    }
    SECTION("predicted Other lands in the seventh column") {
        auto& handler = warning_handler();
        auto saved = handler;
        handler = [](const std::string&) {};
        std::vector<QuestionType> requested = {QuestionType::Definition};
        std::vector<QuestionType> predicted = {QuestionType::Other};
        ControllabilityResult r = controllability(requested, predicted);
        CHECK(r.matrix.counts[type_index(QuestionType::Definition)]
                             [type_index(QuestionType::Other)] == 1);
        CHECK(r.matrix.row_sum(QuestionType::Definition) == 1);
        CHECK(r.per_type_accuracy[type_index(QuestionType::Definition)] == 0.0);
        handler = saved;
    }
    SECTION("errors") {
        CHECK_THROWS_AS(controllability({QuestionType::Explanation}, {}), LengthMismatch);
        CHECK_THROWS_AS(
            controllability({QuestionType::Other}, {QuestionType::Other}),
            OtherNotGeneratable);
    }
}

TEST_CASE("aggregate_runs mean and sample standard deviation") {
    RunSummary constant = aggregate_runs({4, 4, 4});
    CHECK(constant.mean == 4.0);
    CHECK(constant.stddev == 0.0);

    RunSummary spread = aggregate_runs({1, 2, 3});
    CHECK(spread.mean == 2.0);
    CHECK_THAT(spread.stddev, WithinAbs(1.0, 1e-12));

    RunSummary single = aggregate_runs({7});
    CHECK(single.mean == 7.0);
    CHECK(single.stddev == 0.0);

    CHECK_THROWS_AS(aggregate_runs({}), EmptyList);
}
