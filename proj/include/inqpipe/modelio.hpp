// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "inqpipe/corpus.hpp"
#include "inqpipe/errors.hpp"
#include "inqpipe/metrics.hpp"
#include "inqpipe/rng.hpp"
#include "inqpipe/textproc.hpp"
#include "inqpipe/types.hpp"

namespace inqpipe {

struct GenerationRequest {
    std::string input;  // assembled ModelInput text
    DecodeParams params;
    std::optional<std::uint64_t> seed;
};

struct GenerationResponse {
    std::string question;
    int token_count = 0;
};

struct ClassifyResponse {
    ProbDist distribution;
};

struct PreferenceRequest {
    std::string source;
    std::string first;
    std::string second;

    std::string input_text() const {
        std::string text = source;
        text += kSep;
        text += first;
        text += kSep;
        text += second;
        return text;
    }
};

struct TokenScoreResponse {
    std::vector<double> logprobs;  // natural log, all <= 0
};

/// The single boundary to neural models. Implementations must be shareable
/// across worker threads.
class ModelClient {
public:
    virtual ~ModelClient() = default;
    virtual GenerationResponse generate(const GenerationRequest& request) const = 0;
    virtual ClassifyResponse classify_type(const std::string& input) const = 0;
    virtual double prefer(const PreferenceRequest& request) const = 0;
    virtual TokenScoreResponse score_tokens(const std::string& text) const = 0;
};

/// floor(0.06 * n_train * n_epochs / batch_size), computed in exact integer
/// arithmetic. Matches the warm-up schedule of the reference training
/// configs.
inline std::int64_t warmup_updates(std::int64_t n_train, std::int64_t n_epochs,
                                   std::int64_t batch_size) {
    if (n_train <= 0 || n_epochs <= 0 || batch_size <= 0)
        throw NonPositiveInput("warmup_updates requires positive inputs");
    return (6 * n_train * n_epochs) / (100 * batch_size);
}

// ---------------------------------------------------------------------------
// deterministic stub backend

/// Rule-free stand-in for the neural models: deterministic for a fixed
/// seed, so full pipeline runs are reproducible byte-for-byte without any
/// trained weights.
class StubClient : public ModelClient {
public:
    explicit StubClient(std::uint64_t seed = 0) : seed_(seed) {}

    /// Strict-total-order key the stub preference oracle uses; the question
    /// with the smallest key is the best one. Exposed for tests.
    std::uint64_t order_key(const std::string& question) const {
        return mix64(fnv1a64(question) ^ seed_);
    }

    GenerationResponse generate(const GenerationRequest& request) const override {
        request.params.validate();
        std::vector<std::string> segments = split_on_sep(request.input);
        std::optional<QuestionType> control;
        if (segments.size() == 4) control = parse_type(segments[3]);

        // keyword comes from the span segment when present, else the source
        const std::string& basis = segments.size() >= 3 ? segments[2]
                                   : segments.size() >= 2 ? segments[1]
                                                          : segments[0];
        TokenSeq basis_tokens = tokenize(basis);
        TokenSeq words;
        for (const std::string& t : basis_tokens)
            if (t.size() > 1 && !detail::is_ascii_punct(static_cast<unsigned char>(t[0])))
                words.push_back(t);
        std::uint64_t h = fnv1a64(request.input, request.seed.value_or(seed_) + 1);
        std::string keyword = words.empty() ? "this" : words[h % words.size()];

        std::vector<std::string> toks = template_tokens(control, segments.size(), keyword, h >> 32);
        const int min_t = request.params.min_tokens;
        const int max_t = request.params.max_tokens;
        while (static_cast<int>(toks.size()) < min_t)
            toks.insert(toks.end() - 1, "really");
        if (static_cast<int>(toks.size()) > max_t) {
            toks.resize(static_cast<std::size_t>(max_t));
            if (toks.back().back() != '?') toks.back() += "?";
        }
        std::string question;
        for (std::size_t i = 0; i < toks.size(); ++i) {
            if (i) question += ' ';
            question += toks[i];
        }
        return {question, static_cast<int>(toks.size())};
    }

    /// Leading-unigram rules mirroring the dominant question words of each
    /// annotated type; uniform when no rule fires.
    ClassifyResponse classify_type(const std::string& input) const override {
        std::vector<std::string> segments = split_on_sep(input);
        TokenSeq toks = tokenize(segments.back());
        static const std::map<std::string, QuestionType> rules = {
            {"why", QuestionType::Explanation},     {"if", QuestionType::Explanation},
            {"what", QuestionType::Elaboration},    {"how", QuestionType::Elaboration},
            {"in", QuestionType::Elaboration},      {"is", QuestionType::Background},
            {"where", QuestionType::Background},    {"are", QuestionType::Background},
            {"does", QuestionType::Definition},     {"definition", QuestionType::Definition},
            {"which", QuestionType::Instantiation}, {"who", QuestionType::Instantiation},
            {"at", QuestionType::Instantiation},    {"will", QuestionType::ForwardLooking},
            {"would", QuestionType::ForwardLooking}, {"did", QuestionType::ForwardLooking},
        };
        ClassifyResponse resp;
        auto it = toks.empty() ? rules.end() : rules.find(toks.front());
        if (it == rules.end()) {
            resp.distribution = ProbDist::uniform();
        } else {
            resp.distribution.probabilities.fill(0.05);
            resp.distribution.probabilities[type_index(it->second)] = 0.7;
        }
        resp.distribution.validate();
        return resp;
    }

    /// Fixed strict total order over question texts: 0.9 when the first
    /// question is the better one, 0.1 otherwise, 0.5 for identical texts.
    /// Transitive by construction.
    double prefer(const PreferenceRequest& request) const override {
        if (request.first == request.second) return 0.5;
        std::uint64_t ka = order_key(request.first);
        std::uint64_t kb = order_key(request.second);
        bool first_better = ka < kb || (ka == kb && request.first < request.second);
        return first_better ? 0.9 : 0.1;
    }

    /// Constant ln 0.5 per whitespace token, i.e. perplexity 2 for any text.
    TokenScoreResponse score_tokens(const std::string& text) const override {
        std::istringstream in(text);
        std::string tok;
        std::size_t count = 0;
        while (in >> tok) ++count;
        if (count == 0) throw EmptyText("score_tokens over empty text");
        return {std::vector<double>(count, std::log(0.5))};
    }

private:
    static std::vector<std::string> template_tokens(std::optional<QuestionType> control,
                                                    std::size_t segment_count,
                                                    const std::string& keyword,
                                                    std::uint64_t variant) {
        auto make = [&](std::string_view a, std::string_view b) {
            std::string text(variant % 2 == 0 ? a : b);
            std::size_t pos = text.find("{}");
            text.replace(pos, 2, keyword);
            std::vector<std::string> toks;
            std::istringstream in(text);
            std::string tok;
            while (in >> tok) toks.push_back(tok);
            return toks;
        };
        if (control) {
            switch (*control) {
                case QuestionType::Explanation:
                    return make("why did the {} happen?", "why is the {} important?");
                case QuestionType::Elaboration:
                    return make("what are the details of the {}?", "what more is known about the {}?");
                case QuestionType::Background:
                    return make("is the {} expected to continue?", "is there history behind the {}?");
                case QuestionType::Definition:
                    return make("does the {} mean something specific?", "does the term {} have a definition?");
                case QuestionType::Instantiation:
                    return make("which {} are involved here?", "which of the {} is meant?");
                case QuestionType::ForwardLooking:
                    return make("will the {} continue from here?", "will the {} change going forward?");
                case QuestionType::Other:
                    break;
            }
        }
        if (segment_count >= 3) return make("how will the {} be handled?", "how did the {} come about?");
        return make("what kind of {} is this?", "what happened with the {}?");
    }

    std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// HTTP service backend

struct HttpClientOptions {
    int retries = 3;               // retries after the first attempt
    int backoff_initial_ms = 100;  // doubled after every failed attempt
    int timeout_seconds = 30;
    int max_concurrent = 8;  // per-endpoint concurrent request cap
};

/// JSON-over-HTTP client for an external inference service exposing
/// /generate, /classify, /prefer and /score_tokens. Every response is
/// validated against the type invariants before use.
class HttpClient : public ModelClient {
public:
    explicit HttpClient(std::string base_url, HttpClientOptions options = {})
        : base_url_(std::move(base_url)),
          options_(options),
          slots_(std::make_unique<std::counting_semaphore<>>(options.max_concurrent)) {}

    GenerationResponse generate(const GenerationRequest& request) const override {
        request.params.validate();
        nlohmann::json body = {
            {"input", request.input},
            {"top_k", request.params.top_k},
            {"min_tokens", request.params.min_tokens},
            {"max_tokens", request.params.max_tokens},
            {"length_penalty", request.params.length_penalty},
        };
        if (request.seed) body["seed"] = *request.seed;
        nlohmann::json reply = post_json("/generate", body);
        if (!reply.contains("question") || !reply["question"].is_string() ||
            !reply.contains("token_count") || !reply["token_count"].is_number_integer())
            throw BadResponse("/generate reply missing question/token_count");
        GenerationResponse resp{reply["question"].get<std::string>(),
                                reply["token_count"].get<int>()};
        if (resp.token_count < request.params.min_tokens ||
            resp.token_count > request.params.max_tokens)
            throw LengthViolation("/generate returned " + std::to_string(resp.token_count) +
                                  " tokens outside [" + std::to_string(request.params.min_tokens) +
                                  ", " + std::to_string(request.params.max_tokens) + "]");
        return resp;
    }

    ClassifyResponse classify_type(const std::string& input) const override {
        nlohmann::json reply = post_json("/classify", {{"input", input}});
        if (!reply.contains("probabilities") || !reply["probabilities"].is_array() ||
            reply["probabilities"].size() != kNumTypes)
            throw BadResponse("/classify reply must carry 7 probabilities");
        ClassifyResponse resp;
        for (std::size_t i = 0; i < kNumTypes; ++i) {
            if (!reply["probabilities"][i].is_number())
                throw BadResponse("/classify probabilities must be numbers");
            resp.distribution.probabilities[i] = reply["probabilities"][i].get<double>();
        }
        resp.distribution.validate();  // throws InvalidDistribution
        return resp;
    }

    double prefer(const PreferenceRequest& request) const override {
        nlohmann::json reply = post_json(
            "/prefer",
            {{"source", request.source}, {"first", request.first}, {"second", request.second}});
        if (!reply.contains("probability") || !reply["probability"].is_number())
            throw BadResponse("/prefer reply missing probability");
        double p = reply["probability"].get<double>();
        if (!(p >= 0.0 && p <= 1.0))
            throw OutOfRange("/prefer probability " + std::to_string(p));
        return p;
    }

    TokenScoreResponse score_tokens(const std::string& text) const override {
        if (text.empty()) throw EmptyText("score_tokens over empty text");
        nlohmann::json reply = post_json("/score_tokens", {{"text", text}});
        if (!reply.contains("logprobs") || !reply["logprobs"].is_array() ||
            reply["logprobs"].empty())
            throw BadResponse("/score_tokens reply missing logprobs");
        TokenScoreResponse resp;
        for (const auto& v : reply["logprobs"]) {
            if (!v.is_number()) throw BadResponse("/score_tokens logprobs must be numbers");
            double lp = v.get<double>();
            if (lp > 0.0) throw BadResponse("/score_tokens returned positive log-prob");
            resp.logprobs.push_back(lp);
        }
        return resp;
    }

private:
    nlohmann::json post_json(const std::string& path, const nlohmann::json& body) const {
        slots_->acquire();
        struct Release {
            std::counting_semaphore<>* s;
            ~Release() { s->release(); }
        } release{slots_.get()};

        const std::string payload = body.dump();
        std::string last_error;
        int backoff_ms = options_.backoff_initial_ms;
        for (int attempt = 0; attempt <= options_.retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
                backoff_ms *= 2;
            }
            httplib::Client cli(base_url_);
            cli.set_connection_timeout(options_.timeout_seconds, 0);
            cli.set_read_timeout(options_.timeout_seconds, 0);
            httplib::Result res = cli.Post(path, payload, "application/json");
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;  // transport failure: retry
            }
            if (res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;  // server-side failure: retry
            }
            if (res->status != 200)
                throw BadResponse(path + " returned HTTP " + std::to_string(res->status));
            try {
                return nlohmann::json::parse(res->body);
            } catch (const nlohmann::json::parse_error& e) {
                throw BadResponse(path + " returned invalid JSON: " + std::string(e.what()));
            }
        }
        throw Timeout(path + " failed after " + std::to_string(options_.retries + 1) +
                      " attempts: " + last_error);
    }

    std::string base_url_;
    HttpClientOptions options_;
    std::unique_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace inqpipe
