// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "inqpipe/annotation.hpp"
#include "inqpipe/corpus.hpp"
#include "inqpipe/errors.hpp"
#include "inqpipe/io.hpp"
#include "inqpipe/metrics.hpp"
#include "inqpipe/modelio.hpp"
#include "inqpipe/ranking.hpp"
#include "inqpipe/serialization.hpp"
#include "inqpipe/textproc.hpp"
#include "inqpipe/types.hpp"

namespace inqpipe {

// exit codes: 0 clean, 1 fatal, 3 completed with quarantined instance errors
inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitQuarantined = 3;

inline const std::vector<std::string>& known_strategies() {
    static const std::vector<std::string> all = {"base", "span", "per-type",
                                                 "type_s", "type_r", "type_o"};
    return all;
}

struct RunConfig {
    std::string corpus_path;
    std::string backend = "stub";  // stub | service
    std::string endpoint;          // service base URL; INQPIPE_ENDPOINT overrides
    std::uint64_t seed = 0;
    DecodeParams decode;
    std::string out_dir = "out";
    std::vector<std::string> strategies;
    std::string split = "test";  // train | dev | test | all
    std::size_t limit = 0;       // 0 = unlimited
    int workers = 4;
    int max_concurrent = 8;  // per-endpoint in-flight request cap (service backend)

    void validate_strategies() const {
        if (strategies.empty()) throw ConfigError("no strategies configured");
        const auto& known = known_strategies();
        for (const std::string& s : strategies) {
            if (std::find(known.begin(), known.end(), s) == known.end())
                throw ConfigError("unknown strategy: " + s);
        }
    }
};

/// key = value table, '#' starts a comment. Unknown keys are rejected.
inline void apply_config_line(RunConfig& config, const std::string& key, const std::string& value) {
    auto to_u64 = [&](const std::string& v) {
        try {
            return static_cast<std::uint64_t>(std::stoull(v));
        } catch (...) {
            throw ConfigError("invalid number for " + key + ": " + v);
        }
    };
    auto to_int = [&](const std::string& v) {
        try {
            return std::stoi(v);
        } catch (...) {
            throw ConfigError("invalid number for " + key + ": " + v);
        }
    };
    if (key == "corpus") config.corpus_path = value;
    else if (key == "backend") config.backend = value;
    else if (key == "endpoint") config.endpoint = value;
    else if (key == "seed") config.seed = to_u64(value);
    else if (key == "out_dir") config.out_dir = value;
    else if (key == "split") config.split = value;
    else if (key == "limit") config.limit = to_u64(value);
    else if (key == "workers") config.workers = to_int(value);
    else if (key == "max_concurrent") config.max_concurrent = to_int(value);
    else if (key == "top_k") config.decode.top_k = to_int(value);
    else if (key == "min_tokens") config.decode.min_tokens = to_int(value);
    else if (key == "max_tokens") config.decode.max_tokens = to_int(value);
    else if (key == "length_penalty") config.decode.length_penalty = std::stod(value);
    else if (key == "strategies") {
        config.strategies.clear();
        std::istringstream in(value);
        std::string item;
        while (std::getline(in, item, ',')) {
            item.erase(0, item.find_first_not_of(" \t"));
            item.erase(item.find_last_not_of(" \t") + 1);
            if (!item.empty()) config.strategies.push_back(item);
        }
    } else {
        throw ConfigError("unknown config key: " + key);
    }
}

inline RunConfig load_config_file(const std::string& path) {
    RunConfig config;
    for_each_line(path, [&](const std::string& raw, std::size_t line_no) {
        std::string line = raw.substr(0, raw.find('#'));
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t") != std::string::npos)
                throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
            return;
        }
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
            return s;
        };
        apply_config_line(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    });
    return config;
}

/// Precedence: flags > INQPIPE_ENDPOINT > config file.
inline void apply_endpoint_env(RunConfig& config) {
    if (const char* env = std::getenv("INQPIPE_ENDPOINT"); env && *env) config.endpoint = env;
}

// ---------------------------------------------------------------------------
// backend construction

struct Oracles {
    std::shared_ptr<ModelClient> client;
    InquisitivenessOracle inquisitiveness;
};

/// The inquisitive-vs-informative classifier sits outside the four core
/// model endpoints; the stub derives its score from the same total order
/// the stub preference oracle uses, and the service backend calls
/// /inquisitive.
inline Oracles make_oracles(const RunConfig& config) {
    if (config.backend == "stub") {
        auto stub = std::make_shared<StubClient>(config.seed);
        InquisitivenessOracle inq = [stub](const std::string& question) {
            // monotone decreasing in the stub order key: best question wins
            return 1.0 - static_cast<double>(stub->order_key(question)) /
                             (static_cast<double>(UINT64_MAX) + 1.0);
        };
        return {stub, inq};
    }
    if (config.backend == "service") {
        if (config.endpoint.empty())
            throw ConfigError("service backend requires an endpoint (flag, config or INQPIPE_ENDPOINT)");
        HttpClientOptions options;
        options.max_concurrent = config.max_concurrent;
        auto http = std::make_shared<HttpClient>(config.endpoint, options);
        std::string endpoint = config.endpoint;
        InquisitivenessOracle inq = [endpoint](const std::string& question) {
            httplib::Client cli(endpoint);
            cli.set_read_timeout(30, 0);
            nlohmann::json body = {{"question", question}};
            httplib::Result res = cli.Post("/inquisitive", body.dump(), "application/json");
            if (!res || res->status != 200)
                throw Timeout("/inquisitive failed: " +
                              (res ? "HTTP " + std::to_string(res->status)
                                   : httplib::to_string(res.error())));
            nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
            if (reply.is_discarded() || !reply.contains("probability") ||
                !reply["probability"].is_number())
                throw BadResponse("/inquisitive reply missing probability");
            double p = reply["probability"].get<double>();
            if (!(p >= 0.0 && p <= 1.0)) throw OutOfRange("/inquisitive probability out of range");
            return p;
        };
        return {http, inq};
    }
    throw ConfigError("backend must be stub or service, got: " + config.backend);
}

// ---------------------------------------------------------------------------
// manifest and quarantine

struct RunManifest {
    std::string command;
    RunConfig config;
    std::vector<std::pair<std::string, std::string>> inputs;   // (path, digest)
    std::vector<std::pair<std::string, std::string>> outputs;  // (path, digest)

    void add_input(const std::string& path) { inputs.emplace_back(path, file_digest(path)); }
    void add_output(const std::string& path) { outputs.emplace_back(path, file_digest(path)); }

    void write(const std::string& out_dir) const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["created"] = current_timestamp();
        nlohmann::ordered_json cfg;
        cfg["corpus"] = config.corpus_path;
        cfg["backend"] = config.backend;
        cfg["endpoint"] = config.endpoint;
        cfg["seed"] = config.seed;
        cfg["out_dir"] = config.out_dir;
        cfg["split"] = config.split;
        cfg["limit"] = config.limit;
        cfg["workers"] = config.workers;
        cfg["max_concurrent"] = config.max_concurrent;
        cfg["top_k"] = config.decode.top_k;
        cfg["min_tokens"] = config.decode.min_tokens;
        cfg["max_tokens"] = config.decode.max_tokens;
        cfg["length_penalty"] = format_double(config.decode.length_penalty, 2);
        cfg["strategies"] = config.strategies;
        j["config"] = cfg;
        auto files = [](const std::vector<std::pair<std::string, std::string>>& entries) {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const auto& [path, digest] : entries)
                arr.push_back({{"path", std::filesystem::path(path).filename().string()},
                               {"digest", digest}});
            return arr;
        };
        j["inputs"] = files(inputs);
        j["outputs"] = files(outputs);
        write_file((std::filesystem::path(out_dir) / ("manifest_" + command + ".json")).string(),
                   j.dump(2) + "\n");
    }

    static std::string current_timestamp() {
        std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        return buf;
    }
};

struct Quarantine {
    std::vector<std::string> lines;  // JSONL records, deterministic order

    void record(const std::string& instance_id, const std::string& stage,
                const std::string& message) {
        nlohmann::ordered_json j;
        j["instance_id"] = instance_id;
        j["stage"] = stage;
        j["error"] = message;
        lines.push_back(j.dump());
    }

    bool empty() const { return lines.empty(); }

    /// Writes errors_<command>.jsonl; absent when nothing was quarantined.
    void write(const std::string& out_dir, const std::string& command, RunManifest& manifest) const {
        if (lines.empty()) return;
        std::string path =
            (std::filesystem::path(out_dir) / ("errors_" + command + ".jsonl")).string();
        std::string content;
        for (const std::string& line : lines) content += line + "\n";
        write_file(path, content);
        manifest.add_output(path);
    }
};

namespace detail {

/// Runs fn(i) for i in [0, n) across `workers` threads. fn must only touch
/// slot i of any shared output. Thrown errors are returned per index so the
/// caller can quarantine them in deterministic order.
inline std::vector<std::optional<std::string>> parallel_for(
    std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    std::vector<std::optional<std::string>> errors(n);
    if (n == 0) return errors;
    const int thread_count = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    std::atomic<std::size_t> next{0};
    auto run = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            try {
                fn(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (thread_count == 1) {
        run();
    } else {
        std::vector<std::thread> threads;
        for (int t = 0; t < thread_count; ++t) threads.emplace_back(run);
        for (std::thread& t : threads) t.join();
    }
    return errors;
}

inline std::vector<const Instance*> select_instances(const Dataset& ds, const RunConfig& config) {
    std::vector<const Instance*> out;
    std::optional<Split> wanted;
    if (config.split != "all") {
        wanted = parse_split(config.split);
        if (!wanted) throw ConfigError("split must be train/dev/test/all, got: " + config.split);
    }
    for (const Instance& inst : ds.instances) {
        if (!wanted || inst.split == *wanted) out.push_back(&inst);
        if (config.limit > 0 && out.size() == config.limit) break;
    }
    return out;
}

inline std::string out_path(const RunConfig& config, const std::string& name) {
    std::filesystem::create_directories(config.out_dir);
    return (std::filesystem::path(config.out_dir) / name).string();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generate

/// One question per (instance, control code) for per-type generation, one
/// per instance for base/span. Output order follows the corpus.
inline int cmd_generate(const RunConfig& config) {
    config.validate_strategies();
    config.decode.validate();
    bool want_base = false, want_span = false, want_per_type = false;
    for (const std::string& s : config.strategies) {
        if (s == "base") want_base = true;
        else if (s == "span") want_span = true;
        else want_per_type = true;  // per-type and every selection strategy
    }

    Dataset ds = load_dataset(config.corpus_path);
    std::vector<const Instance*> instances = detail::select_instances(ds, config);
    Oracles oracles = make_oracles(config);

    std::vector<std::vector<GenerationRecord>> per_instance(instances.size());
    auto errors = detail::parallel_for(instances.size(), config.workers, [&](std::size_t i) {
        const Instance& inst = *instances[i];
        std::vector<GenerationRecord>& records = per_instance[i];
        auto generate_one = [&](Strategy strategy, std::optional<QuestionType> control,
                                const std::string& strategy_label) {
            ModelInput input = build_model_input(inst, strategy, control);
            GenerationResponse resp =
                oracles.client->generate({input.text, config.decode, config.seed});
            records.push_back(
                {inst.instance_id, strategy_label, control, resp.question, resp.token_count});
        };
        if (want_base) generate_one(Strategy::BASE, std::nullopt, "base");
        if (want_span) generate_one(Strategy::SPAN, std::nullopt, "span");
        if (want_per_type) {
            for (QuestionType t : generatable_types) generate_one(Strategy::TYPE, t, "per-type");
        }
    });

    RunManifest manifest{"generate", config, {}, {}};
    manifest.add_input(config.corpus_path);
    Quarantine quarantine;
    std::string content;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (errors[i]) {
            quarantine.record(instances[i]->instance_id, "generate", *errors[i]);
            continue;
        }
        for (const GenerationRecord& rec : per_instance[i]) content += to_jsonl(rec) + "\n";
    }
    std::string out = detail::out_path(config, "generations.jsonl");
    write_file(out, content);
    manifest.add_output(out);
    quarantine.write(config.out_dir, "generate", manifest);
    manifest.write(config.out_dir);
    return quarantine.empty() ? kExitOk : kExitQuarantined;
}

// ---------------------------------------------------------------------------
// select

/// Applies the configured selection strategies to per-type generations.
/// base/span generations pass through so that one selections file feeds
/// evaluation for every strategy.
inline int cmd_select(const RunConfig& config, const std::string& generations_path) {
    config.validate_strategies();
    Dataset ds = load_dataset(config.corpus_path);
    std::map<std::string, const Instance*> by_id;
    for (const Instance& inst : ds.instances) by_id[inst.instance_id] = &inst;

    std::vector<GenerationRecord> generations = load_generations(generations_path);
    Oracles oracles = make_oracles(config);

    // group per-type questions and passthrough records by instance, in
    // first-seen file order
    std::vector<std::string> instance_order;
    std::map<std::string, std::map<QuestionType, std::string>> typed;
    std::map<std::string, std::vector<const GenerationRecord*>> passthrough;
    std::set<std::string> seen;
    for (const GenerationRecord& rec : generations) {
        if (seen.insert(rec.instance_id).second) instance_order.push_back(rec.instance_id);
        if (rec.strategy == "per-type" && rec.control)
            typed[rec.instance_id][*rec.control] = rec.question;
        else if (rec.strategy == "base" || rec.strategy == "span")
            passthrough[rec.instance_id].push_back(&rec);
    }

    std::vector<std::string> selection_strategies;
    for (const char* s : {"type_s", "type_r", "type_o"})
        if (std::find(config.strategies.begin(), config.strategies.end(), s) !=
            config.strategies.end())
            selection_strategies.emplace_back(s);

    std::vector<std::vector<SelectionRecord>> per_instance(instance_order.size());
    auto errors = detail::parallel_for(instance_order.size(), config.workers, [&](std::size_t i) {
        const std::string& id = instance_order[i];
        std::vector<SelectionRecord>& records = per_instance[i];
        if (auto it = passthrough.find(id); it != passthrough.end()) {
            for (const GenerationRecord* rec : it->second)
                records.push_back({id, rec->strategy, std::nullopt, rec->question, std::nullopt});
        }
        if (selection_strategies.empty()) return;

        auto inst_it = by_id.find(id);
        if (inst_it == by_id.end())
            throw AlignmentError("instance " + id + " not present in the corpus");
        const Instance& inst = *inst_it->second;
        auto typed_it = typed.find(id);
        const auto& questions = typed_it == typed.end()
                                    ? std::map<QuestionType, std::string>{}
                                    : typed_it->second;
        for (QuestionType t : generatable_types) {
            if (!questions.count(t))
                throw MissingType("instance " + id + " lacks a " + std::string(type_name(t)) +
                                  " generation");
        }

        for (const std::string& strategy : selection_strategies) {
            if (strategy == "type_s") {
                QuestionType chosen = select_type_s(questions, oracles.inquisitiveness);
                records.push_back({id, "type_s", chosen, questions.at(chosen), std::nullopt});
            } else if (strategy == "type_r") {
                PreferenceOracle pref = [&](const std::string& source, const std::string& a,
                                            const std::string& b) {
                    return oracles.client->prefer({source, a, b});
                };
                auto [chosen, tally] = select_type_r(inst.source, questions, pref);
                records.push_back({id, "type_r", chosen, questions.at(chosen), tally});
            } else {
                TypeClassifierOracle classifier = [&](const std::string& input) {
                    return oracles.client->classify_type(input).distribution;
                };
                QuestionType chosen = select_type_o(inst, inst.question, classifier);
                records.push_back({id, "type_o", chosen, questions.at(chosen), std::nullopt});
            }
        }
    });

    RunManifest manifest{"select", config, {}, {}};
    manifest.add_input(config.corpus_path);
    manifest.add_input(generations_path);
    Quarantine quarantine;
    std::string content;
    for (std::size_t i = 0; i < instance_order.size(); ++i) {
        if (errors[i]) {
            quarantine.record(instance_order[i], "select", *errors[i]);
            continue;
        }
        for (const SelectionRecord& rec : per_instance[i]) content += to_jsonl(rec) + "\n";
    }
    std::string out = detail::out_path(config, "selections.jsonl");
    write_file(out, content);
    manifest.add_output(out);
    quarantine.write(config.out_dir, "select", manifest);
    manifest.write(config.out_dir);
    return quarantine.empty() ? kExitOk : kExitQuarantined;
}

// ---------------------------------------------------------------------------
// evaluate

namespace detail {

inline std::vector<std::string> strategy_report_order(const std::set<std::string>& present) {
    std::vector<std::string> order;
    for (const std::string& s : known_strategies())
        if (present.count(s)) order.push_back(s);
    for (const std::string& s : present)
        if (std::find(order.begin(), order.end(), s) == order.end()) order.push_back(s);
    return order;
}

inline std::string metrics_tsv(const std::vector<MetricReport>& rows) {
    TsvWriter tsv(metric_report_columns());
    for (const MetricReport& r : rows) {
        tsv.row({r.model, format_double(r.bleu_1), format_double(r.bleu_2),
                 format_double(r.bleu_3), format_double(r.bleu_4), format_double(r.meteor),
                 format_double(r.rouge_l), r.f_bert ? format_double(*r.f_bert) : "-",
                 format_double(r.gpt2_ppl), format_double(r.entropy), format_double(r.train_2),
                 format_double(r.article_2), format_double(r.span)});
    }
    return tsv.str();
}

/// Fixed-width text table mirroring the automatic-metric table layout.
inline std::string metrics_text_table(const std::vector<MetricReport>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"Model", "%BLEU-1", "%BLEU-2", "%BLEU-3", "%BLEU-4", "%METEOR", "%ROUGE-L",
                     "%F_BERT", "GPT2 ppl", "Entropy", "Train-2", "Article-2", "Span"});
    for (const MetricReport& r : rows) {
        cells.push_back({r.model, format_double(r.bleu_1, 1), format_double(r.bleu_2, 1),
                         format_double(r.bleu_3, 1), format_double(r.bleu_4, 1),
                         format_double(r.meteor, 1), format_double(r.rouge_l, 1),
                         r.f_bert ? format_double(*r.f_bert, 1) : "-",
                         format_double(r.gpt2_ppl, 1), format_double(r.entropy, 3),
                         format_double(r.train_2, 3), format_double(r.article_2, 3),
                         format_double(r.span, 3)});
    }
    std::vector<std::size_t> widths(cells[0].size(), 0);
    for (const auto& row : cells)
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += "  ";
            out += row[c];
            out.append(widths[c] - row[c].size(), ' ');
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    }
    return out;
}

}  // namespace detail

/// Computes the full metric row for every strategy present in the
/// selections file, against the gold questions of the same instances.
inline int cmd_evaluate(const RunConfig& config, const std::string& selections_path,
                        const std::string& fbert_path = "") {
    Dataset ds = load_dataset(config.corpus_path);
    std::map<std::string, const Instance*> by_id;
    for (const Instance& inst : ds.instances) by_id[inst.instance_id] = &inst;

    std::vector<SelectionRecord> selections = load_selections(selections_path);
    if (selections.empty()) throw AlignmentError("selections file is empty: " + selections_path);

    std::map<std::string, double> fbert;
    if (!fbert_path.empty()) {
        for_each_line(fbert_path, [&](const std::string& line, std::size_t line_no) {
            std::size_t tab = line.find('\t');
            if (tab == std::string::npos)
                throw MalformedRecord(line_no, "expected model<TAB>score");
            fbert[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
        });
    }

    std::map<std::string, std::vector<const SelectionRecord*>> by_strategy;
    std::set<std::pair<std::string, std::string>> dedup;
    for (const SelectionRecord& rec : selections) {
        if (!by_id.count(rec.instance_id))
            throw AlignmentError("instance " + rec.instance_id + " not present in the corpus");
        if (!dedup.insert({rec.strategy, rec.instance_id}).second)
            throw AlignmentError("duplicate selection for " + rec.strategy + "/" + rec.instance_id);
        by_strategy[rec.strategy].push_back(&rec);
    }

    std::vector<TokenSeq> train_questions;
    for (const Instance& inst : ds.instances)
        if (inst.split == Split::train) train_questions.push_back(tokenize(inst.question));

    Oracles oracles = make_oracles(config);
    Quarantine quarantine;
    std::vector<MetricReport> rows;

    std::set<std::string> present;
    for (const auto& [strategy, recs] : by_strategy) present.insert(strategy);
    for (const std::string& strategy : detail::strategy_report_order(present)) {
        const auto& recs = by_strategy[strategy];

        // model-backed per-question scores, parallel across questions;
        // a failed question quarantines its instance for this strategy
        std::vector<double> ppl(recs.size()), entropy(recs.size());
        auto errors = detail::parallel_for(recs.size(), config.workers, [&](std::size_t i) {
            const Instance& inst = *by_id.at(recs[i]->instance_id);
            TokenScoreResponse scored = oracles.client->score_tokens(recs[i]->question);
            ppl[i] = perplexity(scored.logprobs);
            std::string input = build_classifier_input(inst, recs[i]->question);
            entropy[i] = type_entropy(oracles.client->classify_type(input).distribution);
        });

        std::vector<TokenPair> pairs;
        std::vector<TokenSeq> generated;
        std::vector<const Instance*> instances;
        double ppl_sum = 0.0, entropy_sum = 0.0;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            if (errors[i]) {
                quarantine.record(recs[i]->instance_id, "evaluate/" + strategy, *errors[i]);
                continue;
            }
            const Instance& inst = *by_id.at(recs[i]->instance_id);
            pairs.emplace_back(tokenize(recs[i]->question), tokenize(inst.question));
            generated.push_back(pairs.back().first);
            instances.push_back(&inst);
            ppl_sum += ppl[i];
            entropy_sum += entropy[i];
        }
        if (pairs.empty()) {
            warn("evaluate: every instance of strategy " + strategy + " was quarantined");
            continue;
        }

        MetricReport row;
        row.model = strategy;
        row.bleu_1 = 100.0 * corpus_bleu(pairs, 1);
        row.bleu_2 = 100.0 * corpus_bleu(pairs, 2);
        row.bleu_3 = 100.0 * corpus_bleu(pairs, 3);
        row.bleu_4 = 100.0 * corpus_bleu(pairs, 4);
        row.meteor = 100.0 * corpus_meteor_lite(pairs);
        row.rouge_l = 100.0 * corpus_rouge_l(pairs);
        if (auto it = fbert.find(strategy); it != fbert.end()) row.f_bert = it->second;
        row.gpt2_ppl = ppl_sum / static_cast<double>(pairs.size());
        row.entropy = entropy_sum / static_cast<double>(pairs.size());
        row.train_2 = train_n(generated, train_questions, 2);
        row.article_2 = corpus_article_n(generated, instances, 2);
        row.span = corpus_span_overlap(generated, instances);
        rows.push_back(std::move(row));
    }

    RunManifest manifest{"evaluate", config, {}, {}};
    manifest.add_input(config.corpus_path);
    manifest.add_input(selections_path);
    if (!fbert_path.empty()) manifest.add_input(fbert_path);
    std::string tsv_path = detail::out_path(config, "metrics.tsv");
    write_file(tsv_path, detail::metrics_tsv(rows));
    manifest.add_output(tsv_path);
    std::string txt_path = detail::out_path(config, "metrics.txt");
    write_file(txt_path, detail::metrics_text_table(rows));
    manifest.add_output(txt_path);
    quarantine.write(config.out_dir, "evaluate", manifest);
    manifest.write(config.out_dir);
    return quarantine.empty() ? kExitOk : kExitQuarantined;
}

/// mean +/- sample std across per-run metrics.tsv files (one row per model
/// and column pair).
inline int cmd_evaluate_summarize(const RunConfig& config,
                                  const std::vector<std::string>& metric_files) {
    if (metric_files.empty()) throw MissingInput("no per-run metric files given");
    // model -> column -> values across runs
    std::map<std::string, std::map<std::string, std::vector<double>>> values;
    std::vector<std::string> model_order;
    const auto& columns = metric_report_columns();
    for (const std::string& path : metric_files) {
        std::vector<std::vector<std::string>> lines;
        for_each_line(path, [&](const std::string& line, std::size_t) {
            std::vector<std::string> cells;
            std::size_t pos = 0;
            while (true) {
                std::size_t tab = line.find('\t', pos);
                cells.push_back(line.substr(pos, tab == std::string::npos ? tab : tab - pos));
                if (tab == std::string::npos) break;
                pos = tab + 1;
            }
            lines.push_back(std::move(cells));
        });
        if (lines.empty() || lines[0] != columns)
            throw MalformedRecord(1, path + " is not a metrics.tsv file");
        for (std::size_t r = 1; r < lines.size(); ++r) {
            const auto& cells = lines[r];
            if (cells.size() != columns.size())
                throw MalformedRecord(r + 1, path + ": wrong column count");
            const std::string& model = cells[0];
            if (!values.count(model)) model_order.push_back(model);
            for (std::size_t c = 1; c < columns.size(); ++c) {
                if (cells[c] == "-") continue;
                values[model][columns[c]].push_back(std::stod(cells[c]));
            }
        }
    }

    TsvWriter tsv({"model", "metric", "mean", "std", "runs"});
    for (const std::string& model : model_order) {
        for (std::size_t c = 1; c < columns.size(); ++c) {
            auto it = values[model].find(columns[c]);
            if (it == values[model].end()) continue;
            RunSummary s = aggregate_runs(it->second);
            tsv.row({model, columns[c], format_double(s.mean), format_double(s.stddev),
                     std::to_string(it->second.size())});
        }
    }

    RunManifest manifest{"summarize", config, {}, {}};
    for (const std::string& path : metric_files) manifest.add_input(path);
    std::string out = detail::out_path(config, "summary.tsv");
    write_file(out, tsv.str());
    manifest.add_output(out);
    manifest.write(config.out_dir);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// pairs

/// Builds the pairwise-ranker dataset from ranking annotations plus the
/// per-type generations, optionally splitting it into train/validation.
inline int cmd_pairs(const RunConfig& config, const std::string& annotations_path,
                     const std::string& generations_path,
                     std::optional<std::size_t> train_count) {
    Dataset ds = load_dataset(config.corpus_path);
    std::map<std::string, std::string> sources;
    for (const Instance& inst : ds.instances) sources[inst.instance_id] = inst.source;

    std::map<QuestionKey, std::string> questions;
    for (const GenerationRecord& rec : load_generations(generations_path))
        if (rec.strategy == "per-type" && rec.control)
            questions[{rec.instance_id, *rec.control}] = rec.question;

    std::vector<RankingAnnotation> annotations = load_ranking_annotations(annotations_path);
    std::vector<PairExample> examples = build_pair_dataset(annotations, questions, sources);

    RunManifest manifest{"pairs", config, {}, {}};
    manifest.add_input(config.corpus_path);
    manifest.add_input(annotations_path);
    manifest.add_input(generations_path);
    std::string out = detail::out_path(config, "pairs.jsonl");
    write_file(out, records_to_jsonl(examples));
    manifest.add_output(out);
    if (train_count) {
        auto [train, validation] = split_pairs(examples, *train_count, config.seed);
        std::string train_path = detail::out_path(config, "pairs_train.jsonl");
        std::string val_path = detail::out_path(config, "pairs_validation.jsonl");
        write_file(train_path, records_to_jsonl(train));
        write_file(val_path, records_to_jsonl(validation));
        manifest.add_output(train_path);
        manifest.add_output(val_path);
    }
    manifest.write(config.out_dir);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// agreement

/// Pairwise type-label kappas and/or ranking precision@k, depending on
/// which inputs are given.
inline int cmd_agreement(const RunConfig& config, const std::string& labels_path,
                         const std::string& rankings_path) {
    if (labels_path.empty() && rankings_path.empty())
        throw MissingInput("agreement needs --labels and/or --rankings");
    RunManifest manifest{"agreement", config, {}, {}};

    if (!labels_path.empty()) {
        std::vector<TypeLabelRecord> records = load_type_labels(labels_path);
        manifest.add_input(labels_path);
        // align annotator pairs over the records both labeled
        std::set<std::string> annotators;
        for (const TypeLabelRecord& rec : records)
            for (const auto& [annotator, label] : rec.labels) annotators.insert(annotator);
        TsvWriter tsv({"annotator_a", "annotator_b", "items", "kappa"});
        std::vector<std::string> names(annotators.begin(), annotators.end());
        for (std::size_t a = 0; a < names.size(); ++a) {
            for (std::size_t b = a + 1; b < names.size(); ++b) {
                std::vector<QuestionType> la, lb;
                for (const TypeLabelRecord& rec : records) {
                    std::optional<QuestionType> va, vb;
                    for (const auto& [annotator, label] : rec.labels) {
                        if (annotator == names[a]) va = label;
                        if (annotator == names[b]) vb = label;
                    }
                    if (va && vb) {
                        la.push_back(*va);
                        lb.push_back(*vb);
                    }
                }
                if (la.empty()) continue;
                tsv.row({names[a], names[b], std::to_string(la.size()),
                         format_double(cohen_kappa(la, lb), 3)});
            }
        }
        std::string out = detail::out_path(config, "kappa.tsv");
        write_file(out, tsv.str());
        manifest.add_output(out);
    }

    if (!rankings_path.empty()) {
        std::vector<RankingAnnotation> annotations = load_ranking_annotations(rankings_path);
        manifest.add_input(rankings_path);
        std::map<std::string, std::map<std::string, RankingAnnotation>> by_annotator;
        for (const RankingAnnotation& ann : annotations)
            by_annotator[ann.annotator_id].emplace(ann.instance_id, ann);
        std::vector<std::string> names;
        for (const auto& [name, anns] : by_annotator) names.push_back(name);
        TsvWriter tsv({"annotator_a", "annotator_b", "instances", "k", "a_to_b", "b_to_a", "mean"});
        for (std::size_t a = 0; a < names.size(); ++a) {
            for (std::size_t b = a + 1; b < names.size(); ++b) {
                std::vector<RankingAnnotation> va, vb;
                for (const auto& [instance_id, ann] : by_annotator[names[a]]) {
                    auto it = by_annotator[names[b]].find(instance_id);
                    if (it != by_annotator[names[b]].end()) {
                        va.push_back(ann);
                        vb.push_back(it->second);
                    }
                }
                if (va.empty()) continue;
                for (int k = 1; k <= 3; ++k) {
                    PrecisionAtK p = corpus_precision_at_k(va, vb, k);
                    tsv.row({names[a], names[b], std::to_string(va.size()), std::to_string(k),
                             format_double(p.a_to_b, 3), format_double(p.b_to_a, 3),
                             format_double(p.mean, 3)});
                }
            }
        }
        std::string out = detail::out_path(config, "precision_at_k.tsv");
        write_file(out, tsv.str());
        manifest.add_output(out);
    }

    manifest.write(config.out_dir);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report

/// Labeled questions for the leading n-gram tables: {"type": ..., "question": ...}.
inline std::vector<std::pair<QuestionType, std::string>> load_labeled_questions(
    const std::string& path) {
    std::vector<std::pair<QuestionType, std::string>> out;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        nlohmann::json j = detail::parse_json_line(line, line_no);
        out.emplace_back(detail::json_type(j, "type", line_no),
                         detail::json_string(j, "question", line_no));
    });
    return out;
}

/// Emits the requested report tables: type distribution and leading n-gram
/// tables from labeled questions, the controllability confusion matrix from
/// per-type generations, and the human-evaluation table from judgments.
inline int cmd_report(const RunConfig& config, const std::string& labeled_questions_path,
                      const std::string& generations_path, const std::string& judgments_path) {
    if (labeled_questions_path.empty() && generations_path.empty() && judgments_path.empty())
        throw MissingInput(
            "report needs at least one of --labeled-questions, --generations, --judgments");
    RunManifest manifest{"report", config, {}, {}};
    Quarantine quarantine;

    if (!labeled_questions_path.empty()) {
        auto labeled = load_labeled_questions(labeled_questions_path);
        manifest.add_input(labeled_questions_path);

        std::array<std::size_t, kNumTypes> counts{};
        for (const auto& [type, question] : labeled) ++counts[type_index(type)];
        TsvWriter dist({"type", "count"});
        for (QuestionType t : all_types)
            dist.row({std::string(type_name(t)), std::to_string(counts[type_index(t)])});
        std::string dist_path = detail::out_path(config, "type_distribution.tsv");
        write_file(dist_path, dist.str());
        manifest.add_output(dist_path);

        for (std::size_t n : {std::size_t{1}, std::size_t{2}}) {
            TsvWriter tsv({"type", "ngram", "count"});
            for (const LeadingNgramRow& row : leading_ngram_table(labeled, n))
                tsv.row({std::string(type_name(row.type)), row.ngram, std::to_string(row.count)});
            std::string path = detail::out_path(
                config, n == 1 ? "leading_unigrams.tsv" : "leading_bigrams.tsv");
            write_file(path, tsv.str());
            manifest.add_output(path);
        }
    }

    if (!generations_path.empty()) {
        Dataset ds = load_dataset(config.corpus_path);
        std::map<std::string, const Instance*> by_id;
        for (const Instance& inst : ds.instances) by_id[inst.instance_id] = &inst;
        std::vector<GenerationRecord> generations = load_generations(generations_path);
        manifest.add_input(config.corpus_path);
        manifest.add_input(generations_path);
        Oracles oracles = make_oracles(config);

        std::vector<const GenerationRecord*> typed;
        for (const GenerationRecord& rec : generations)
            if (rec.strategy == "per-type" && rec.control) typed.push_back(&rec);
        std::vector<QuestionType> predicted(typed.size());
        auto errors = detail::parallel_for(typed.size(), config.workers, [&](std::size_t i) {
            auto it = by_id.find(typed[i]->instance_id);
            if (it == by_id.end())
                throw AlignmentError("instance " + typed[i]->instance_id + " not in corpus");
            std::string input = build_classifier_input(*it->second, typed[i]->question);
            predicted[i] = oracles.client->classify_type(input).distribution.argmax();
        });
        std::vector<QuestionType> requested_ok, predicted_ok;
        for (std::size_t i = 0; i < typed.size(); ++i) {
            if (errors[i]) {
                quarantine.record(typed[i]->instance_id, "report/controllability", *errors[i]);
                continue;
            }
            requested_ok.push_back(*typed[i]->control);
            predicted_ok.push_back(predicted[i]);
        }
        if (!requested_ok.empty()) {
            ControllabilityResult result = controllability(requested_ok, predicted_ok);
            std::vector<std::string> header = {"requested"};
            for (QuestionType p : all_types) header.push_back(std::string(type_name(p)));
            header.push_back("accuracy");
            TsvWriter tsv(header);
            for (QuestionType r : generatable_types) {
                std::vector<std::string> row = {std::string(type_name(r))};
                for (QuestionType p : all_types)
                    row.push_back(std::to_string(result.matrix.counts[type_index(r)][type_index(p)]));
                row.push_back(format_double(result.per_type_accuracy[type_index(r)], 4));
                tsv.row(row);
            }
            std::string path = detail::out_path(config, "controllability.tsv");
            write_file(path, tsv.str());
            manifest.add_output(path);
        }
    }

    if (!judgments_path.empty()) {
        std::vector<HumanJudgment> judgments = load_human_judgments(judgments_path);
        manifest.add_input(judgments_path);
        HumanEvalReport report = aggregate_human_eval(judgments);
        TsvWriter tsv({"model", "syntax", "semantics", "relevancy", "inquisitiveness"});
        for (const auto& [model, means] : report.means) {
            tsv.row({model, format_double(means[0], 2), format_double(means[1], 2),
                     format_double(means[2], 2), format_double(means[3], 2)});
        }
        std::string path = detail::out_path(config, "human_eval.tsv");
        write_file(path, tsv.str());
        manifest.add_output(path);

        TsvWriter low({"instance_id", "model", "aspect"});
        for (const auto& [instance_id, model, aspect] : report.majority_low)
            low.row({instance_id, model, std::string(aspect_name(aspect))});
        std::string low_path = detail::out_path(config, "majority_low.tsv");
        write_file(low_path, low.str());
        manifest.add_output(low_path);
    }

    quarantine.write(config.out_dir, "report", manifest);
    manifest.write(config.out_dir);
    return quarantine.empty() ? kExitOk : kExitQuarantined;
}

}  // namespace inqpipe
