// Copyright (c) 2026 inqpipe contributors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "inqpipe/cli.hpp"

namespace {

struct GlobalFlags {
    std::string config_file;
    std::optional<std::string> corpus;
    std::optional<std::string> backend;
    std::optional<std::string> endpoint;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> split;
    std::optional<std::uint64_t> limit;
    std::optional<int> workers;
    std::vector<std::string> strategies;
};

void add_common_flags(CLI::App* cmd, GlobalFlags& flags) {
    cmd->add_option("--config", flags.config_file, "configuration file (key = value lines)");
    cmd->add_option("--corpus", flags.corpus, "JSONL corpus path");
    cmd->add_option("--backend", flags.backend, "model backend: stub | service");
    cmd->add_option("--endpoint", flags.endpoint, "inference service base URL");
    cmd->add_option("--seed", flags.seed, "run seed");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--split", flags.split, "corpus split to process: train | dev | test | all");
    cmd->add_option("--limit", flags.limit, "cap the number of instances (0 = unlimited)");
    cmd->add_option("--workers", flags.workers, "worker thread count");
    cmd->add_option("--strategy", flags.strategies, "strategy, repeatable")->take_all();
}

// config file < INQPIPE_ENDPOINT < flags
inqpipe::RunConfig resolve_config(const GlobalFlags& flags) {
    inqpipe::RunConfig config;
    if (!flags.config_file.empty()) config = inqpipe::load_config_file(flags.config_file);
    inqpipe::apply_endpoint_env(config);
    if (flags.corpus) config.corpus_path = *flags.corpus;
    if (flags.backend) config.backend = *flags.backend;
    if (flags.endpoint) config.endpoint = *flags.endpoint;
    if (flags.seed) config.seed = *flags.seed;
    if (flags.out_dir) config.out_dir = *flags.out_dir;
    if (flags.split) config.split = *flags.split;
    if (flags.limit) config.limit = *flags.limit;
    if (flags.workers) config.workers = *flags.workers;
    if (!flags.strategies.empty()) config.strategies = flags.strategies;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inqpipe: type-controlled inquisitive question pipeline"};
    app.require_subcommand(1);

    GlobalFlags flags;

    CLI::App* generate = app.add_subcommand("generate", "generate questions for each instance");
    add_common_flags(generate, flags);

    CLI::App* select = app.add_subcommand("select", "select one question per instance and strategy");
    add_common_flags(select, flags);
    std::string generations_path = "";
    select->add_option("--generations", generations_path, "generations.jsonl from `generate`")
        ->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "automatic metrics against gold questions");
    add_common_flags(evaluate, flags);
    std::string selections_path, fbert_path;
    std::vector<std::string> summarize_files;
    evaluate->add_option("--selections", selections_path, "selections.jsonl from `select`");
    evaluate->add_option("--fbert", fbert_path, "external BERTScore TSV (model<TAB>score)");
    evaluate->add_option("--summarize", summarize_files,
                         "aggregate per-run metrics.tsv files into mean/std")
        ->take_all();

    CLI::App* pairs = app.add_subcommand("pairs", "build the pairwise-ranker dataset");
    add_common_flags(pairs, flags);
    std::string annotations_path, pairs_generations_path;
    std::optional<std::size_t> train_count;
    pairs->add_option("--annotations", annotations_path, "ranking annotations JSONL")->required();
    pairs->add_option("--generations", pairs_generations_path, "per-type generations JSONL")
        ->required();
    pairs->add_option("--train-count", train_count, "split off this many training examples");

    CLI::App* agreement = app.add_subcommand("agreement", "inter-annotator agreement reports");
    add_common_flags(agreement, flags);
    std::string labels_path, rankings_path;
    agreement->add_option("--labels", labels_path, "type-label records JSONL");
    agreement->add_option("--rankings", rankings_path, "ranking annotations JSONL");

    CLI::App* report = app.add_subcommand("report", "annotation and evaluation tables");
    add_common_flags(report, flags);
    std::string labeled_questions_path, report_generations_path, judgments_path;
    report->add_option("--labeled-questions", labeled_questions_path,
                       "labeled questions JSONL for n-gram tables");
    report->add_option("--generations", report_generations_path,
                       "per-type generations JSONL for the controllability matrix");
    report->add_option("--judgments", judgments_path, "human judgments JSONL");

    CLI11_PARSE(app, argc, argv);

    try {
        inqpipe::RunConfig config = resolve_config(flags);
        if (generate->parsed()) return inqpipe::cmd_generate(config);
        if (select->parsed()) return inqpipe::cmd_select(config, generations_path);
        if (evaluate->parsed()) {
            if (!summarize_files.empty())
                return inqpipe::cmd_evaluate_summarize(config, summarize_files);
            if (selections_path.empty())
                throw inqpipe::MissingInput("evaluate needs --selections or --summarize");
            return inqpipe::cmd_evaluate(config, selections_path, fbert_path);
        }
        if (pairs->parsed())
            return inqpipe::cmd_pairs(config, annotations_path, pairs_generations_path, train_count);
        if (agreement->parsed()) return inqpipe::cmd_agreement(config, labels_path, rankings_path);
        if (report->parsed())
            return inqpipe::cmd_report(config, labeled_questions_path, report_generations_path,
                                       judgments_path);
    } catch (const std::exception& e) {
        std::cerr << "inqpipe: error: " << e.what() << "\n";
        return inqpipe::kExitFatal;
    }
    return inqpipe::kExitFatal;
}
