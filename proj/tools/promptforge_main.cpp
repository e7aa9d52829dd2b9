// promptforge: config-driven runner for prompt-program optimization,
// evaluation, dataset transforms, and prompt export.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "promptforge/artifact.hpp"
#include "promptforge/data.hpp"
#include "promptforge/errors.hpp"
#include "promptforge/evaluate.hpp"
#include "promptforge/optimize.hpp"
#include "promptforge/serde.hpp"

namespace pf = promptforge;
using nlohmann::json;

namespace {

// config file < flags; every flag that was actually passed wins.
struct CommonFlags {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<int> parallelism;
    std::optional<int> repeats;
    std::optional<std::string> cache_path;
};

json load_config(const CommonFlags& flags) {
    if (flags.config_path.empty()) return json::object();
    return pf::load_json_file(flags.config_path);
}

uint64_t effective_seed(const CommonFlags& flags, const json& config) {
    if (flags.seed) return *flags.seed;
    return config.value("seed", 0UL);
}

int effective_parallelism(const CommonFlags& flags, const json& config) {
    if (flags.parallelism) return *flags.parallelism;
    return config.value("parallelism", 1);
}

// --- backend wiring ---------------------------------------------------------

pf::BackendErrorKind error_kind_from_name(const std::string& name) {
    if (name == "content_filtered") return pf::BackendErrorKind::ContentFiltered;
    if (name == "transport") return pf::BackendErrorKind::Transport;
    if (name == "provider") return pf::BackendErrorKind::Provider;
    pf::fail(pf::Errc::InvalidArgument, "unknown backend error kind '" + name + "'");
}

std::shared_ptr<pf::Backend> build_backend(const json& config, const CommonFlags& flags) {
    if (!config.contains("backend"))
        pf::fail(pf::Errc::InvalidArgument, "config has no \"backend\" section");
    const json& spec = config["backend"];
    const std::string kind = spec.value("kind", "");
    std::string cache = flags.cache_path.value_or(spec.value("cache_path", ""));

    if (kind == "scripted") {
        std::vector<pf::ScriptedRule> rules;
        for (const auto& entry : spec.value("rules", json::array())) {
            pf::ScriptedRule rule;
            rule.contains = entry.value("contains", "");
            if (entry.contains("responses"))
                rule.responses = entry["responses"].get<std::vector<std::string>>();
            if (entry.contains("error"))
                rule.error = pf::BackendError{
                    error_kind_from_name(entry["error"].get<std::string>()),
                    entry.value("error_detail", "scripted error")};
            rules.push_back(std::move(rule));
        }
        if (!spec.contains("fallback"))
            pf::fail(pf::Errc::InvalidArgument, "scripted backend needs a \"fallback\" response");
        auto scripted = std::make_shared<pf::ScriptedBackend>(
            std::move(rules), spec["fallback"].get<std::string>(), spec.value("batch_n", true));
        if (!cache.empty())
            return std::make_shared<pf::ReplayBackend>(scripted, cache, pf::ReplayMode::Record);
        return scripted;
    }
    if (kind == "http") {
        pf::HttpOptions options;
        options.base_url = spec.value("base_url", "");
        options.max_attempts = spec.value("max_attempts", 3);
        options.backoff_base_ms = spec.value("backoff_base_ms", 500);
        auto http = std::make_shared<pf::HttpBackend>(options);
        if (!cache.empty())
            return std::make_shared<pf::ReplayBackend>(http, cache, pf::ReplayMode::Record);
        return http;
    }
    if (kind == "replay") {
        if (cache.empty())
            pf::fail(pf::Errc::InvalidArgument, "replay backend needs a cache path");
        return std::make_shared<pf::ReplayBackend>(nullptr, cache, pf::ReplayMode::Replay);
    }
    pf::fail(pf::Errc::InvalidArgument, "backend kind must be scripted, http, or replay");
}

// --- program / dataset / metric wiring ---------------------------------------

pf::ProgramModule build_program(const json& config) {
    if (!config.contains("program"))
        pf::fail(pf::Errc::InvalidArgument, "config has no \"program\" section");
    const json& spec = config["program"];

    pf::ProgramModule program;
    if (spec.contains("signature_path")) {
        program.signature = pf::signature_from_json(pf::load_json_file(
            spec["signature_path"].get<std::string>()));
    } else if (spec.contains("signature")) {
        program.signature = pf::signature_from_json(spec["signature"]);
    } else {
        pf::fail(pf::Errc::InvalidArgument, "program needs \"signature\" or \"signature_path\"");
    }
    program.kind = pf::module_kind_from_name(spec.value("module", "predict"));
    if (spec.contains("vote_n")) program.vote_n = spec["vote_n"].get<int>();
    if (spec.contains("vote_field")) program.vote_field = spec["vote_field"].get<std::string>();
    if (spec.contains("demos"))
        for (const auto& demo : spec["demos"]) program.demos.push_back(pf::example_from_json(demo));

    if (!spec.contains("gen"))
        pf::fail(pf::Errc::InvalidArgument, "program needs a \"gen\" parameter block");
    program.params = pf::gen_params_from_json(spec["gen"]);
    program.validate();
    return program;
}

pf::Dataset load_named_dataset(const json& config, const std::string& key) {
    if (!config.contains(key))
        pf::fail(pf::Errc::InvalidArgument, "config has no \"" + key + "\" section");
    const json& spec = config[key];
    pf::LoadSpec load_spec;
    if (spec.contains("mapping"))
        load_spec.mapping = spec["mapping"].get<std::map<std::string, std::string>>();
    if (spec.contains("inputs"))
        load_spec.input_fields = spec["inputs"].get<std::vector<std::string>>();
    return pf::load_dataset(spec.at("path").get<std::string>(),
                            pf::data_format_from_name(spec.value("format", "jsonl")), load_spec);
}

pf::Metric build_metric(const json& config, std::shared_ptr<pf::Backend> backend) {
    if (!config.contains("metric"))
        pf::fail(pf::Errc::InvalidArgument, "config has no \"metric\" section");
    const json& spec = config["metric"];
    const std::string name = spec.value("name", "exact_match");
    const std::string field = spec.value("field", "");
    if (name == "exact_match") return pf::exact_match_metric(field);
    if (name == "recall") return pf::recall_metric(field);
    if (name == "judge") {
        pf::JudgePanel panel =
            spec.contains("panel_path")
                ? pf::judge_panel_from_json(pf::load_json_file(spec["panel_path"].get<std::string>()))
                : (spec.contains("panel") ? pf::judge_panel_from_json(spec["panel"])
                                          : pf::default_judge_panel(pf::JudgeMode::Online));
        const std::string question_field = spec.value("question_field", "");
        const std::string reference_field = spec.value("reference_field", "");
        std::optional<std::string> hook;
        if (spec.contains("hook")) hook = spec["hook"].get<std::string>();
        pf::GenParams judge_params;
        judge_params.model = spec.value("judge_model", config["program"]["gen"].value("model", ""));
        judge_params.max_tokens = 1024;

        pf::Metric metric;
        metric.name = "judge";
        metric.field = field;
        metric.binary = false;
        metric.fn = [=](const pf::Example& example, const pf::Prediction& prediction) {
            if (!prediction.parse_ok) return 0.0;
            const pf::FieldValue* value = prediction.find(field);
            if (!value) return 0.0;
            std::optional<std::string> reference;
            if (panel.mode == pf::JudgeMode::Offline)
                reference = example.get(reference_field.empty() ? field : reference_field);
            const std::string question =
                question_field.empty() ? "" : example.get(question_field);
            return pf::run_judge_panel(question, pf::value_to_string(*value), reference, panel,
                                       *backend, judge_params, hook)
                .final_score;
        };
        return metric;
    }
    pf::fail(pf::Errc::InvalidArgument, "unknown metric '" + name + "'");
}

// --- subcommand bodies --------------------------------------------------------

int run_optimize(const CommonFlags& flags, const std::string& optimizer_flag,
                 std::optional<int> trials_flag, std::optional<int> minibatch_flag,
                 const std::string& out_path, const std::string& log_path) {
    json config = load_config(flags);
    auto backend = build_backend(config, flags);
    pf::ProgramModule program = build_program(config);
    pf::Metric metric = build_metric(config, backend);
    pf::Dataset trainset = load_named_dataset(config, "trainset");
    pf::Dataset valset = load_named_dataset(config, "valset");
    const uint64_t seed = effective_seed(flags, config);
    const int parallelism = effective_parallelism(flags, config);

    json opt = config.value("optimizer", json::object());
    const std::string name = optimizer_flag.empty() ? opt.value("name", "") : optimizer_flag;
    const auto& names = pf::optimizer_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        std::string known;
        for (const auto& candidate : names) known += " " + candidate;
        pf::fail(pf::Errc::InvalidArgument, "unknown optimizer '" + name + "'; known:" + known);
    }

    pf::OptimizeOutcome outcome;
    if (name == "labeled-fewshot") {
        outcome = pf::labeled_fewshot_optimize(program, trainset.examples, valset.examples,
                                               metric, opt.value("num_demos", 4), seed, *backend);
    } else if (name == "bootstrap-fewshot") {
        pf::BootstrapConfig bootstrap;
        bootstrap.max_bootstrapped = opt.value("max_bootstrapped", 4);
        bootstrap.max_labeled = opt.value("max_labeled", 4);
        if (opt.contains("threshold")) bootstrap.threshold = opt["threshold"].get<double>();
        outcome = pf::bootstrap_fewshot(program, trainset.examples, valset.examples, metric,
                                        bootstrap, seed, *backend);
    } else if (name == "random-search") {
        pf::RandomSearchConfig search;
        search.num_candidates = opt.value("num_candidates", 8);
        search.max_bootstrapped = opt.value("max_bootstrapped", 4);
        search.max_labeled = opt.value("max_labeled", 4);
        if (opt.contains("threshold")) search.threshold = opt["threshold"].get<double>();
        search.parallelism = parallelism;
        outcome = pf::random_search(program, trainset.examples, valset.examples, metric, search,
                                    seed, *backend);
    } else if (name == "mipro" || name == "custom-mipro") {
        pf::MiproConfig mipro;
        mipro.mode = name == "custom-mipro" ? pf::ProposerMode::Custom : pf::ProposerMode::Standard;
        mipro.num_instructions = opt.value("num_instructions", 12);
        mipro.num_demo_sets = opt.value("num_demo_sets", 0);
        mipro.max_bootstrapped = opt.value("max_bootstrapped", 0);
        mipro.max_labeled = opt.value("max_labeled", 0);
        mipro.trials = trials_flag.value_or(opt.value("trials", 15));
        mipro.minibatch_size = minibatch_flag.value_or(opt.value("minibatch", 15));
        if (opt.contains("custom_tip")) mipro.custom_tip = opt["custom_tip"].get<std::string>();
        if (opt.contains("custom_constraint"))
            mipro.custom_constraint = opt["custom_constraint"].get<std::string>();
        mipro.proposer_temperature = opt.value("proposer_temperature", 0.5);
        if (opt.contains("threshold")) mipro.threshold = opt["threshold"].get<double>();
        mipro.parallelism = parallelism;
        outcome = pf::mipro_optimize(program, trainset.examples, valset.examples, metric, mipro,
                                     seed, *backend, *backend);
    } else {  // infer-rules
        pf::InferRulesConfig rules;
        rules.max_bootstrapped = opt.value("max_bootstrapped", 4);
        rules.num_rule_sets = opt.value("num_rule_sets", 3);
        if (opt.contains("threshold")) rules.threshold = opt["threshold"].get<double>();
        rules.parallelism = parallelism;
        outcome = pf::infer_rules(program, trainset.examples, valset.examples, metric, rules,
                                  seed, *backend, *backend);
    }

    pf::save_artifact(outcome.artifact, out_path);
    pf::save_json_file(pf::trial_log_to_json(outcome.log), log_path);
    std::cout << "optimizer:      " << outcome.log.optimizer << "\n"
              << "baseline score: " << outcome.artifact.trial_summary.baseline_full_score << "\n"
              << "best score:     " << outcome.artifact.trial_summary.best_full_score << "\n"
              << "artifact:       " << out_path << "\n"
              << "trial log:      " << log_path << "\n";
    return 0;
}

void print_report_table(const pf::EvalResult& result) {
    auto percent = [](const std::optional<double>& value) {
        if (!value) return std::string("n/a");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f%%", *value * 100.0);
        return std::string(buf);
    };
    const auto& report = result.report;
    std::printf("%-14s %10s\n", "Metric", "Value");
    std::printf("%-14s %10s\n", "Accuracy", percent(report.accuracy).c_str());
    std::printf("%-14s %10s\n", "Precision", percent(report.precision).c_str());
    std::printf("%-14s %10s\n", "Recall", percent(report.recall).c_str());
    std::printf("%-14s %10s\n", "F1 score", percent(report.f1).c_str());
    std::printf("%-14s %10ld\n", "Not answered", report.not_answered);
    std::printf("%-14s %10.4f\n", "Mean score", result.mean_score);
}

int run_eval(const CommonFlags& flags, const std::string& artifact_path, bool as_json,
             const std::string& records_path) {
    json config = load_config(flags);
    auto backend = build_backend(config, flags);
    pf::ProgramModule program;
    if (!artifact_path.empty()) {
        program = pf::load_artifact(artifact_path).to_module();
    } else {
        program = build_program(config);
    }
    pf::Metric metric = build_metric(config, backend);
    pf::Dataset dataset = load_named_dataset(config, "dataset");

    pf::EvalConfig eval_config;
    eval_config.parallelism = effective_parallelism(flags, config);
    eval_config.repeats = flags.repeats.value_or(config.value("repeats", 1));
    eval_config.seed = effective_seed(flags, config);

    pf::EvalResult result =
        pf::evaluate(program, dataset.examples, metric, eval_config, *backend);

    if (!records_path.empty()) {
        std::ofstream out(records_path);
        if (!out) pf::fail(pf::Errc::IoError, "cannot write " + records_path);
        pf::write_records_jsonl(result, out);
    }
    if (as_json) {
        json payload = pf::report_to_json(result.report);
        payload["mean_score"] = result.mean_score;
        payload["per_repeat_mean"] = result.per_repeat_mean;
        payload["blocked_events"] = result.blocked_events;
        std::cout << payload.dump(2) << "\n";
    } else {
        print_report_table(result);
    }
    return 0;
}

int run_corrupt(const CommonFlags& flags, const std::string& kinds_csv, double ratio,
                const std::string& target_field, const std::string& out_path,
                const std::string& format_name, const std::string& templates_dir) {
    json config = load_config(flags);
    auto backend = build_backend(config, flags);
    pf::Dataset dataset = load_named_dataset(config, "dataset");

    std::vector<pf::CorruptionKind> kinds;
    std::stringstream stream(kinds_csv);
    std::string token;
    while (std::getline(stream, token, ','))
        if (!pf::trim(token).empty()) kinds.push_back(pf::corruption_kind(pf::trim(token)));

    // Editable template assets override the built-in prompts when present.
    std::map<std::string, std::string> templates;
    if (!templates_dir.empty()) {
        for (const auto& kind : kinds) {
            const std::string path = templates_dir + "/" + kind.name + ".txt";
            std::ifstream in(path);
            if (!in) pf::fail(pf::Errc::FileNotFound, path);
            std::ostringstream body;
            body << in.rdbuf();
            templates[kind.name] = body.str();
        }
    }

    pf::GenParams params;
    params.model = config["backend"].value("model", "corruption");
    params.max_tokens = 2048;

    pf::Dataset corrupted =
        pf::inject_corruptions(dataset, kinds, ratio, target_field, *backend, params,
                               effective_seed(flags, config),
                               templates.empty() ? nullptr : &templates);
    const pf::DataFormat format = pf::data_format_from_name(format_name);
    pf::save_dataset(corrupted, out_path, format);
    pf::write_provenance_sidecar(corrupted, out_path);
    std::cout << "wrote " << corrupted.examples.size() << " rows to " << out_path << "\n";
    return 0;
}

int run_split(const std::string& in_path, const std::string& format_name, size_t train,
              size_t val, size_t test, const std::string& out_prefix, uint64_t seed) {
    const pf::DataFormat format = pf::data_format_from_name(format_name);
    pf::Dataset dataset = pf::load_dataset(in_path, format, {});
    pf::SplitResult parts = pf::split(dataset, {train, val, test}, seed);
    const std::string extension = format == pf::DataFormat::Csv ? ".csv" : ".jsonl";
    for (const auto& [part, suffix] :
         {std::pair{&parts.train, ".train"}, {&parts.val, ".val"}, {&parts.test, ".test"}}) {
        const std::string path = out_prefix + suffix + extension;
        pf::save_dataset(*part, path, format);
        pf::write_provenance_sidecar(*part, path);
        std::cout << path << ": " << part->examples.size() << " rows\n";
    }
    return 0;
}

int run_balance(const std::string& in_path, const std::string& format_name,
                const std::string& label, const std::string& out_path, uint64_t seed) {
    const pf::DataFormat format = pf::data_format_from_name(format_name);
    pf::Dataset dataset = pf::load_dataset(in_path, format, {});
    pf::Dataset balanced = pf::balance_by_label(dataset, label, seed);
    pf::save_dataset(balanced, out_path, format);
    pf::write_provenance_sidecar(balanced, out_path);
    std::cout << "wrote " << balanced.examples.size() << " rows to " << out_path << "\n";
    return 0;
}

int run_export(const std::string& artifact_path, const std::string& style_name,
               const std::string& out_path, bool no_provenance,
               const std::vector<std::string>& sample_inputs) {
    pf::OptimizedArtifact artifact = pf::load_artifact(artifact_path);
    std::map<std::string, std::string> inputs;
    for (const auto& pair : sample_inputs) {
        const size_t eq = pair.find('=');
        if (eq == std::string::npos)
            pf::fail(pf::Errc::InvalidArgument, "--input expects name=value, got '" + pair + "'");
        inputs[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
    const std::string text =
        pf::export_prompt(artifact, pf::export_style_from_name(style_name),
                          inputs.empty() ? nullptr : &inputs, !no_provenance);
    if (out_path.empty()) {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) pf::fail(pf::Errc::IoError, "cannot write " + out_path);
        out << text;
    }
    return 0;
}

int run_inspect(const std::string& log_path) {
    pf::TrialLog log = pf::trial_log_from_json(pf::load_json_file(log_path));
    std::printf("optimizer: %s   seed: %llu   blocked: %ld\n", log.optimizer.c_str(),
                static_cast<unsigned long long>(log.seed), log.blocked_events);
    if (!log.proposed_instructions.empty()) {
        std::printf("proposed instructions:\n");
        for (size_t i = 0; i < log.proposed_instructions.size(); ++i) {
            std::string preview = log.proposed_instructions[i];
            if (preview.size() > 72) preview = preview.substr(0, 69) + "...";
            std::printf("  [%zu] %s\n", i + 1, preview.c_str());
        }
    }
    if (!log.constraints.empty()) std::printf("constraints: %s\n", log.constraints.c_str());
    std::printf("%-6s %-6s %-6s %-10s %-10s %s\n", "trial", "instr", "demos", "minibatch",
                "full", "note");
    for (const auto& trial : log.trials) {
        char full[32] = "-";
        if (trial.full_score) std::snprintf(full, sizeof(full), "%.4f", *trial.full_score);
        std::printf("%-6d %-6d %-6d %-10.4f %-10s %s\n", trial.trial_index,
                    trial.origin.instruction_index, trial.origin.demo_set_index,
                    trial.minibatch_score, full, trial.note.c_str());
    }
    std::printf("full evaluations:\n");
    for (const auto& full : log.full_evaluations)
        std::printf("  trial %-4d candidate %-4d score %.4f\n", full.trial_index,
                    full.candidate_index, full.score);
    return 0;
}

bool is_validation_error(pf::Errc code) {
    switch (code) {
        case pf::Errc::TransportError:
        case pf::Errc::ProviderError:
        case pf::Errc::ContentFiltered:
        case pf::Errc::ReplayMiss:
        case pf::Errc::BatchMisconfigured:
        case pf::Errc::NoSuccessfulTraces:
        case pf::Errc::EmptyProposal:
        case pf::Errc::ProposalFailure:
        case pf::Errc::IoError:
            return false;
        default:
            return true;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"promptforge: declarative prompt-program optimization"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string optimizer_names_help;
    for (const auto& name : pf::optimizer_names()) optimizer_names_help += name + " ";

    // optimize
    auto* optimize_cmd = app.add_subcommand(
        "optimize", "Run an optimizer; writes the artifact and the trial log");
    std::string optimizer_flag;
    std::optional<int> trials_flag;
    std::optional<int> minibatch_flag;
    std::string out_path = "artifact.json";
    std::string log_path = "trial_log.json";
    optimize_cmd->add_option("--config", flags.config_path, "run config (JSON)")->required();
    optimize_cmd->add_option("--optimizer", optimizer_flag,
                             "one of: " + optimizer_names_help);
    optimize_cmd->add_option("--seed", flags.seed, "seed all randomness flows from");
    optimize_cmd->add_option("--trials", trials_flag, "minibatch trials");
    optimize_cmd->add_option("--minibatch", minibatch_flag, "minibatch size");
    optimize_cmd->add_option("--parallelism", flags.parallelism, "evaluation workers");
    optimize_cmd->add_option("--out", out_path, "artifact output path");
    optimize_cmd->add_option("--log", log_path, "trial log output path");
    optimize_cmd->add_option("--cache", flags.cache_path, "replay cache path");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a program and print the report table");
    std::string artifact_path;
    bool as_json = false;
    std::string records_path;
    eval_cmd->add_option("--config", flags.config_path, "run config (JSON)")->required();
    eval_cmd->add_option("--artifact", artifact_path, "evaluate a saved artifact");
    eval_cmd->add_option("--seed", flags.seed, "seed all randomness flows from");
    eval_cmd->add_option("--repeats", flags.repeats, "full passes over the dataset");
    eval_cmd->add_option("--parallelism", flags.parallelism, "evaluation workers");
    eval_cmd->add_option("--records", records_path, "write per-example records (JSONL)");
    eval_cmd->add_option("--cache", flags.cache_path, "replay cache path");
    eval_cmd->add_flag("--json", as_json, "print the report as JSON");

    // gen corrupt
    auto* gen_cmd = app.add_subcommand("gen", "Synthetic data generation");
    gen_cmd->require_subcommand(1);
    auto* corrupt_cmd = gen_cmd->add_subcommand(
        "corrupt", "Inject labeled corruptions into a clean dataset");
    std::string kinds_csv;
    double ratio = 0.5;
    std::string target_field;
    std::string corrupt_out;
    std::string corrupt_format = "jsonl";
    std::string templates_dir;
    corrupt_cmd->add_option("--config", flags.config_path, "run config (JSON)")->required();
    corrupt_cmd->add_option("--kinds", kinds_csv, "comma-separated corruption kinds")->required();
    corrupt_cmd->add_option("--ratio", ratio, "fraction of rows to corrupt (0,1]");
    corrupt_cmd->add_option("--target-field", target_field, "field to corrupt")->required();
    corrupt_cmd->add_option("--out", corrupt_out, "output dataset path")->required();
    corrupt_cmd->add_option("--format", corrupt_format, "csv or jsonl");
    corrupt_cmd->add_option("--templates-dir", templates_dir,
                            "directory of <kind>.txt prompt templates (see assets/)");
    corrupt_cmd->add_option("--seed", flags.seed, "seed all randomness flows from");

    // split
    auto* split_cmd = app.add_subcommand("split", "Seeded train/val/test split");
    std::string split_in;
    std::string split_format = "jsonl";
    size_t train_size = 0, val_size = 0, test_size = 0;
    std::string out_prefix = "split";
    uint64_t split_seed = 0;
    split_cmd->add_option("--in", split_in, "input dataset")->required();
    split_cmd->add_option("--format", split_format, "csv or jsonl");
    split_cmd->add_option("--train", train_size, "train size")->required();
    split_cmd->add_option("--val", val_size, "validation size")->required();
    split_cmd->add_option("--test", test_size, "test size")->required();
    split_cmd->add_option("--out-prefix", out_prefix, "output path prefix");
    split_cmd->add_option("--seed", split_seed, "shuffle seed");

    // balance
    auto* balance_cmd = app.add_subcommand("balance", "Downsample classes to the minority count");
    std::string balance_in;
    std::string balance_format = "jsonl";
    std::string balance_label;
    std::string balance_out;
    uint64_t balance_seed = 0;
    balance_cmd->add_option("--in", balance_in, "input dataset")->required();
    balance_cmd->add_option("--format", balance_format, "csv or jsonl");
    balance_cmd->add_option("--label", balance_label, "label field")->required();
    balance_cmd->add_option("--out", balance_out, "output dataset path")->required();
    balance_cmd->add_option("--seed", balance_seed, "shuffle seed");

    // export-prompt
    auto* export_cmd = app.add_subcommand(
        "export-prompt", "Render an optimized artifact for use outside the framework");
    std::string export_artifact;
    std::string style = "system_only";
    std::string export_out;
    bool no_provenance = false;
    std::vector<std::string> sample_inputs;
    export_cmd->add_option("--artifact", export_artifact, "artifact path")->required();
    export_cmd->add_option("--style", style, "system_only or full_template");
    export_cmd->add_option("--out", export_out, "output file (default stdout)");
    export_cmd->add_option("--input", sample_inputs, "sample input as name=value (repeatable)");
    export_cmd->add_flag("--no-provenance", no_provenance, "omit the provenance comment header");

    // inspect
    auto* inspect_cmd = app.add_subcommand("inspect", "Pretty-print a trial log");
    std::string inspect_path;
    inspect_cmd->add_option("--log", inspect_path, "trial log path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (optimize_cmd->parsed())
            return run_optimize(flags, optimizer_flag, trials_flag, minibatch_flag, out_path,
                                log_path);
        if (eval_cmd->parsed()) return run_eval(flags, artifact_path, as_json, records_path);
        if (corrupt_cmd->parsed())
            return run_corrupt(flags, kinds_csv, ratio, target_field, corrupt_out, corrupt_format,
                               templates_dir);
        if (split_cmd->parsed())
            return run_split(split_in, split_format, train_size, val_size, test_size, out_prefix,
                             split_seed);
        if (balance_cmd->parsed())
            return run_balance(balance_in, balance_format, balance_label, balance_out,
                               balance_seed);
        if (export_cmd->parsed())
            return run_export(export_artifact, style, export_out, no_provenance, sample_inputs);
        if (inspect_cmd->parsed()) return run_inspect(inspect_path);
    } catch (const pf::Error& error) {
        std::cerr << "error: " << error.what() << "\n";
        return is_validation_error(error.code()) ? 1 : 2;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 2;
    }
    return 0;
}
