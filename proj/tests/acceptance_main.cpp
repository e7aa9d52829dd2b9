// Acceptance suite: one hard pass/fail line per shipped guarantee, run
// against scripted and replay backends only (no network anywhere).
//
// Usage: acceptance <path-to-promptforge-cli>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "promptforge/artifact.hpp"
#include "promptforge/data.hpp"
#include "promptforge/evaluate.hpp"
#include "promptforge/metrics.hpp"
#include "promptforge/optimize.hpp"
#include "promptforge/rng.hpp"
#include "promptforge/serde.hpp"
#include "test_support.hpp"

using namespace promptforge;
using pftest::bool_completion;
using pftest::completion;

namespace {

#define REQUIRE(cond, msg)                                                          \
    do {                                                                            \
        if (!(cond)) {                                                              \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << (msg)   \
                      << "\n";                                                      \
            std::exit(1);                                                           \
        }                                                                           \
    } while (0)

class Timer {
  public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

void pass(int criterion, const std::string& what, const Timer& timer, double budget_s) {
    REQUIRE(timer.seconds() < budget_s,
            "criterion " + std::to_string(criterion) + " exceeded its runtime budget");
    std::printf("[PASS] criterion %2d: %s (%.2fs)\n", criterion, what.c_str(), timer.seconds());
}

std::string g_cli;

struct CliRun {
    int exit_code;
    std::string output;
};

CliRun run_cli(const std::string& args) {
    const std::string command = g_cli + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr, "popen failed");
    std::string output;
    char buffer[4096];
    while (size_t n = fread(buffer, 1, sizeof(buffer), pipe)) output.append(buffer, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

// --- shared fixtures ----------------------------------------------------------

Signature qa_signature(const std::string& instruction) {
    return define_signature("qa", instruction,
                            {input_field("question"), output_field("answer", ValueKind::Boolean)});
}

ProgramModule qa_program(const std::string& instruction = "Answer the question.") {
    ProgramModule program;
    program.signature = qa_signature(instruction);
    program.params.model = "student";
    return program;
}

Example qa_example(const std::string& question, bool answer) {
    Example example;
    example.values["question"] = question;
    example.values["answer"] = answer ? "True" : "False";
    example.input_keys.insert("question");
    return example;
}

std::vector<Example> qa_set(const std::string& prefix, int count, bool answer) {
    std::vector<Example> out;
    for (int i = 0; i < count; ++i) out.push_back(qa_example(prefix + std::to_string(i), answer));
    return out;
}

constexpr const char* kMagic = "XYZZY";

ScriptedBackend keyword_student() {
    return ScriptedBackend({{kMagic, {bool_completion("answer", true)}, std::nullopt}},
                           bool_completion("answer", false));
}

ScriptedBackend keyword_meta(int magic_tip_index) {
    std::vector<ScriptedRule> rules = {
        {"Study the task examples", {completion({{"summary", "A boolean QA task."}})},
         std::nullopt},
        {"Examine the task demonstrations",
         {completion({{"constraints", "Answers must be exactly True."}})}, std::nullopt},
        {"Study the successful demonstrations", {completion({{"rules", "1. Be consistent."}})},
         std::nullopt},
    };
    const auto& tips = proposal_tips();
    for (size_t k = 0; k < tips.size(); ++k) {
        const std::string body =
            static_cast<int>(k) == magic_tip_index
                ? std::string("Say the magic word ") + kMagic + " and answer truthfully."
                : "Proposal " + std::to_string(k) + ": answer carefully.";
        rules.push_back({tips[k], {completion({{"proposed_instruction", body}})}, std::nullopt});
    }
    return ScriptedBackend(std::move(rules),
                           completion({{"proposed_instruction", "Generic proposal."}}));
}

double eval_candidate(const ProgramModule& program, const std::string& instruction,
                      const std::vector<Example>& valset, Backend& backend) {
    ProgramModule candidate = program;
    candidate.signature.instruction = instruction;
    return evaluate(candidate, valset, exact_match_metric("answer"), {1, 1, 0}, backend)
        .mean_score;
}

// --- criteria ------------------------------------------------------------------

void criterion_1_metric_arithmetic() {
    Timer timer;
    // 41 answered-correct of 44 answered, 6 blocked -> 93.18%
    std::vector<Outcome> cells;
    for (int i = 0; i < 20; ++i) cells.push_back(Outcome::TruePositive);
    for (int i = 0; i < 21; ++i) cells.push_back(Outcome::TrueNegative);
    for (int i = 0; i < 2; ++i) cells.push_back(Outcome::FalsePositive);
    cells.push_back(Outcome::FalseNegative);
    for (int i = 0; i < 6; ++i) cells.push_back(Outcome::NotAnswered);
    const EvaluationReport report = aggregate_report(cells);
    REQUIRE(report.accuracy.has_value(), "accuracy undefined");
    REQUIRE(std::abs(*report.accuracy - 0.9318) < 0.0001, "accuracy != 93.18%");
    REQUIRE(report.not_answered == 6, "not_answered != 6");

    Rng rng(1001);
    for (int round = 0; round < 1000; ++round) {
        const long tp = static_cast<long>(rng.below(30));
        const long fp = static_cast<long>(rng.below(30));
        const long tn = static_cast<long>(rng.below(30));
        const long fn = static_cast<long>(rng.below(30));
        std::vector<Outcome> vec;
        for (long i = 0; i < tp; ++i) vec.push_back(Outcome::TruePositive);
        for (long i = 0; i < fp; ++i) vec.push_back(Outcome::FalsePositive);
        for (long i = 0; i < tn; ++i) vec.push_back(Outcome::TrueNegative);
        for (long i = 0; i < fn; ++i) vec.push_back(Outcome::FalseNegative);
        rng.shuffle(vec);
        const EvaluationReport r = aggregate_report(vec);
        if (tp + fp > 0)
            REQUIRE(std::abs(*r.precision - double(tp) / double(tp + fp)) <= 1e-9,
                    "precision identity");
        if (tp + fn > 0)
            REQUIRE(std::abs(*r.recall - double(tp) / double(tp + fn)) <= 1e-9, "recall identity");
        if (r.precision && r.recall && *r.precision + *r.recall > 0) {
            const double f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
            REQUIRE(r.f1.has_value() && std::abs(*r.f1 - f1) <= 1e-9, "f1 identity");
        }
        if (tp + fp + tn + fn > 0)
            REQUIRE(std::abs(*r.accuracy - double(tp + tn) / double(tp + fp + tn + fn)) <= 1e-9,
                    "accuracy identity");
    }
    pass(1, "confusion arithmetic reproduces the reported table semantics", timer, 1.0);
}

void criterion_2_judge_formula() {
    Timer timer;
    Rng rng(1002);
    for (int round = 0; round < 1000; ++round) {
        const size_t count = 2 + rng.below(6);
        JudgePanel uniform;
        double remaining = 1.0;
        for (size_t i = 0; i < count; ++i) {
            double weight = i + 1 < count ? 1.0 / double(count) : remaining;
            remaining -= weight;
            uniform.criteria.push_back({"c" + std::to_string(i), "judge", weight, false});
        }
        std::vector<double> scores;
        double total = 0.0;
        for (size_t i = 0; i < count; ++i) {
            scores.push_back(rng.unit());
            total += scores.back();
        }
        REQUIRE(std::abs(weighted_final_score(scores, uniform) - total / double(count)) <= 1e-9,
                "uniform weights must equal the mean");

        // arbitrary normalized weights with a validity zero force 0.0
        JudgePanel weighted;
        std::vector<double> weights(count);
        double sum = 0.0;
        for (auto& w : weights) {
            w = 0.05 + rng.unit();
            sum += w;
        }
        double acc = 0.0;
        const size_t validity_index = rng.below(count);
        for (size_t i = 0; i < count; ++i) {
            double w = i + 1 < count ? weights[i] / sum : 1.0 - acc;
            acc += w;
            weighted.criteria.push_back(
                {"c" + std::to_string(i), "judge", w, i == validity_index});
        }
        std::vector<double> zeroed = scores;
        zeroed[validity_index] = 0.0;
        REQUIRE(weighted_final_score(zeroed, weighted) == 0.0, "validity zero-out failed");
    }
    pass(2, "weighted judge formula: uniform mean equality and validity zero-out", timer, 1.0);
}

void criterion_3_threshold() {
    Timer timer;
    REQUIRE(threshold_label(0.59) == true, "0.59 must flag a contradiction");
    REQUIRE(threshold_label(0.60) == false, "0.60 must not flag");
    REQUIRE(threshold_label(1.0) == false, "1.0 must not flag");
    REQUIRE(threshold_label(0.0) == true, "0.0 must flag");
    pass(3, "strict 0.6 threshold boundary", timer, 1.0);
}

void criterion_4_bootstrap_soundness() {
    Timer timer;
    ScriptedBackend backend({{"tq2", {bool_completion("answer", true)}, std::nullopt},
                             {"tq5", {bool_completion("answer", true)}, std::nullopt}},
                            bool_completion("answer", false));
    const ProgramModule program = qa_program();
    const auto trainset = qa_set("tq", 8, true);
    const Metric metric = exact_match_metric("answer");
    const DemoSet demos =
        bootstrap_demos(program, program, trainset, metric, 4, 0, 1.0, 99, backend);
    std::set<std::string> kept;
    for (const auto& demo : demos.demos) kept.insert(demo.values.at("question"));
    REQUIRE(kept == (std::set<std::string>{"tq2", "tq5"}),
            "bootstrapped demos must be exactly the solvable subset");

    for (const auto& demo : demos.demos) {
        Prediction replayed;
        replayed.parse_ok = true;
        replayed.values.emplace("answer", demo.values.at("answer") == "True");
        Example source;
        source.values = demo.values;
        REQUIRE(metric.fn(source, replayed) >= 1.0, "stored demo re-scores below threshold");
    }
    pass(4, "bootstrap keeps exactly the solvable ids and demos replay above threshold", timer,
         5.0);
}

void criterion_5_planted_keyword() {
    Timer timer;
    const auto trainset = qa_set("tq", 40, false);
    const auto valset = qa_set("vq", 75, true);  // validation shape from the routing study

    for (ProposerMode mode : {ProposerMode::Standard, ProposerMode::Custom}) {
        ScriptedBackend student = keyword_student();
        ScriptedBackend meta = keyword_meta(3);
        const ProgramModule program = qa_program();
        MiproConfig config;
        config.mode = mode;
        config.num_instructions = 12;
        config.trials = 15;
        config.minibatch_size = 15;
        const OptimizeOutcome outcome =
            mipro_optimize(program, trainset, valset, exact_match_metric("answer"), config, 4242,
                           meta, student);

        REQUIRE(outcome.artifact.signature.instruction.find(kMagic) != std::string::npos,
                "winner must carry the planted keyword");
        REQUIRE(outcome.log.proposed_instructions.size() == 12, "12 proposals expected");
        for (const auto& trial : outcome.log.trials)
            REQUIRE(trial.minibatch_ids.size() == 15, "every trial runs a 15-example minibatch");
        std::set<std::vector<int>> batches;
        for (const auto& trial : outcome.log.trials) batches.insert(trial.minibatch_ids);
        REQUIRE(batches.size() >= 5, "at least 5 distinct minibatches expected");

        // exhaustive full-evaluation oracle over the whole candidate space
        ScriptedBackend oracle_backend = keyword_student();
        std::vector<std::string> instructions{program.signature.instruction};
        for (const auto& proposal : outcome.log.proposed_instructions)
            instructions.push_back(proposal);
        size_t best = 0;
        double best_score = -1.0;
        for (size_t i = 0; i < instructions.size(); ++i) {
            const double score = eval_candidate(program, instructions[i], valset, oracle_backend);
            if (score > best_score + 1e-15) {
                best_score = score;
                best = i;
            }
        }
        REQUIRE(instructions[best] == outcome.artifact.signature.instruction,
                "optimizer winner must equal the exhaustive argmax");
        REQUIRE(std::abs(best_score - outcome.artifact.trial_summary.best_full_score) <= 1e-12,
                "winner score must match the oracle");
    }
    pass(5, "mipro (standard+custom) selects the planted proposal; exhaustive oracle agrees",
         timer, 30.0);
}

void criterion_6_improvement_or_revert() {
    Timer timer;
    const std::string baseline_instruction = "Answer the question. MAGIC-BASE applies.";
    const ProgramModule program = qa_program(baseline_instruction);
    const auto trainset = qa_set("tq", 6, true);
    const auto valset = qa_set("vq", 6, true);
    const Metric metric = exact_match_metric("answer");

    const auto demo_messages = render_prompt(qa_signature(baseline_instruction),
                                             {qa_example("d", true)}, {{"question", "x"}});
    const std::string demo_present = demo_messages[2].content + "\n[[ ## question ## ]]";
    auto make_student = [&] {
        return ScriptedBackend({{demo_present, {bool_completion("answer", false)}, std::nullopt},
                                {"MAGIC-BASE", {bool_completion("answer", true)}, std::nullopt}},
                               bool_completion("answer", false));
    };
    auto check = [&](const OptimizeOutcome& outcome, const char* name) {
        REQUIRE(outcome.artifact.signature.instruction == baseline_instruction,
                std::string(name) + " must return the baseline instruction");
        REQUIRE(outcome.artifact.demos.empty(), std::string(name) + " must drop losing demos");
    };

    {
        ScriptedBackend student = make_student();
        check(labeled_fewshot_optimize(program, trainset, valset, metric, 2, 5, student),
              "labeled-fewshot");
    }
    {
        ScriptedBackend student = make_student();
        check(bootstrap_fewshot(program, trainset, valset, metric,
                                {.max_bootstrapped = 2, .max_labeled = 0}, 5, student),
              "bootstrap-fewshot");
    }
    {
        ScriptedBackend student = make_student();
        RandomSearchConfig config;
        config.num_candidates = 2;
        config.max_bootstrapped = 2;
        config.max_labeled = 0;
        check(random_search(program, trainset, valset, metric, config, 5, student),
              "random-search");
    }
    for (ProposerMode mode : {ProposerMode::Standard, ProposerMode::Custom}) {
        ScriptedBackend student = make_student();
        ScriptedBackend meta = keyword_meta(-1);
        MiproConfig config;
        config.mode = mode;
        config.num_instructions = 6;
        config.trials = 10;
        config.minibatch_size = 3;
        check(mipro_optimize(program, trainset, valset, metric, config, 5, meta, student),
              mode == ProposerMode::Custom ? "custom-mipro" : "mipro");
    }
    {
        ScriptedBackend student = make_student();
        ScriptedBackend meta = keyword_meta(-1);
        InferRulesConfig config;
        config.max_bootstrapped = 2;
        config.num_rule_sets = 2;
        check(infer_rules(program, trainset, valset, metric, config, 5, meta, student),
              "infer-rules");
    }
    pass(6, "all six optimizers revert to the baseline on the adversarial task", timer, 10.0);
}

void criterion_7_majority_vote() {
    Timer timer;
    for (int length = 1; length <= 7; ++length) {
        for (int mask = 0; mask < (1 << length); ++mask) {
            std::vector<Prediction> votes;
            int true_count = 0;
            for (int i = 0; i < length; ++i) {
                const bool value = (mask >> i) & 1;
                true_count += value ? 1 : 0;
                Prediction prediction;
                prediction.parse_ok = true;
                prediction.values.emplace("answer", value);
                votes.push_back(std::move(prediction));
            }
            // brute-force frequency oracle with the earliest-first tie rule
            const int false_count = length - true_count;
            bool expected;
            if (true_count != false_count)
                expected = true_count > false_count;
            else
                expected = std::get<bool>(votes.front().values.at("answer"));

            const Prediction winner = majority_vote_select(votes, "answer");
            REQUIRE(winner.parse_ok, "vote must parse");
            REQUIRE(std::get<bool>(*winner.find("answer")) == expected,
                    "majority vote diverged from the frequency oracle at length " +
                        std::to_string(length) + " mask " + std::to_string(mask));
        }
    }
    pass(7, "exhaustive boolean vote vectors up to length 7 match the frequency oracle", timer,
         1.0);
}

void criterion_8_end_to_end_determinism() {
    Timer timer;
    pftest::TmpDir dir("acceptance_determinism");

    // dataset + config fixtures
    std::string rows;
    for (int i = 0; i < 12; ++i)
        rows += std::string("{\"question\": \"tq") + std::to_string(i) + "\", \"label\": \"True\"}\n";
    pftest::write_file(dir.file("train.jsonl"), rows);
    std::string val_rows;
    for (int i = 0; i < 10; ++i)
        val_rows +=
            std::string("{\"question\": \"vq") + std::to_string(i) + "\", \"label\": \"True\"}\n";
    pftest::write_file(dir.file("val.jsonl"), val_rows);

    nlohmann::json dataset_block = {{"path", dir.file("val.jsonl")},
                                    {"format", "jsonl"},
                                    {"mapping", {{"question", "question"}, {"label", "answer"}}},
                                    {"inputs", {"question"}}};
    nlohmann::json train_block = dataset_block;
    train_block["path"] = dir.file("train.jsonl");

    nlohmann::json base_config = {
        {"program",
         {{"signature",
           {{"name", "qa"},
            {"instruction", "Answer the question."},
            {"fields",
             nlohmann::json::array({{{"name", "question"}, {"kind", "input"}, {"type", "text"}},
                                    {{"name", "answer"},
                                     {"kind", "output"},
                                     {"type", "boolean"}}})}}},
          {"module", "predict"},
          {"gen", {{"model", "scripted"}, {"max_tokens", 256}}}}},
        {"trainset", train_block},
        {"valset", dataset_block},
        {"dataset", dataset_block},
        {"metric", {{"name", "exact_match"}, {"field", "answer"}}},
        {"optimizer",
         {{"name", "random-search"}, {"num_candidates", 2}, {"max_bootstrapped", 2},
          {"max_labeled", 0}}},
        {"seed", 7}};

    nlohmann::json scripted = base_config;
    scripted["backend"] = {{"kind", "scripted"},
                           {"model", "scripted"},
                           {"fallback", bool_completion("answer", true)}};
    pftest::write_file(dir.file("record.json"), scripted.dump(2));

    nlohmann::json replay = base_config;
    replay["backend"] = {{"kind", "replay"}, {"cache_path", dir.file("cache.jsonl")}};
    pftest::write_file(dir.file("replay.json"), replay.dump(2));

    // record once, then replay twice with identical seeds
    const CliRun record = run_cli("optimize --config " + dir.file("record.json") +
                                  " --optimizer random-search --seed 7 --cache " +
                                  dir.file("cache.jsonl") + " --out " + dir.file("a0.json") +
                                  " --log " + dir.file("l0.json"));
    REQUIRE(record.exit_code == 0, "recording optimize run failed:\n" + record.output);
    for (int run = 1; run <= 2; ++run) {
        const CliRun replayed = run_cli(
            "optimize --config " + dir.file("replay.json") +
            " --optimizer random-search --seed 7 --out " + dir.file("a" + std::to_string(run) +
            ".json") + " --log " + dir.file("l" + std::to_string(run) + ".json"));
        REQUIRE(replayed.exit_code == 0, "replayed optimize run failed:\n" + replayed.output);
    }
    REQUIRE(pftest::read_file(dir.file("a1.json")) == pftest::read_file(dir.file("a2.json")),
            "replayed artifacts must be byte-identical");
    REQUIRE(pftest::read_file(dir.file("l1.json")) == pftest::read_file(dir.file("l2.json")),
            "replayed trial logs must be byte-identical");
    REQUIRE(!pftest::read_file(dir.file("a1.json")).empty(), "artifact must not be empty");

    // eval: record once, then parallelism 1 vs 8 on the replay cache
    const CliRun eval_record = run_cli("eval --config " + dir.file("record.json") + " --cache " +
                                       dir.file("eval_cache.jsonl") + " --repeats 2 --json");
    REQUIRE(eval_record.exit_code == 0, "recording eval failed:\n" + eval_record.output);
    nlohmann::json eval_replay_config = base_config;
    eval_replay_config["backend"] = {{"kind", "replay"},
                                     {"cache_path", dir.file("eval_cache.jsonl")}};
    pftest::write_file(dir.file("eval_replay.json"), eval_replay_config.dump(2));
    const CliRun serial = run_cli("eval --config " + dir.file("eval_replay.json") +
                                  " --repeats 2 --parallelism 1 --json");
    const CliRun parallel = run_cli("eval --config " + dir.file("eval_replay.json") +
                                    " --repeats 2 --parallelism 8 --json");
    REQUIRE(serial.exit_code == 0, "serial eval failed:\n" + serial.output);
    REQUIRE(parallel.exit_code == 0, "parallel eval failed:\n" + parallel.output);
    REQUIRE(serial.output == parallel.output, "parallelism changed the eval report");
    pass(8, "seeded optimize replays byte-identically; eval is parallelism-invariant", timer,
         30.0);
}

void criterion_9_data_pipeline() {
    Timer timer;
    // balancing the 6142/666 shape
    Dataset dataset;
    for (int i = 0; i < 6142; ++i) {
        Example example;
        example.values["prompt"] = "row " + std::to_string(i);
        example.values["label"] = i < 666 ? "True" : "False";
        dataset.examples.push_back(std::move(example));
    }
    const Dataset balanced = balance_by_label(dataset, "label", 1);
    REQUIRE(balanced.examples.size() == 1332, "balanced size must be 1332");
    long positives = 0;
    for (const auto& example : balanced.examples)
        positives += example.values.at("label") == "True" ? 1 : 0;
    REQUIRE(positives == 666, "positives must stay at the minority count");

    // exact, disjoint splits
    auto check_split = [](size_t total, SplitSizes sizes) {
        Dataset all;
        for (size_t i = 0; i < total; ++i) {
            Example example;
            example.values["id"] = std::to_string(i);
            all.examples.push_back(std::move(example));
        }
        const SplitResult parts = split(all, sizes, 9);
        REQUIRE(parts.train.examples.size() == sizes.train, "train size mismatch");
        REQUIRE(parts.val.examples.size() == sizes.val, "val size mismatch");
        REQUIRE(parts.test.examples.size() == sizes.test, "test size mismatch");
        std::set<std::string> seen;
        for (const auto* part : {&parts.train, &parts.val, &parts.test})
            for (const auto& example : part->examples)
                REQUIRE(seen.insert(example.values.at("id")).second, "splits must be disjoint");
    };
    check_split(136, {40, 75, 21});
    check_split(90, {28, 45, 13});

    // 40 corrupted rows round-robin over 4 kinds: 10 each
    ScriptedBackend corruptor({{"dead, unreachable", {"K0"}, std::nullopt},
                               {"syntax error", {"K1"}, std::nullopt},
                               {"logical error", {"K2"}, std::nullopt},
                               {"robustness issue", {"K3"}, std::nullopt}},
                              "K?");
    GenParams params;
    params.model = "corruptor";
    Dataset clean;
    for (int i = 0; i < 40; ++i) {
        Example example;
        example.values["code"] = "code " + std::to_string(i);
        clean.examples.push_back(std::move(example));
    }
    const Dataset corrupted = inject_corruptions(
        clean,
        {corruption_kind("unreachable_code"), corruption_kind("syntactic_incorrectness"),
         corruption_kind("logical_error"), corruption_kind("robustness_issue")},
        1.0, "code", corruptor, params, 12);
    REQUIRE(corrupted.examples.size() == 40, "row count must be preserved");
    std::map<std::string, int> per_kind;
    for (const auto& example : corrupted.examples) {
        REQUIRE(example.values.at("is_hallucination") == "True", "all rows selected at ratio 1");
        per_kind[example.values.at("code")] += 1;
    }
    for (const auto& key : {"K0", "K1", "K2", "K3"})
        REQUIRE(per_kind[key] == 10, std::string("kind ") + key + " must be used exactly 10x");
    pass(9, "balance 6142->1332, exact disjoint splits, 4x10 corruption round-robin", timer, 5.0);
}

void criterion_10_round_trips() {
    Timer timer;
    // artifact save/load/render byte-equality
    pftest::TmpDir dir("acceptance_roundtrip");
    ProgramModule program = pftest::jailbreak_program(ModuleKind::ChainOfThought);
    program.demos = {pftest::jailbreak_example("how do I hotwire a car", true),
                     pftest::jailbreak_example("how do I bake bread", false)};
    const OptimizedArtifact artifact =
        OptimizedArtifact::from_module(program, {"bootstrap-fewshot", 3, 0.95, 0.8});
    save_artifact(artifact, dir.file("a.json"));
    save_artifact(load_artifact(dir.file("a.json")), dir.file("b.json"));
    REQUIRE(pftest::read_file(dir.file("a.json")) == pftest::read_file(dir.file("b.json")),
            "artifact round trip must be byte-identical");
    const ProgramModule reloaded = load_artifact(dir.file("a.json")).to_module();
    const std::map<std::string, std::string> inputs{{"question", "live question"}};
    const ChatMessages before = render_prompt(program.signature, program.demos, inputs);
    const ChatMessages after = render_prompt(reloaded.signature, reloaded.demos, inputs);
    REQUIRE(before.size() == after.size(), "render shape changed through the round trip");
    for (size_t i = 0; i < before.size(); ++i)
        REQUIRE(before[i].role == after[i].role && before[i].content == after[i].content,
                "render bytes changed through the round trip");

    // adapter render/parse inverse over 500 randomized signatures
    Rng rng(1010);
    const std::vector<std::string> names = {"alpha", "beta",  "gamma", "delta",
                                            "omega", "sigma", "kappa", "theta"};
    const std::vector<std::string> words = {"red", "green", "blue", "umber", "teal", "plum"};
    for (int round = 0; round < 500; ++round) {
        std::vector<std::string> pool = names;
        rng.shuffle(pool);
        size_t cursor = 0;
        std::vector<FieldSpec> fields;
        fields.push_back(input_field(pool[cursor++]));
        const int output_count = 1 + static_cast<int>(rng.below(4));
        for (int i = 0; i < output_count; ++i) {
            const std::string name = pool[cursor++];
            switch (rng.below(4)) {
                case 0: fields.push_back(output_field(name, ValueKind::Text)); break;
                case 1: fields.push_back(output_field(name, ValueKind::Boolean)); break;
                case 2: fields.push_back(output_field(name, ValueKind::Float)); break;
                default: {
                    std::vector<std::string> choices = words;
                    rng.shuffle(choices);
                    choices.resize(2 + rng.below(3));
                    fields.push_back(literal_output_field(name, choices));
                }
            }
        }
        const Signature sig = define_signature("prop", "Do the task.", fields);
        Example demo;
        demo.values[sig.inputs()[0]->name] = "x";
        demo.input_keys.insert(sig.inputs()[0]->name);
        std::map<std::string, FieldValue> expected;
        for (const auto* field : sig.outputs()) {
            FieldValue value;
            switch (field->type) {
                case ValueKind::Text:
                    value = words[rng.below(words.size())] + " " + words[rng.below(words.size())];
                    break;
                case ValueKind::Boolean: value = rng.below(2) == 0; break;
                case ValueKind::Float: value = (rng.unit() - 0.5) * 2000.0; break;
                case ValueKind::Literal:
                    value = LiteralValue{field->choices[rng.below(field->choices.size())]};
                    break;
            }
            expected[field->name] = value;
            demo.values[field->name] = value_to_string(value);
        }
        const Prediction parsed = parse_completion(sig, render_output_block(sig, demo));
        REQUIRE(parsed.parse_ok, "round-trip parse failed");
        for (const auto& [name, value] : expected) {
            const FieldValue* got = parsed.find(name);
            REQUIRE(got != nullptr, "round-trip lost a field");
            if (const auto* num = std::get_if<double>(&value)) {
                REQUIRE(std::abs(std::get<double>(*got) - *num) <= 1e-9,
                        "round-trip float drifted");
            } else {
                REQUIRE(*got == value, "round-trip value changed");
            }
        }
    }
    pass(10, "artifact and adapter round trips are exact", timer, 10.0);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-promptforge-cli>\n";
        return 2;
    }
    g_cli = argv[1];

    criterion_1_metric_arithmetic();
    criterion_2_judge_formula();
    criterion_3_threshold();
    criterion_4_bootstrap_soundness();
    criterion_5_planted_keyword();
    criterion_6_improvement_or_revert();
    criterion_7_majority_vote();
    criterion_8_end_to_end_determinism();
    criterion_9_data_pipeline();
    criterion_10_round_trips();

    std::printf("[PASS] all acceptance criteria\n");
    return 0;
}
