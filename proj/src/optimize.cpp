#include "promptforge/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "promptforge/errors.hpp"
#include "promptforge/rng.hpp"

namespace promptforge {

namespace {

ProgramModule program_with(const ProgramModule& base, const std::string& instruction,
                           const std::vector<Example>& demos) {
    ProgramModule candidate = base;
    candidate.signature.instruction = instruction;
    candidate.demos = demos;
    return candidate;
}

double full_eval_score(const ProgramModule& program, const std::vector<Example>& valset,
                       const Metric& metric, Backend& backend, int parallelism,
                       long& blocked_events) {
    EvalResult result =
        evaluate(program, valset, metric, EvalConfig{parallelism, 1, 0}, backend);
    blocked_events += result.blocked_events;
    return result.mean_score;
}

// Demo built from a successful trace: the live inputs plus the parsed
// outputs, reasoning included when the predictor produced one.
Example demo_from_trace(const Signature& sig, const Trace& trace) {
    Example demo;
    demo.values = trace.inputs;
    for (const auto& key : trace.inputs) demo.input_keys.insert(key.first);
    for (const auto& [name, value] : trace.prediction.values)
        demo.values[name] = value_to_string(value);
    if (trace.prediction.reasoning) demo.values[kReasoningField] = *trace.prediction.reasoning;
    (void)sig;
    return demo;
}

bool demo_complete(const ProgramModule& program, const Example& example) {
    for (const auto* field : program.signature.inputs())
        if (!example.has(field->name)) return false;
    for (const auto* field : program.signature.outputs())
        if (field->required_in_demos && !example.has(field->name)) return false;
    return true;
}

std::map<std::string, std::string> example_inputs(const Example& example) {
    std::map<std::string, std::string> inputs;
    for (const auto& key : example.input_keys) inputs.emplace(key, example.get(key));
    return inputs;
}

std::string render_demos_text(const std::vector<Example>& demos) {
    if (demos.empty()) return "(no demonstrations available)";
    std::string out;
    for (size_t i = 0; i < demos.size(); ++i) {
        out += "Demonstration " + std::to_string(i + 1) + ":\n";
        for (const auto& [key, value] : demos[i].values) out += "  " + key + ": " + value + "\n";
    }
    return out;
}

// Meta completions are parsed leniently: marker-delimited output when the
// model followed the format, trimmed raw text otherwise.
std::string parse_text_reply(const Signature& sig, const std::string& field,
                             const std::string& raw) {
    Prediction prediction = parse_completion(sig, raw);
    if (const FieldValue* value = prediction.find(field)) return trim(value_to_string(*value));
    return trim(raw);
}

std::string meta_call(Backend& backend, const Signature& sig,
                      const std::map<std::string, std::string>& inputs, const GenParams& params,
                      const std::string& output_field) {
    ChatMessages messages = render_prompt(sig, {}, inputs, {});
    CompletionResult result = backend.complete(messages, params);
    if (!result.ok()) {
        const auto& error = result.error();
        fail(error.kind == BackendErrorKind::Transport ? Errc::TransportError
                                                       : Errc::ProviderError,
             error.detail);
    }
    return parse_text_reply(sig, output_field, result.texts().front());
}

}  // namespace

// --- demo construction --------------------------------------------------------

CandidateProgram labeled_fewshot(const ProgramModule& program,
                                 const std::vector<Example>& trainset, int k, uint64_t seed) {
    if (k < 0) fail(Errc::InvalidArgument, "k must be >= 0");
    CandidateProgram candidate;
    candidate.instruction = program.signature.instruction;
    candidate.origin.demo_seed = seed;
    if (k == 0) {
        candidate.demos = program.demos;
        return candidate;
    }

    std::vector<size_t> complete;
    for (size_t i = 0; i < trainset.size(); ++i)
        if (demo_complete(program, trainset[i])) complete.push_back(i);
    if (static_cast<size_t>(k) > complete.size())
        fail(Errc::InsufficientData, "need " + std::to_string(k) + " complete examples, have " +
                                         std::to_string(complete.size()));
    Rng rng(seed);
    rng.shuffle(complete);
    for (int i = 0; i < k; ++i)
        candidate.demos.push_back(trainset[complete[static_cast<size_t>(i)]]);
    return candidate;
}

DemoSet bootstrap_demos(const ProgramModule& program, const ProgramModule& teacher,
                        const std::vector<Example>& trainset, const Metric& metric,
                        int max_bootstrapped, int max_labeled, double threshold, uint64_t seed,
                        Backend& backend) {
    if (max_bootstrapped + max_labeled < 1)
        fail(Errc::InvalidArgument, "max_bootstrapped + max_labeled must be >= 1");

    std::vector<size_t> order(trainset.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    DemoSet result;
    std::set<size_t> used;
    for (size_t index : order) {
        if (static_cast<int>(result.demos.size()) >= max_bootstrapped) break;
        const Example& example = trainset[index];
        ForwardResult forward_result = forward(teacher, example_inputs(example), backend);
        if (forward_result.trace.not_answered) {
            ++result.blocked_events;
            continue;
        }
        if (metric.fn(example, forward_result.prediction) >= threshold) {
            result.demos.push_back(demo_from_trace(program.signature, forward_result.trace));
            result.bootstrapped_from.push_back(index);
            used.insert(index);
        }
    }
    if (result.demos.empty() && max_labeled == 0)
        fail(Errc::NoSuccessfulTraces, "no trace reached the metric threshold");

    int labeled = 0;
    for (size_t index : order) {
        if (labeled >= max_labeled) break;
        if (used.count(index)) continue;
        if (!demo_complete(program, trainset[index])) continue;
        result.demos.push_back(trainset[index]);
        ++labeled;
    }
    return result;
}

// --- instruction proposal -------------------------------------------------------

const std::vector<std::string>& proposal_tips() {
    static const std::vector<std::string> tips = {
        "Be creative: try an unusual but effective way to phrase the task.",
        "Be precise: state exactly what the model must decide and return.",
        "Give the model a fitting expert persona for this task.",
        "Emphasize the exact output format the model must produce.",
        "Spell out the constraints and edge cases the model must respect.",
        "Keep the instruction short, direct, and free of filler.",
    };
    return tips;
}

namespace {

Signature summarize_signature() {
    return define_signature(
        "summarize_dataset",
        "Study the task examples and describe the task, the shape of the inputs and "
        "outputs, and any patterns you notice. Keep the summary under 120 words.",
        {input_field("examples", ValueKind::Text, "sampled task examples"),
         output_field("summary", ValueKind::Text, "a concise dataset summary")});
}

Signature proposer_signature() {
    return define_signature(
        "generate_instruction",
        "Write one improved instruction for the language-model program described below. "
        "Use the dataset summary, the program description, the grounding material, and "
        "the tip. Return only the new instruction text.",
        {input_field("dataset_summary", ValueKind::Text, "what the data looks like"),
         input_field("program_summary", ValueKind::Text, "the program being optimized"),
         input_field("grounding", ValueKind::Text,
                     "demonstrations or extracted constraints to ground the instruction"),
         input_field("tip", ValueKind::Text, "a generation tip to follow"),
         input_field("user_tip", ValueKind::Text, "an optional tip from the user"),
         input_field("user_constraint", ValueKind::Text, "an optional constraint from the user"),
         output_field("proposed_instruction", ValueKind::Text, "the improved instruction")});
}

Signature constraints_signature() {
    return define_signature(
        "extract_constraints",
        "Examine the task demonstrations and the program source. Extract the relevant "
        "constraints and edge cases a good instruction for this program must cover, as a "
        "concise list.",
        {input_field("demos", ValueKind::Text, "task demonstrations"),
         input_field("program_source", ValueKind::Text, "the program being optimized"),
         output_field("constraints", ValueKind::Text, "constraints and edge cases")});
}

Signature rules_signature() {
    return define_signature(
        "induce_rules",
        "Study the successful demonstrations and induce a concise numbered list of rules "
        "that lead to correct outputs for this task.",
        {input_field("demos", ValueKind::Text, "successful demonstrations"),
         output_field("rules", ValueKind::Text, "the induced rules")});
}

}  // namespace

std::string summarize_dataset(Backend& meta_backend, const std::vector<Example>& trainset,
                              uint64_t seed, const GenParams& params) {
    Rng rng(seed);
    const size_t count = std::min<size_t>(trainset.size(), 10);
    std::vector<size_t> picks = rng.sample_indices(trainset.size(), count);
    std::sort(picks.begin(), picks.end());
    std::string text;
    for (size_t index : picks) {
        text += "Example " + std::to_string(index) + ":\n";
        for (const auto& [key, value] : trainset[index].values)
            text += "  " + key + ": " + value + "\n";
    }
    if (text.empty()) text = "(no training examples)";
    return meta_call(meta_backend, summarize_signature(), {{"examples", text}}, params, "summary");
}

std::string describe_program(const ProgramModule& program) {
    std::string out = "Program '" + program.signature.name + "' (" +
                      module_kind_name(program.kind) + ")\n";
    out += "Instruction: " + program.signature.instruction + "\n";
    out += "Inputs:\n";
    for (const auto* field : program.signature.inputs())
        out += "  " + field->name + " (" + value_kind_name(field->type) + ")\n";
    out += "Outputs:\n";
    for (const auto* field : program.signature.outputs()) {
        out += "  " + field->name + " (" + value_kind_name(field->type) + ")";
        if (field->type == ValueKind::Literal) {
            out += " one of:";
            for (const auto& choice : field->choices) out += " " + choice;
        }
        out += "\n";
    }
    return out;
}

std::vector<std::string> propose_instructions(Backend& meta_backend, const ProposerInputs& inputs,
                                              int count, double temperature,
                                              const std::string& model) {
    if (count < 1) fail(Errc::InvalidArgument, "count must be >= 1");
    GenParams params;
    params.model = model;
    params.temperature = temperature;
    params.max_tokens = 1024;

    const Signature sig = proposer_signature();
    const auto& tips = proposal_tips();
    const std::string grounding = inputs.constraints
                                      ? *inputs.constraints
                                      : render_demos_text(inputs.bootstrapped_demos);

    std::vector<std::string> proposals;
    std::set<std::string> seen;
    for (int i = 0; i < count; ++i) {
        std::map<std::string, std::string> fields{
            {"dataset_summary", inputs.dataset_summary},
            {"program_summary", inputs.program_summary},
            {"grounding", grounding},
            {"tip", tips[static_cast<size_t>(i) % tips.size()]},
            {"user_tip", inputs.custom_tip.value_or("(none)")},
            {"user_constraint", inputs.custom_constraint.value_or("(none)")},
        };
        std::string proposal = meta_call(meta_backend, sig, fields, params, "proposed_instruction");
        if (proposal.empty() || seen.count(proposal))
            proposal = meta_call(meta_backend, sig, fields, params, "proposed_instruction");
        if (proposal.empty())
            fail(Errc::EmptyProposal, "proposal " + std::to_string(i) + " empty after retry");
        seen.insert(proposal);
        proposals.push_back(std::move(proposal));
    }
    return proposals;
}

std::string get_constraints_from_demos(Backend& meta_backend, const std::vector<Example>& demos,
                                       const std::string& program_source,
                                       const GenParams& params) {
    if (demos.empty() && trim(program_source).empty())
        fail(Errc::EmptyInput, "need demos or program source to extract constraints");
    std::string constraints =
        meta_call(meta_backend, constraints_signature(),
                  {{"demos", render_demos_text(demos)}, {"program_source", program_source}},
                  params, "constraints");
    if (constraints.empty()) fail(Errc::EmptyProposal, "constraint extraction returned nothing");
    return constraints;
}

// --- selection -------------------------------------------------------------------

namespace {

class UcbSelection : public SelectionStrategy {
  public:
    explicit UcbSelection(double exploration) : exploration_(exploration) {}

    size_t select(const std::vector<CandidateStats>& stats, int trial_index) override {
        (void)trial_index;
        long total = 0;
        for (const auto& entry : stats) total += entry.visits;
        size_t best = 0;
        double best_value = -1.0;
        for (size_t i = 0; i < stats.size(); ++i) {
            if (stats[i].visits == 0) continue;  // unvisited handled by the caller
            const double bonus =
                exploration_ * std::sqrt(std::log(static_cast<double>(std::max(total, 1L))) /
                                         static_cast<double>(stats[i].visits));
            const double value = stats[i].mean_score + bonus;
            if (value > best_value + 1e-12) {
                best_value = value;
                best = i;
            }
        }
        return best;
    }

  private:
    double exploration_;
};

}  // namespace

std::unique_ptr<SelectionStrategy> make_ucb_selection(double exploration) {
    return std::make_unique<UcbSelection>(exploration);
}

// --- optimizers -------------------------------------------------------------------

namespace {

OptimizeOutcome pick_better(const ProgramModule& program, const std::vector<Example>& valset,
                            const Metric& metric, const CandidateProgram& candidate,
                            const std::string& optimizer, uint64_t seed, Backend& backend,
                            TrialLog&& log, int parallelism) {
    const ProgramModule candidate_module =
        program_with(program, candidate.instruction, candidate.demos);
    double baseline_score =
        full_eval_score(program, valset, metric, backend, parallelism, log.blocked_events);
    double candidate_score = full_eval_score(candidate_module, valset, metric, backend,
                                             parallelism, log.blocked_events);
    log.optimizer = optimizer;
    log.seed = seed;
    log.full_evaluations.push_back({-1, 0, baseline_score});
    log.full_evaluations.push_back({-1, 1, candidate_score});
    Trial trial;
    trial.trial_index = 0;
    trial.origin = candidate.origin;
    trial.minibatch_score = candidate_score;
    trial.full_score = candidate_score;
    log.trials.push_back(std::move(trial));

    const bool improved = candidate_score > baseline_score;
    TrialSummary summary{optimizer, seed, improved ? candidate_score : baseline_score,
                         baseline_score};
    const ProgramModule& winner = improved ? candidate_module : program;
    return OptimizeOutcome{OptimizedArtifact::from_module(winner, summary), std::move(log)};
}

}  // namespace

OptimizeOutcome labeled_fewshot_optimize(const ProgramModule& program,
                                         const std::vector<Example>& trainset,
                                         const std::vector<Example>& valset, const Metric& metric,
                                         int num_demos, uint64_t seed, Backend& backend) {
    CandidateProgram candidate =
        labeled_fewshot(program, trainset, num_demos, derive_seed(seed, "labeled"));
    return pick_better(program, valset, metric, candidate, "labeled-fewshot", seed, backend,
                       TrialLog{}, 1);
}

OptimizeOutcome bootstrap_fewshot(const ProgramModule& program,
                                  const std::vector<Example>& trainset,
                                  const std::vector<Example>& valset, const Metric& metric,
                                  const BootstrapConfig& config, uint64_t seed, Backend& backend) {
    const double threshold = config.threshold.value_or(metric.default_threshold());
    TrialLog log;
    DemoSet demo_set =
        bootstrap_demos(program, program, trainset, metric, config.max_bootstrapped,
                        config.max_labeled, threshold, derive_seed(seed, "bootstrap"), backend);
    log.blocked_events += demo_set.blocked_events;
    CandidateProgram candidate;
    candidate.instruction = program.signature.instruction;
    candidate.demos = std::move(demo_set.demos);
    candidate.origin = {0, 1, derive_seed(seed, "bootstrap")};
    return pick_better(program, valset, metric, candidate, "bootstrap-fewshot", seed, backend,
                       std::move(log), 1);
}

OptimizeOutcome random_search(const ProgramModule& program, const std::vector<Example>& trainset,
                              const std::vector<Example>& valset, const Metric& metric,
                              const RandomSearchConfig& config, uint64_t seed, Backend& backend) {
    if (config.num_candidates < 1) fail(Errc::InvalidArgument, "num_candidates must be >= 1");
    if (valset.empty()) fail(Errc::EmptyDataset, "validation set is empty");
    const double threshold = config.threshold.value_or(metric.default_threshold());

    TrialLog log;
    log.optimizer = "random-search";
    log.seed = seed;

    // Fixed slate: the program itself, labeled-only demos, one full
    // bootstrap, then seeded variants with a random bootstrapped demo count.
    std::vector<CandidateProgram> slate;
    {
        CandidateProgram base;
        base.instruction = program.signature.instruction;
        base.demos = program.demos;
        base.origin = {0, 0, seed};
        slate.push_back(std::move(base));
    }
    {
        CandidateProgram labeled;
        try {
            labeled = labeled_fewshot(program, trainset, config.max_labeled,
                                      derive_seed(seed, "labeled"));
        } catch (const Error&) {
            labeled.instruction = program.signature.instruction;
            labeled.demos = program.demos;
        }
        labeled.origin = {0, 1, derive_seed(seed, "labeled")};
        slate.push_back(std::move(labeled));
    }
    std::vector<std::string> skip_notes(static_cast<size_t>(config.num_candidates) + 3);
    {
        CandidateProgram boot;
        boot.instruction = program.signature.instruction;
        boot.origin = {0, 2, derive_seed(seed, "bootstrap", 0)};
        try {
            DemoSet demo_set = bootstrap_demos(program, program, trainset, metric,
                                               config.max_bootstrapped, config.max_labeled,
                                               threshold, boot.origin.demo_seed, backend);
            log.blocked_events += demo_set.blocked_events;
            boot.demos = std::move(demo_set.demos);
        } catch (const Error& error) {
            skip_notes[2] = error.what();
        }
        slate.push_back(std::move(boot));
    }
    Rng rng(derive_seed(seed, "subset_sizes"));
    for (int i = 0; i < config.num_candidates; ++i) {
        CandidateProgram variant;
        variant.instruction = program.signature.instruction;
        variant.origin = {0, 3 + i, derive_seed(seed, "bootstrap", static_cast<uint64_t>(i) + 1)};
        const int subset = config.max_bootstrapped > 0
                               ? 1 + static_cast<int>(rng.below(
                                         static_cast<uint64_t>(config.max_bootstrapped)))
                               : 0;
        try {
            DemoSet demo_set =
                bootstrap_demos(program, program, trainset, metric, subset, config.max_labeled,
                                threshold, variant.origin.demo_seed, backend);
            log.blocked_events += demo_set.blocked_events;
            variant.demos = std::move(demo_set.demos);
        } catch (const Error& error) {
            skip_notes[static_cast<size_t>(3 + i)] = error.what();
        }
        slate.push_back(std::move(variant));
    }

    std::vector<int> all_ids(valset.size());
    for (size_t i = 0; i < valset.size(); ++i) all_ids[i] = static_cast<int>(i);

    size_t best_index = 0;
    double best_score = -1.0;
    for (size_t i = 0; i < slate.size(); ++i) {
        Trial trial;
        trial.trial_index = static_cast<int>(i);
        trial.origin = slate[i].origin;
        trial.minibatch_ids = all_ids;
        if (!skip_notes[i].empty()) {
            trial.note = "skipped: " + skip_notes[i];
            log.trials.push_back(std::move(trial));
            continue;
        }
        const ProgramModule candidate_module =
            program_with(program, slate[i].instruction, slate[i].demos);
        const double score = full_eval_score(candidate_module, valset, metric, backend,
                                             config.parallelism, log.blocked_events);
        slate[i].score = score;
        trial.minibatch_score = score;
        trial.full_score = score;
        log.full_evaluations.push_back({static_cast<int>(i), static_cast<int>(i), score});
        log.trials.push_back(std::move(trial));
        if (score > best_score + 1e-15) {
            best_score = score;
            best_index = i;
        }
    }

    const double baseline_score = slate[0].score.value_or(0.0);
    TrialSummary summary{"random-search", seed, best_score, baseline_score};
    const ProgramModule winner =
        program_with(program, slate[best_index].instruction, slate[best_index].demos);
    return OptimizeOutcome{OptimizedArtifact::from_module(winner, summary), std::move(log)};
}

OptimizeOutcome mipro_optimize(const ProgramModule& program, const std::vector<Example>& trainset,
                               const std::vector<Example>& valset, const Metric& metric,
                               const MiproConfig& config, uint64_t seed, Backend& meta_backend,
                               Backend& student_backend, SelectionStrategy* selection) {
    if (config.trials < 1) fail(Errc::InvalidArgument, "trials must be >= 1");
    if (config.minibatch_size < 1 ||
        static_cast<size_t>(config.minibatch_size) > valset.size())
        fail(Errc::InvalidArgument, "minibatch_size must be in [1, |valset|]");
    const bool zero_shot = config.num_demo_sets == 0;
    if (zero_shot != (config.max_bootstrapped == 0 && config.max_labeled == 0))
        fail(Errc::InvalidArgument,
             "zero-shot means num_demo_sets, max_bootstrapped and max_labeled are all zero");
    const double threshold = config.threshold.value_or(metric.default_threshold());

    TrialLog log;
    log.optimizer = config.mode == ProposerMode::Custom ? "custom-mipro" : "mipro";
    log.seed = seed;

    GenParams meta_params;
    meta_params.model = program.params.model;
    meta_params.temperature = config.proposer_temperature;
    meta_params.max_tokens = 1024;

    // (1) demo sets
    std::vector<std::vector<Example>> demo_sets;
    for (int d = 0; d < config.num_demo_sets; ++d) {
        const uint64_t demo_seed = derive_seed(seed, "demos", static_cast<uint64_t>(d));
        try {
            DemoSet demo_set =
                bootstrap_demos(program, program, trainset, metric, config.max_bootstrapped,
                                config.max_labeled, threshold, demo_seed, student_backend);
            log.blocked_events += demo_set.blocked_events;
            demo_sets.push_back(std::move(demo_set.demos));
        } catch (const Error&) {
            // set skipped; the candidate space just gets smaller
        }
    }

    // (2) instruction proposals
    std::vector<std::string> instructions{program.signature.instruction};
    if (config.num_instructions > 0) {
        ProposerInputs inputs;
        inputs.dataset_summary =
            summarize_dataset(meta_backend, trainset, derive_seed(seed, "summary"), meta_params);
        inputs.program_summary = describe_program(program);
        inputs.custom_tip = config.custom_tip;
        inputs.custom_constraint = config.custom_constraint;
        if (config.mode == ProposerMode::Custom) {
            const std::vector<Example>& grounding_demos =
                demo_sets.empty() ? program.demos : demo_sets.front();
            log.constraints = get_constraints_from_demos(meta_backend, grounding_demos,
                                                         inputs.program_summary, meta_params);
            inputs.constraints = log.constraints;
        } else if (!demo_sets.empty()) {
            inputs.bootstrapped_demos = demo_sets.front();
        }
        log.proposed_instructions =
            propose_instructions(meta_backend, inputs, config.num_instructions,
                                 config.proposer_temperature, meta_params.model);
        if (log.proposed_instructions.empty())
            fail(Errc::ProposalFailure, "no instruction proposals survived");
        for (const auto& proposal : log.proposed_instructions) instructions.push_back(proposal);
    }

    // (3) candidate space: instructions x demo options (0 keeps the program's
    // own demos)
    std::vector<std::vector<Example>> demo_options{program.demos};
    for (auto& demo_set : demo_sets) demo_options.push_back(std::move(demo_set));
    const size_t candidate_count = instructions.size() * demo_options.size();

    auto origin_of = [&](size_t candidate) {
        CandidateOrigin origin;
        origin.instruction_index = static_cast<int>(candidate / demo_options.size());
        origin.demo_set_index = static_cast<int>(candidate % demo_options.size());
        origin.demo_seed =
            origin.demo_set_index == 0
                ? 0
                : derive_seed(seed, "demos", static_cast<uint64_t>(origin.demo_set_index - 1));
        return origin;
    };
    auto module_of = [&](size_t candidate) {
        const CandidateOrigin origin = origin_of(candidate);
        return program_with(program, instructions[static_cast<size_t>(origin.instruction_index)],
                            demo_options[static_cast<size_t>(origin.demo_set_index)]);
    };

    // (4) minibatch trials with UCB selection; unvisited candidates first in
    // seeded order.
    std::unique_ptr<SelectionStrategy> default_selection;
    if (!selection) {
        default_selection = make_ucb_selection();
        selection = default_selection.get();
    }
    std::vector<size_t> visit_order(candidate_count);
    for (size_t i = 0; i < candidate_count; ++i) visit_order[i] = i;
    {
        Rng order_rng(derive_seed(seed, "visit_order"));
        order_rng.shuffle(visit_order);
    }

    std::vector<CandidateStats> stats(candidate_count);
    std::vector<double> total_minibatch(candidate_count, 0.0);
    std::map<size_t, double> full_scores;

    auto ensure_full_eval = [&](size_t candidate, int trial_index) {
        auto it = full_scores.find(candidate);
        if (it != full_scores.end()) return it->second;
        const double score = full_eval_score(module_of(candidate), valset, metric,
                                             student_backend, config.parallelism,
                                             log.blocked_events);
        full_scores.emplace(candidate, score);
        log.full_evaluations.push_back({trial_index, static_cast<int>(candidate), score});
        return score;
    };

    // Baseline goes on the books before the search starts; the
    // improvement-or-revert contract compares against it.
    ensure_full_eval(0, -1);

    for (int t = 0; t < config.trials; ++t) {
        size_t candidate = candidate_count;  // sentinel
        for (size_t index : visit_order) {
            if (stats[index].visits == 0) {
                candidate = index;
                break;
            }
        }
        if (candidate == candidate_count) candidate = selection->select(stats, t);

        Rng batch_rng(derive_seed(seed, "minibatch", static_cast<uint64_t>(t)));
        std::vector<size_t> picks =
            batch_rng.sample_indices(valset.size(), static_cast<size_t>(config.minibatch_size));
        std::sort(picks.begin(), picks.end());
        std::vector<Example> minibatch;
        std::vector<int> ids;
        for (size_t pick : picks) {
            minibatch.push_back(valset[pick]);
            ids.push_back(static_cast<int>(pick));
        }

        EvalResult result = evaluate(module_of(candidate), minibatch, metric,
                                     EvalConfig{config.parallelism, 1, 0}, student_backend);
        log.blocked_events += result.blocked_events;
        // Blocked or unparseable examples score 0 inside the minibatch.
        double total = 0.0;
        for (const auto& record : result.runs) total += record.not_answered ? 0.0 : record.score;
        const double minibatch_score = total / static_cast<double>(config.minibatch_size);

        stats[candidate].visits += 1;
        total_minibatch[candidate] += minibatch_score;
        stats[candidate].mean_score =
            total_minibatch[candidate] / static_cast<double>(stats[candidate].visits);

        Trial trial;
        trial.trial_index = t;
        trial.origin = origin_of(candidate);
        trial.minibatch_ids = std::move(ids);
        trial.minibatch_score = minibatch_score;

        if ((t + 1) % config.full_eval_every == 0 || t == config.trials - 1) {
            size_t best_by_mean = 0;
            double best_mean = -1.0;
            for (size_t i = 0; i < candidate_count; ++i) {
                if (stats[i].visits == 0) continue;
                if (stats[i].mean_score > best_mean + 1e-15) {
                    best_mean = stats[i].mean_score;
                    best_by_mean = i;
                }
            }
            const double score = ensure_full_eval(best_by_mean, t);
            if (best_by_mean == candidate) trial.full_score = score;
        }
        log.trials.push_back(std::move(trial));
    }

    // (5) best full score wins; anything not strictly above the baseline
    // reverts to the baseline program.
    const double baseline_score = full_scores.at(0);
    size_t winner = 0;
    double winner_score = baseline_score;
    for (const auto& [candidate, score] : full_scores) {
        if (candidate == 0) continue;
        if (score > winner_score + 1e-15) {
            winner_score = score;
            winner = candidate;
        }
    }

    TrialSummary summary{log.optimizer, seed, winner_score, baseline_score};
    return OptimizeOutcome{OptimizedArtifact::from_module(module_of(winner), summary),
                           std::move(log)};
}

OptimizeOutcome infer_rules(const ProgramModule& program, const std::vector<Example>& trainset,
                            const std::vector<Example>& valset, const Metric& metric,
                            const InferRulesConfig& config, uint64_t seed, Backend& meta_backend,
                            Backend& student_backend) {
    if (config.max_bootstrapped < 1) fail(Errc::InvalidArgument, "max_bootstrapped must be >= 1");
    if (config.num_rule_sets < 1) fail(Errc::InvalidArgument, "num_rule_sets must be >= 1");
    const double threshold = config.threshold.value_or(metric.default_threshold());

    TrialLog log;
    log.optimizer = "infer-rules";
    log.seed = seed;

    DemoSet demo_set =
        bootstrap_demos(program, program, trainset, metric, config.max_bootstrapped, 0, threshold,
                        derive_seed(seed, "bootstrap"), student_backend);
    log.blocked_events += demo_set.blocked_events;

    GenParams meta_params;
    meta_params.model = program.params.model;
    meta_params.temperature = 0.5;
    meta_params.max_tokens = 1024;

    std::vector<std::string> instructions{program.signature.instruction};
    const std::string demos_text = render_demos_text(demo_set.demos);
    for (int r = 0; r < config.num_rule_sets; ++r) {
        std::string rules = meta_call(meta_backend, rules_signature(),
                                      {{"demos", demos_text}}, meta_params, "rules");
        if (rules.empty())
            rules = meta_call(meta_backend, rules_signature(), {{"demos", demos_text}},
                              meta_params, "rules");
        if (rules.empty()) fail(Errc::EmptyProposal, "rule induction returned nothing");
        log.proposed_instructions.push_back(rules);
        instructions.push_back(program.signature.instruction + "\n\nRules:\n" + rules);
    }

    double baseline_score = 0.0;
    size_t best_index = 0;
    double best_score = -1.0;
    for (size_t i = 0; i < instructions.size(); ++i) {
        const ProgramModule candidate = program_with(program, instructions[i], program.demos);
        const double score = full_eval_score(candidate, valset, metric, student_backend,
                                             config.parallelism, log.blocked_events);
        if (i == 0) baseline_score = score;
        log.full_evaluations.push_back({static_cast<int>(i), static_cast<int>(i), score});
        Trial trial;
        trial.trial_index = static_cast<int>(i);
        trial.origin = {static_cast<int>(i), 0, 0};
        trial.minibatch_score = score;
        trial.full_score = score;
        log.trials.push_back(std::move(trial));
        if (score > best_score + 1e-15) {
            best_score = score;
            best_index = i;
        }
    }

    const bool improved = best_index != 0 && best_score > baseline_score + 1e-15;
    const size_t winner = improved ? best_index : 0;
    TrialSummary summary{"infer-rules", seed, improved ? best_score : baseline_score,
                         baseline_score};
    const ProgramModule winner_module = program_with(program, instructions[winner], program.demos);
    return OptimizeOutcome{OptimizedArtifact::from_module(winner_module, summary),
                           std::move(log)};
}

const std::vector<std::string>& optimizer_names() {
    static const std::vector<std::string> names = {
        "labeled-fewshot", "bootstrap-fewshot", "random-search",
        "mipro",           "custom-mipro",      "infer-rules",
    };
    return names;
}

}  // namespace promptforge
