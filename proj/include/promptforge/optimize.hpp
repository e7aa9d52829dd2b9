#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "promptforge/artifact.hpp"
#include "promptforge/evaluate.hpp"
#include "promptforge/predictors.hpp"

namespace promptforge {

// Where a candidate came from: which proposed instruction (0 = baseline) and
// which demo set (0 = the program's own demos), plus the seed its demos were
// bootstrapped with.
struct CandidateOrigin {
    int instruction_index = 0;
    int demo_set_index = 0;
    uint64_t demo_seed = 0;
    bool operator==(const CandidateOrigin&) const = default;
};

// An (instruction, demo set) configuration under search.
struct CandidateProgram {
    std::string instruction;
    std::vector<Example> demos;
    CandidateOrigin origin;
    std::optional<double> score;
};

struct Trial {
    int trial_index = 0;
    CandidateOrigin origin;
    std::vector<int> minibatch_ids;
    double minibatch_score = 0.0;
    std::optional<double> full_score;
    std::string note;  // non-empty when the candidate was skipped
};

struct FullEvaluation {
    int trial_index = -1;  // -1 = before the trial loop (baseline)
    int candidate_index = 0;
    double score = 0.0;
};

// Audit record of one optimization run.
struct TrialLog {
    std::string optimizer;
    uint64_t seed = 0;
    std::vector<Trial> trials;
    std::vector<std::string> proposed_instructions;
    std::vector<FullEvaluation> full_evaluations;
    std::string constraints;  // custom proposer stage-1 output, when used
    long blocked_events = 0;
};

struct OptimizeOutcome {
    OptimizedArtifact artifact;
    TrialLog log;
};

// --- demo construction -------------------------------------------------------

// Uniformly samples k output-complete training examples (seeded) as demos;
// the instruction is untouched. k = 0 returns the program unchanged.
CandidateProgram labeled_fewshot(const ProgramModule& program,
                                 const std::vector<Example>& trainset, int k, uint64_t seed);

struct DemoSet {
    std::vector<Example> demos;
    long blocked_events = 0;
    std::vector<size_t> bootstrapped_from;  // trainset indices the kept traces came from
};

// Walks a seeded shuffle of the trainset, runs the teacher, and keeps a demo
// built from each trace (inputs + parsed outputs, reasoning included) whose
// metric score reaches the threshold; stops at max_bootstrapped. Up to
// max_labeled raw labeled examples not already selected are appended.
// Content-filtered examples are skipped and counted in blocked_events.
DemoSet bootstrap_demos(const ProgramModule& program, const ProgramModule& teacher,
                        const std::vector<Example>& trainset, const Metric& metric,
                        int max_bootstrapped, int max_labeled, double threshold, uint64_t seed,
                        Backend& backend);

// --- instruction proposal ----------------------------------------------------

struct ProposerInputs {
    std::string dataset_summary;
    std::string program_summary;
    std::vector<Example> bootstrapped_demos;
    std::optional<std::string> custom_tip;
    std::optional<std::string> custom_constraint;
    // Stage-1 output; when set it replaces the demos as grounding material.
    std::optional<std::string> constraints;
};

// The six built-in generation tips, cycled deterministically across proposals.
const std::vector<std::string>& proposal_tips();

// Summarizes up to 10 seeded-sampled training examples through one meta-LM
// call.
std::string summarize_dataset(Backend& meta_backend, const std::vector<Example>& trainset,
                              uint64_t seed, const GenParams& params);

// Deterministic textual description of a program (signature, fields, module
// kind) used as proposer grounding.
std::string describe_program(const ProgramModule& program);

// Builds one meta-prompt per proposal (tip i = tips[i mod 6]) and returns
// `count` non-empty instructions. A duplicate proposal is retried once and
// then kept; an empty proposal is retried once and then fails.
std::vector<std::string> propose_instructions(Backend& meta_backend, const ProposerInputs& inputs,
                                              int count, double temperature,
                                              const std::string& model);

// Stage 1 of the two-stage proposer: one meta-LM call that extracts the
// constraints and edge cases implied by the demos and the program text.
std::string get_constraints_from_demos(Backend& meta_backend, const std::vector<Example>& demos,
                                       const std::string& program_source,
                                       const GenParams& params);

// --- selection strategy --------------------------------------------------------

struct CandidateStats {
    int visits = 0;
    double mean_score = 0.0;
};

// Pluggable trial-time candidate selection. The default is UCB1 over running
// mean minibatch scores; unvisited candidates are served first in seeded
// order.
class SelectionStrategy {
  public:
    virtual ~SelectionStrategy() = default;
    virtual size_t select(const std::vector<CandidateStats>& stats, int trial_index) = 0;
};

std::unique_ptr<SelectionStrategy> make_ucb_selection(double exploration = 1.41421356237309515);

// --- optimizers ----------------------------------------------------------------

// Shared improvement-or-revert contract: every optimizer returns the input
// program unchanged unless some candidate's full-validation score strictly
// exceeds the baseline's.

struct RandomSearchConfig {
    int num_candidates = 8;
    int max_bootstrapped = 4;
    int max_labeled = 4;
    std::optional<double> threshold;  // default: metric.default_threshold()
    int parallelism = 1;
};

// Evaluates a fixed slate on the full valset: the unmodified program,
// labeled-only demos, one full bootstrap, then num_candidates seeded variants
// whose bootstrapped demo count is drawn uniformly from [1, max_bootstrapped]
// over a fresh shuffle. Highest score wins; ties keep the earliest candidate.
OptimizeOutcome random_search(const ProgramModule& program, const std::vector<Example>& trainset,
                              const std::vector<Example>& valset, const Metric& metric,
                              const RandomSearchConfig& config, uint64_t seed, Backend& backend);

// Attaches labeled demos (k = num_demos) and keeps them only on improvement.
OptimizeOutcome labeled_fewshot_optimize(const ProgramModule& program,
                                         const std::vector<Example>& trainset,
                                         const std::vector<Example>& valset, const Metric& metric,
                                         int num_demos, uint64_t seed, Backend& backend);

struct BootstrapConfig {
    int max_bootstrapped = 4;
    int max_labeled = 4;
    std::optional<double> threshold;
};

// One bootstrap pass, kept only on improvement.
OptimizeOutcome bootstrap_fewshot(const ProgramModule& program,
                                  const std::vector<Example>& trainset,
                                  const std::vector<Example>& valset, const Metric& metric,
                                  const BootstrapConfig& config, uint64_t seed, Backend& backend);

enum class ProposerMode { Standard, Custom };

struct MiproConfig {
    int num_instructions = 12;
    int num_demo_sets = 0;
    int max_bootstrapped = 0;
    int max_labeled = 0;
    int trials = 15;
    int minibatch_size = 15;
    ProposerMode mode = ProposerMode::Standard;
    std::optional<std::string> custom_tip;
    std::optional<std::string> custom_constraint;
    double proposer_temperature = 0.5;
    std::optional<double> threshold;
    int full_eval_every = 5;
    int parallelism = 1;
};

// Joint instruction/demo search. Bootstraps num_demo_sets demo sets, proposes
// num_instructions instructions (standard mode grounds each proposal on
// demos; custom mode extracts constraints first and grounds on those plus the
// user tip/constraint), then runs minibatch trials with UCB selection over
// the (instructions+baseline) x (demo sets+empty) candidate space, fully
// evaluating the best-by-mean candidate every full_eval_every trials and at
// the end. Zero-shot runs (no demos anywhere) require num_demo_sets,
// max_bootstrapped and max_labeled all zero.
OptimizeOutcome mipro_optimize(const ProgramModule& program, const std::vector<Example>& trainset,
                               const std::vector<Example>& valset, const Metric& metric,
                               const MiproConfig& config, uint64_t seed, Backend& meta_backend,
                               Backend& student_backend,
                               SelectionStrategy* selection = nullptr);

struct InferRulesConfig {
    int max_bootstrapped = 4;
    int num_rule_sets = 3;
    std::optional<double> threshold;
    int parallelism = 1;
};

// Bootstraps successful demos, induces num_rule_sets rule lists from them by
// meta-LM call, and appends each to the baseline instruction as a candidate.
OptimizeOutcome infer_rules(const ProgramModule& program, const std::vector<Example>& trainset,
                            const std::vector<Example>& valset, const Metric& metric,
                            const InferRulesConfig& config, uint64_t seed, Backend& meta_backend,
                            Backend& student_backend);

// Names accepted by the CLI, one per optimizer.
const std::vector<std::string>& optimizer_names();

}  // namespace promptforge
