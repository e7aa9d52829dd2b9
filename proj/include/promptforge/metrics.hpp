#pragma once

#include <optional>
#include <string>
#include <vector>

#include "promptforge/backend.hpp"
#include "promptforge/sigcore.hpp"

namespace promptforge {

enum class Outcome { TruePositive, FalsePositive, TrueNegative, FalseNegative, NotAnswered };

const char* outcome_name(Outcome outcome);

// Confusion counts plus the four derived ratios. A ratio is absent (not 0)
// when its denominator is 0. Accuracy is computed over answered examples
// only; blocked and unparseable predictions sit in not_answered.
struct EvaluationReport {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;
    long not_answered = 0;
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;

    bool operator==(const EvaluationReport&) const = default;
};

// 1.0 iff the parsed value equals the ground truth: booleans by value, text
// by trimmed case-insensitive equality, literals exactly, floats within 1e-9.
// Unparseable predictions score 0.0.
double exact_match(const Example& example, const Prediction& prediction,
                   const std::string& field);

// tp/fp/tn/fn against the boolean positive class; content-filtered or
// unparseable predictions map to NotAnswered.
Outcome confusion_outcome(const Example& example, const Prediction& prediction,
                          const std::string& positive_field);

EvaluationReport aggregate_report(const std::vector<Outcome>& cells);

// One judging persona: a criterion prompt, its weight, and whether it is the
// executability gate that zeroes the whole score on failure.
struct JudgeCriterion {
    std::string name;
    std::string prompt_instruction;
    double weight = 0.0;
    bool is_validity = false;
};

enum class JudgeMode { Offline, Online };

struct JudgePanel {
    std::vector<JudgeCriterion> criteria;
    JudgeMode mode = JudgeMode::Online;

    void validate() const;  // weights sum to 1 within 1e-9, at most one validity criterion
};

// Built-in criteria with uniform weights. Offline panels include the
// reference-based correctness criterion; online panels drop it.
JudgePanel default_judge_panel(JudgeMode mode);

struct ScoreSchema {
    double score = 0.0;
    std::string explanation;
};

// The weighted combination: sum(score_i * weight_i) clamped to [0, 1], except
// a validity score of 0.0 forces the result to 0.0.
double weighted_final_score(const std::vector<double>& scores, const JudgePanel& panel);

struct JudgeVerdict {
    std::vector<std::pair<std::string, ScoreSchema>> per_criterion;  // panel order
    double final_score = 0.0;
};

// Scores one generated answer against every criterion. Non-validity criteria
// are judged by separate LM calls; the validity criterion runs the external
// hook command when one is configured (generated text on stdin, exit 0 means
// valid). Judge parse failures and backend errors score 0.0 and are recorded
// in the explanation rather than thrown.
JudgeVerdict run_judge_panel(const std::string& question, const std::string& generated,
                             const std::optional<std::string>& reference,
                             const JudgePanel& panel, Backend& judge_backend,
                             const GenParams& params,
                             const std::optional<std::string>& validity_hook = std::nullopt,
                             double hook_timeout_seconds = 5.0,
                             const AdapterConfig& adapter = {});

// The judge prompts that run_judge_panel would send, for auditing (e.g. that
// online panels never see the reference).
std::vector<ChatMessages> assemble_judge_prompts(const std::string& question,
                                                 const std::string& generated,
                                                 const std::optional<std::string>& reference,
                                                 const JudgePanel& panel,
                                                 const AdapterConfig& adapter = {});

// True (failure detected) iff score is strictly below the threshold.
bool threshold_label(double score, double threshold = 0.6);

// Runs `command` through the shell with `input` on stdin. Returns the exit
// status, or nullopt on timeout.
std::optional<int> run_hook_command(const std::string& command, const std::string& input,
                                    double timeout_seconds);

}  // namespace promptforge
