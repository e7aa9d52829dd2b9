#include "promptforge/metrics.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

#include "promptforge/errors.hpp"

namespace promptforge {

const char* outcome_name(Outcome outcome) {
    switch (outcome) {
        case Outcome::TruePositive: return "tp";
        case Outcome::FalsePositive: return "fp";
        case Outcome::TrueNegative: return "tn";
        case Outcome::FalseNegative: return "fn";
        case Outcome::NotAnswered: return "not_answered";
    }
    return "not_answered";
}

namespace {

std::string lowercase(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

std::optional<bool> parse_bool(const std::string& text) {
    const std::string low = lowercase(trim(text));
    if (low == "true") return true;
    if (low == "false") return false;
    return std::nullopt;
}

}  // namespace

double exact_match(const Example& example, const Prediction& prediction,
                   const std::string& field) {
    auto truth_it = example.values.find(field);
    if (truth_it == example.values.end())
        fail(Errc::MissingGroundTruth, "example has no ground truth for '" + field + "'");
    if (!prediction.parse_ok) return 0.0;
    const FieldValue* value = prediction.find(field);
    if (!value) return 0.0;

    const std::string& truth = truth_it->second;
    if (const auto* flag = std::get_if<bool>(value)) {
        auto truth_flag = parse_bool(truth);
        if (!truth_flag) fail(Errc::MissingGroundTruth, "ground truth for '" + field + "' is not boolean");
        return *flag == *truth_flag ? 1.0 : 0.0;
    }
    if (const auto* num = std::get_if<double>(value)) {
        try {
            return std::abs(*num - std::stod(trim(truth))) <= 1e-9 ? 1.0 : 0.0;
        } catch (const std::exception&) {
            fail(Errc::MissingGroundTruth, "ground truth for '" + field + "' is not numeric");
        }
    }
    if (const auto* literal = std::get_if<LiteralValue>(value))
        return literal->value == trim(truth) ? 1.0 : 0.0;
    return lowercase(trim(std::get<std::string>(*value))) == lowercase(trim(truth)) ? 1.0 : 0.0;
}

Outcome confusion_outcome(const Example& example, const Prediction& prediction,
                          const std::string& positive_field) {
    auto truth_it = example.values.find(positive_field);
    if (truth_it == example.values.end())
        fail(Errc::MissingGroundTruth, "example has no ground truth for '" + positive_field + "'");
    auto truth = parse_bool(truth_it->second);
    if (!truth)
        fail(Errc::MissingGroundTruth, "ground truth for '" + positive_field + "' is not boolean");

    if (!prediction.parse_ok) return Outcome::NotAnswered;
    const FieldValue* value = prediction.find(positive_field);
    const bool* predicted = value ? std::get_if<bool>(value) : nullptr;
    if (!predicted) return Outcome::NotAnswered;

    if (*truth) return *predicted ? Outcome::TruePositive : Outcome::FalseNegative;
    return *predicted ? Outcome::FalsePositive : Outcome::TrueNegative;
}

EvaluationReport aggregate_report(const std::vector<Outcome>& cells) {
    EvaluationReport report;
    for (Outcome cell : cells) {
        switch (cell) {
            case Outcome::TruePositive: ++report.tp; break;
            case Outcome::FalsePositive: ++report.fp; break;
            case Outcome::TrueNegative: ++report.tn; break;
            case Outcome::FalseNegative: ++report.fn; break;
            case Outcome::NotAnswered: ++report.not_answered; break;
        }
    }
    const long answered = report.tp + report.fp + report.tn + report.fn;
    if (answered > 0)
        report.accuracy = static_cast<double>(report.tp + report.tn) / static_cast<double>(answered);
    if (report.tp + report.fp > 0)
        report.precision = static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fp);
    if (report.tp + report.fn > 0)
        report.recall = static_cast<double>(report.tp) / static_cast<double>(report.tp + report.fn);
    if (report.precision && report.recall && *report.precision + *report.recall > 0)
        report.f1 = 2.0 * *report.precision * *report.recall / (*report.precision + *report.recall);
    return report;
}

void JudgePanel::validate() const {
    if (criteria.empty()) fail(Errc::InvalidArgument, "judge panel has no criteria");
    double total = 0.0;
    int validity_count = 0;
    for (const auto& criterion : criteria) {
        if (criterion.weight < 0.0 || criterion.weight > 1.0)
            fail(Errc::ScoreOutOfRange, "weight for '" + criterion.name + "' outside [0,1]");
        total += criterion.weight;
        if (criterion.is_validity) ++validity_count;
    }
    if (std::abs(total - 1.0) > 1e-9)
        fail(Errc::InvalidArgument, "criterion weights must sum to 1");
    if (validity_count > 1)
        fail(Errc::InvalidArgument, "at most one validity criterion allowed");
}

JudgePanel default_judge_panel(JudgeMode mode) {
    std::vector<JudgeCriterion> criteria;
    if (mode == JudgeMode::Offline)
        criteria.push_back({"correctness",
                            "Compare the generated code with the reference answer. Score 1.0 "
                            "when the generated code follows the logic of the reference and "
                            "solves the same problem, lower when it diverges.",
                            0.0, false});
    criteria.push_back({"validity",
                        "Judge whether the generated code would run in an interpreter without "
                        "syntax, runtime, or undefined reference errors. Score 1.0 if it runs, "
                        "0.0 otherwise.",
                        0.0, true});
    criteria.push_back({"efficiency",
                        "Judge whether the code solves the problem without being overly "
                        "complex or wasteful. Score between 0.0 and 1.0.",
                        0.0, false});
    criteria.push_back({"relevance",
                        "Judge whether the code meets the user's requirements and addresses "
                        "every part of the problem. Score between 0.0 and 1.0.",
                        0.0, false});
    criteria.push_back({"format",
                        "Judge whether the answer is code with appropriate comments, without "
                        "additional and unnecessary explanations. Score between 0.0 and 1.0.",
                        0.0, false});
    const double uniform = 1.0 / static_cast<double>(criteria.size());
    for (auto& criterion : criteria) criterion.weight = uniform;
    // Make the weights sum to exactly 1.0 regardless of division rounding.
    criteria.back().weight = 1.0;
    for (size_t i = 0; i + 1 < criteria.size(); ++i) criteria.back().weight -= criteria[i].weight;
    JudgePanel panel{std::move(criteria), mode};
    panel.validate();
    return panel;
}

double weighted_final_score(const std::vector<double>& scores, const JudgePanel& panel) {
    panel.validate();
    if (scores.size() != panel.criteria.size())
        fail(Errc::LengthMismatch, std::to_string(scores.size()) + " scores for " +
                                       std::to_string(panel.criteria.size()) + " criteria");
    for (double score : scores)
        if (!(score >= 0.0 && score <= 1.0))
            fail(Errc::ScoreOutOfRange, "score " + std::to_string(score));

    double total = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (panel.criteria[i].is_validity && scores[i] == 0.0) return 0.0;
        total += scores[i] * panel.criteria[i].weight;
    }
    return std::clamp(total, 0.0, 1.0);
}

bool threshold_label(double score, double threshold) {
    if (!(score >= 0.0 && score <= 1.0)) fail(Errc::OutOfRange, "score " + std::to_string(score));
    return score < threshold;
}

namespace {

Signature judge_signature(const JudgeCriterion& criterion, bool with_reference) {
    std::vector<FieldSpec> fields;
    fields.push_back(input_field("question", ValueKind::Text, "the user's request"));
    fields.push_back(input_field("generated_answer", ValueKind::Text, "the answer under review"));
    if (with_reference)
        fields.push_back(input_field("reference_answer", ValueKind::Text,
                                     "a known-good answer to compare against"));
    fields.push_back(output_field("score", ValueKind::Float, "Score between 0.0 and 1.0."));
    fields.push_back(output_field("explanation", ValueKind::Text,
                                  "A short explanation of the score, citing the answer."));
    return define_signature("judge_" + criterion.name, criterion.prompt_instruction,
                            std::move(fields));
}

}  // namespace

std::vector<ChatMessages> assemble_judge_prompts(const std::string& question,
                                                 const std::string& generated,
                                                 const std::optional<std::string>& reference,
                                                 const JudgePanel& panel,
                                                 const AdapterConfig& adapter) {
    panel.validate();
    const bool with_reference = panel.mode == JudgeMode::Offline;
    if (with_reference && !reference)
        fail(Errc::MissingInput, "offline judging requires a reference answer");

    std::vector<ChatMessages> prompts;
    for (const auto& criterion : panel.criteria) {
        std::map<std::string, std::string> inputs{{"question", question},
                                                  {"generated_answer", generated}};
        if (with_reference) inputs.emplace("reference_answer", *reference);
        prompts.push_back(
            render_prompt(judge_signature(criterion, with_reference), {}, inputs, adapter));
    }
    return prompts;
}

std::optional<int> run_hook_command(const std::string& command, const std::string& input,
                                    double timeout_seconds) {
    int stdin_pipe[2];
    if (pipe(stdin_pipe) != 0) fail(Errc::IoError, "pipe failed");

    pid_t pid = fork();
    if (pid < 0) fail(Errc::IoError, "fork failed");
    if (pid == 0) {
        dup2(stdin_pipe[0], STDIN_FILENO);
        close(stdin_pipe[0]);
        close(stdin_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), nullptr);
        _exit(127);
    }
    close(stdin_pipe[0]);
    // A hook that ignores stdin may close it early; ignore the resulting EPIPE.
    signal(SIGPIPE, SIG_IGN);
    size_t written = 0;
    while (written < input.size()) {
        ssize_t n = write(stdin_pipe[1], input.data() + written, input.size() - written);
        if (n <= 0) break;
        written += static_cast<size_t>(n);
    }
    close(stdin_pipe[1]);

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(timeout_seconds);
    for (;;) {
        int status = 0;
        pid_t done = waitpid(pid, &status, WNOHANG);
        if (done == pid) {
            if (WIFEXITED(status)) return WEXITSTATUS(status);
            return 128;  // killed by signal
        }
        if (std::chrono::steady_clock::now() >= deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, &status, 0);
            return std::nullopt;
        }
        usleep(2000);
    }
}

JudgeVerdict run_judge_panel(const std::string& question, const std::string& generated,
                             const std::optional<std::string>& reference,
                             const JudgePanel& panel, Backend& judge_backend,
                             const GenParams& params,
                             const std::optional<std::string>& validity_hook,
                             double hook_timeout_seconds, const AdapterConfig& adapter) {
    panel.validate();
    const bool with_reference = panel.mode == JudgeMode::Offline;
    if (with_reference && !reference)
        fail(Errc::MissingInput, "offline judging requires a reference answer");

    JudgeVerdict verdict;
    std::vector<double> scores;
    for (const auto& criterion : panel.criteria) {
        ScoreSchema entry;
        if (criterion.is_validity && validity_hook) {
            auto exit_status = run_hook_command(*validity_hook, generated, hook_timeout_seconds);
            if (!exit_status) {
                entry = {0.0, "hook timed out"};
            } else {
                entry = {*exit_status == 0 ? 1.0 : 0.0,
                         "hook exited " + std::to_string(*exit_status)};
            }
        } else {
            const Signature sig = judge_signature(criterion, with_reference);
            std::map<std::string, std::string> inputs{{"question", question},
                                                      {"generated_answer", generated}};
            if (with_reference) inputs.emplace("reference_answer", *reference);
            ChatMessages messages = render_prompt(sig, {}, inputs, adapter);
            CompletionResult result = judge_backend.complete(messages, params);
            if (!result.ok()) {
                entry = {0.0, std::string("backend error: ") + result.error().detail};
            } else {
                Prediction prediction = parse_completion(sig, result.texts().front(), adapter);
                const FieldValue* score = prediction.find("score");
                const double* parsed = score ? std::get_if<double>(score) : nullptr;
                if (!prediction.parse_ok || !parsed || *parsed < 0.0 || *parsed > 1.0) {
                    entry = {0.0, "judge parse failure"};
                } else {
                    entry.score = *parsed;
                    if (const FieldValue* text = prediction.find("explanation"))
                        entry.explanation = value_to_string(*text);
                }
            }
        }
        scores.push_back(entry.score);
        verdict.per_criterion.emplace_back(criterion.name, std::move(entry));
    }
    verdict.final_score = weighted_final_score(scores, panel);
    return verdict;
}

}  // namespace promptforge
