#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "promptforge/metrics.hpp"
#include "promptforge/predictors.hpp"

namespace promptforge {

// A per-example score in [0, 1]. `positive_field` names the boolean output
// used for confusion accounting; when empty no tp/fp/tn/fn cells are
// produced (only not_answered). `binary` marks {0,1}-valued metrics, which
// picks the default bootstrap success threshold.
struct Metric {
    std::string name;
    std::string field;
    std::string positive_field;
    bool binary = true;
    std::function<double(const Example&, const Prediction&)> fn;

    double default_threshold() const { return binary ? 1.0 : 0.6; }
};

// 1.0 iff the prediction matches the ground truth for `field`.
Metric exact_match_metric(const std::string& field);

// Recall-oriented per-example score: positives must be caught (1.0 iff
// predicted positive), negatives never penalize. Optimizing it trades
// precision for recall.
Metric recall_metric(const std::string& field);

struct EvalConfig {
    int parallelism = 1;
    int repeats = 1;
    uint64_t seed = 0;
};

struct EvalRecord {
    int example_index = 0;
    int repeat = 0;
    double score = 0.0;
    std::optional<Outcome> outcome;  // absent for answered non-classification tasks
    bool not_answered = false;       // content-filtered or unparseable
    bool content_filtered = false;   // the request itself was blocked
    bool errored = false;            // transport/provider failure after retries
    std::string raw_text;
    Prediction prediction;
};

struct EvalResult {
    EvaluationReport report;
    std::vector<EvalRecord> runs;  // sorted by (example_index, repeat)
    double mean_score = 0.0;       // over answered examples
    std::vector<double> per_repeat_mean;
    long blocked_events = 0;  // content-filter blocks only
};

// Runs `repeats` full passes of the program over the dataset and aggregates
// one report across all records. Work items run concurrently up to
// config.parallelism; aggregation is order-insensitive, so the result is
// deterministic for a deterministic backend regardless of scheduling.
// Individual transport failures become not_answered records; the batch only
// aborts (BatchMisconfigured) when more than half of all work items error.
EvalResult evaluate(const ProgramModule& program, const std::vector<Example>& dataset,
                    const Metric& metric, const EvalConfig& config, Backend& backend);

// Single-threaded reference implementation; evaluate() must match it
// record-for-record. Kept separate so tests and the benchmark can compare.
EvalResult evaluate_serial(const ProgramModule& program, const std::vector<Example>& dataset,
                           const Metric& metric, const EvalConfig& config, Backend& backend);

// One JSON object per record: {example_id, repeat, score, outcome, raw_text}.
void write_records_jsonl(const EvalResult& result, std::ostream& out);

}  // namespace promptforge
