#include "promptforge/evaluate.hpp"

#include <algorithm>
#include <ostream>

#include <nlohmann/json.hpp>

#include "promptforge/errors.hpp"

namespace promptforge {

Metric exact_match_metric(const std::string& field) {
    Metric metric;
    metric.name = "exact_match";
    metric.field = field;
    metric.positive_field = field;
    metric.binary = true;
    metric.fn = [field](const Example& example, const Prediction& prediction) {
        return exact_match(example, prediction, field);
    };
    return metric;
}

Metric recall_metric(const std::string& field) {
    Metric metric;
    metric.name = "recall";
    metric.field = field;
    metric.positive_field = field;
    metric.binary = true;
    metric.fn = [field](const Example& example, const Prediction& prediction) {
        Outcome cell = confusion_outcome(example, prediction, field);
        switch (cell) {
            case Outcome::TruePositive: return 1.0;
            case Outcome::FalseNegative: return 0.0;
            case Outcome::NotAnswered: return 0.0;
            default: return 1.0;  // negatives never penalize recall
        }
    };
    return metric;
}

namespace {

struct ItemResult {
    EvalRecord record;
    bool threw = false;
};

// One (example, repeat) work item. Exceptions are captured, not thrown:
// inside a parallel region they must not escape.
ItemResult run_item(const ProgramModule& program, const std::vector<Example>& dataset,
                    const Metric& metric, int example_index, int repeat, Backend& backend) {
    ItemResult item;
    EvalRecord& record = item.record;
    record.example_index = example_index;
    record.repeat = repeat;
    const Example& example = dataset[static_cast<size_t>(example_index)];

    std::map<std::string, std::string> inputs;
    for (const auto& key : example.input_keys) inputs.emplace(key, example.get(key));

    try {
        ForwardResult result = forward(program, inputs, backend);
        record.prediction = result.prediction;
        record.raw_text = result.prediction.raw_text;
        record.content_filtered = result.trace.not_answered;
        record.not_answered = result.trace.not_answered || !result.prediction.parse_ok;
        record.score = metric.fn(example, result.prediction);
        if (!metric.positive_field.empty()) {
            record.outcome = confusion_outcome(example, result.prediction, metric.positive_field);
        } else if (record.not_answered) {
            record.outcome = Outcome::NotAnswered;
        }
    } catch (const Error& error) {
        if (error.code() != Errc::TransportError && error.code() != Errc::ProviderError) throw;
        item.threw = true;
        record.not_answered = true;
        record.errored = true;
        record.score = 0.0;
        record.outcome = Outcome::NotAnswered;
    }
    return item;
}

void validate_inputs(const ProgramModule& program, const std::vector<Example>& dataset,
                     const Metric& metric, const EvalConfig& config) {
    if (dataset.empty()) fail(Errc::EmptyDataset, "evaluate needs at least one example");
    if (config.repeats < 1) fail(Errc::InvalidArgument, "repeats must be >= 1");
    if (config.parallelism < 1) fail(Errc::InvalidArgument, "parallelism must be >= 1");
    if (!metric.fn) fail(Errc::InvalidArgument, "metric has no scoring function");
    if (!metric.field.empty()) {
        const FieldSpec* field = program.signature.find(metric.field);
        if (!field || field->kind != FieldKind::Output)
            fail(Errc::MetricSignatureMismatch,
                 "metric field '" + metric.field + "' is not an output of the signature");
    }
}

EvalResult assemble(std::vector<ItemResult>&& items, int repeats) {
    // Items arrive indexed by work id, which is already (example, repeat)
    // sorted; aggregation below is order-insensitive anyway.
    long errored = 0;
    EvalResult result;
    result.runs.reserve(items.size());
    for (auto& item : items) {
        if (item.threw) ++errored;
        result.runs.push_back(std::move(item.record));
    }
    if (errored * 2 > static_cast<long>(result.runs.size()))
        fail(Errc::BatchMisconfigured,
             std::to_string(errored) + " of " + std::to_string(result.runs.size()) +
                 " work items errored");

    std::vector<Outcome> cells;
    double total = 0.0;
    long answered = 0;
    std::vector<double> repeat_total(static_cast<size_t>(repeats), 0.0);
    std::vector<long> repeat_answered(static_cast<size_t>(repeats), 0);
    for (const auto& record : result.runs) {
        if (record.outcome) cells.push_back(*record.outcome);
        if (record.content_filtered) ++result.blocked_events;
        if (record.not_answered) continue;
        total += record.score;
        ++answered;
        repeat_total[static_cast<size_t>(record.repeat)] += record.score;
        ++repeat_answered[static_cast<size_t>(record.repeat)];
    }
    result.report = aggregate_report(cells);
    result.mean_score = answered > 0 ? total / static_cast<double>(answered) : 0.0;
    for (int r = 0; r < repeats; ++r)
        result.per_repeat_mean.push_back(
            repeat_answered[static_cast<size_t>(r)] > 0
                ? repeat_total[static_cast<size_t>(r)] /
                      static_cast<double>(repeat_answered[static_cast<size_t>(r)])
                : 0.0);
    return result;
}

}  // namespace

EvalResult evaluate_serial(const ProgramModule& program, const std::vector<Example>& dataset,
                           const Metric& metric, const EvalConfig& config, Backend& backend) {
    validate_inputs(program, dataset, metric, config);
    const int n = static_cast<int>(dataset.size());
    std::vector<ItemResult> items(static_cast<size_t>(n) * static_cast<size_t>(config.repeats));
    for (int repeat = 0; repeat < config.repeats; ++repeat)
        for (int index = 0; index < n; ++index)
            items[static_cast<size_t>(repeat) * static_cast<size_t>(n) +
                  static_cast<size_t>(index)] =
                run_item(program, dataset, metric, index, repeat, backend);

    // Reorder to (example, repeat) so serial and parallel runs agree byte-for-byte.
    std::stable_sort(items.begin(), items.end(), [](const ItemResult& a, const ItemResult& b) {
        if (a.record.example_index != b.record.example_index)
            return a.record.example_index < b.record.example_index;
        return a.record.repeat < b.record.repeat;
    });
    return assemble(std::move(items), config.repeats);
}

EvalResult evaluate(const ProgramModule& program, const std::vector<Example>& dataset,
                    const Metric& metric, const EvalConfig& config, Backend& backend) {
    validate_inputs(program, dataset, metric, config);
    if (config.parallelism == 1) return evaluate_serial(program, dataset, metric, config, backend);

    const int n = static_cast<int>(dataset.size());
    const int total = n * config.repeats;
    std::vector<ItemResult> items(static_cast<size_t>(total));

    // Exceptions other than per-item transport failures must not escape the
    // parallel region; stash the first one and rethrow after the join.
    std::exception_ptr first_failure;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(config.parallelism)
#endif
    for (int work = 0; work < total; ++work) {
        try {
            const int repeat = work / n;
            const int index = work % n;
            items[static_cast<size_t>(work)] =
                run_item(program, dataset, metric, index, repeat, backend);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(promptforge_eval_failure)
#endif
            {
                if (!first_failure) first_failure = std::current_exception();
            }
        }
    }
    if (first_failure) std::rethrow_exception(first_failure);

    std::stable_sort(items.begin(), items.end(), [](const ItemResult& a, const ItemResult& b) {
        if (a.record.example_index != b.record.example_index)
            return a.record.example_index < b.record.example_index;
        return a.record.repeat < b.record.repeat;
    });
    return assemble(std::move(items), config.repeats);
}

void write_records_jsonl(const EvalResult& result, std::ostream& out) {
    for (const auto& record : result.runs) {
        nlohmann::json line;
        line["example_id"] = record.example_index;
        line["repeat"] = record.repeat;
        line["score"] = record.score;
        line["outcome"] = record.outcome ? outcome_name(*record.outcome) : "none";
        line["raw_text"] = record.raw_text;
        out << line.dump() << "\n";
    }
}

}  // namespace promptforge
