#include "promptforge/serde.hpp"

#include <fstream>

#include "promptforge/errors.hpp"

namespace promptforge {

using nlohmann::json;

namespace {

FieldKind field_kind_from_name(const std::string& name) {
    if (name == "input") return FieldKind::Input;
    if (name == "output") return FieldKind::Output;
    fail(Errc::InvalidArgument, "unknown field kind '" + name + "'");
}

ValueKind value_kind_from_name(const std::string& name) {
    if (name == "text") return ValueKind::Text;
    if (name == "boolean") return ValueKind::Boolean;
    if (name == "float") return ValueKind::Float;
    if (name == "literal") return ValueKind::Literal;
    fail(Errc::InvalidArgument, "unknown value type '" + name + "'");
}

}  // namespace

json signature_to_json(const Signature& sig) {
    json fields = json::array();
    for (const auto& field : sig.fields) {
        json entry;
        entry["name"] = field.name;
        entry["description"] = field.description;
        entry["kind"] = field.kind == FieldKind::Input ? "input" : "output";
        entry["type"] = value_kind_name(field.type);
        if (field.type == ValueKind::Literal) entry["choices"] = field.choices;
        fields.push_back(std::move(entry));
    }
    return json{{"name", sig.name}, {"instruction", sig.instruction}, {"fields", fields}};
}

Signature signature_from_json(const json& value) {
    std::vector<FieldSpec> fields;
    for (const auto& entry : value.at("fields")) {
        FieldSpec field;
        field.name = entry.at("name").get<std::string>();
        field.description = entry.value("description", "");
        field.kind = field_kind_from_name(entry.at("kind").get<std::string>());
        field.type = value_kind_from_name(entry.at("type").get<std::string>());
        if (field.type == ValueKind::Literal)
            field.choices = entry.at("choices").get<std::vector<std::string>>();
        fields.push_back(std::move(field));
    }
    return define_signature(value.at("name").get<std::string>(),
                            value.at("instruction").get<std::string>(), std::move(fields));
}

json example_to_json(const Example& example) {
    json values = json::object();
    for (const auto& [key, val] : example.values) values[key] = val;
    json keys = json::array();
    for (const auto& key : example.input_keys) keys.push_back(key);
    return json{{"values", values}, {"input_keys", keys}};
}

Example example_from_json(const json& value) {
    Example example;
    for (const auto& [key, val] : value.at("values").items())
        example.values[key] = val.get<std::string>();
    for (const auto& key : value.at("input_keys"))
        example.input_keys.insert(key.get<std::string>());
    return example;
}

json gen_params_to_json(const GenParams& params) {
    json out{{"model", params.model},
             {"temperature", params.temperature},
             {"max_tokens", params.max_tokens},
             {"n", params.n}};
    if (params.seed) out["seed"] = *params.seed;
    return out;
}

GenParams gen_params_from_json(const json& value) {
    GenParams params;
    params.model = value.at("model").get<std::string>();
    params.temperature = value.value("temperature", 0.0);
    params.max_tokens = value.value("max_tokens", 1024);
    params.n = value.value("n", 1);
    if (value.contains("seed") && !value["seed"].is_null())
        params.seed = value["seed"].get<long>();
    return params;
}

json artifact_to_json(const OptimizedArtifact& artifact) {
    json module{{"kind", module_kind_name(artifact.module_kind)}};
    if (artifact.vote_n) module["vote_n"] = *artifact.vote_n;
    if (artifact.vote_field) module["vote_field"] = *artifact.vote_field;

    json demos = json::array();
    for (const auto& demo : artifact.demos) demos.push_back(example_to_json(demo));

    return json{{"version", artifact.version},
                {"signature", signature_to_json(artifact.signature)},
                {"demos", demos},
                {"module", module},
                {"gen_params", gen_params_to_json(artifact.gen_params)},
                {"trial_summary",
                 {{"optimizer", artifact.trial_summary.optimizer},
                  {"seed", artifact.trial_summary.seed},
                  {"best_full_score", artifact.trial_summary.best_full_score},
                  {"baseline_full_score", artifact.trial_summary.baseline_full_score}}}};
}

OptimizedArtifact artifact_from_json(const json& value) {
    OptimizedArtifact artifact;
    artifact.version = value.at("version").get<int>();
    if (artifact.version != kArtifactSchemaVersion)
        fail(Errc::SchemaVersionMismatch, "artifact version " + std::to_string(artifact.version) +
                                              ", expected " +
                                              std::to_string(kArtifactSchemaVersion));
    artifact.signature = signature_from_json(value.at("signature"));
    for (const auto& demo : value.at("demos")) artifact.demos.push_back(example_from_json(demo));
    const auto& module = value.at("module");
    artifact.module_kind = module_kind_from_name(module.at("kind").get<std::string>());
    if (module.contains("vote_n")) artifact.vote_n = module["vote_n"].get<int>();
    if (module.contains("vote_field")) artifact.vote_field = module["vote_field"].get<std::string>();
    artifact.gen_params = gen_params_from_json(value.at("gen_params"));
    const auto& summary = value.at("trial_summary");
    artifact.trial_summary.optimizer = summary.value("optimizer", "");
    artifact.trial_summary.seed = summary.value("seed", 0UL);
    artifact.trial_summary.best_full_score = summary.value("best_full_score", 0.0);
    artifact.trial_summary.baseline_full_score = summary.value("baseline_full_score", 0.0);
    return artifact;
}

json trial_log_to_json(const TrialLog& log) {
    json trials = json::array();
    for (const auto& trial : log.trials) {
        json entry{{"trial_index", trial.trial_index},
                   {"origin",
                    {{"instruction_index", trial.origin.instruction_index},
                     {"demo_set_index", trial.origin.demo_set_index},
                     {"demo_seed", trial.origin.demo_seed}}},
                   {"minibatch_ids", trial.minibatch_ids},
                   {"minibatch_score", trial.minibatch_score}};
        if (trial.full_score) entry["full_score"] = *trial.full_score;
        if (!trial.note.empty()) entry["note"] = trial.note;
        trials.push_back(std::move(entry));
    }
    json fulls = json::array();
    for (const auto& full : log.full_evaluations)
        fulls.push_back(json{{"trial_index", full.trial_index},
                             {"candidate_index", full.candidate_index},
                             {"score", full.score}});
    json out{{"optimizer", log.optimizer},
             {"seed", log.seed},
             {"trials", trials},
             {"proposed_instructions", log.proposed_instructions},
             {"full_evaluations", fulls},
             {"blocked_events", log.blocked_events}};
    if (!log.constraints.empty()) out["constraints"] = log.constraints;
    return out;
}

TrialLog trial_log_from_json(const json& value) {
    TrialLog log;
    log.optimizer = value.value("optimizer", "");
    log.seed = value.value("seed", 0UL);
    log.blocked_events = value.value("blocked_events", 0L);
    log.constraints = value.value("constraints", "");
    if (value.contains("proposed_instructions"))
        log.proposed_instructions =
            value["proposed_instructions"].get<std::vector<std::string>>();
    for (const auto& entry : value.value("trials", json::array())) {
        Trial trial;
        trial.trial_index = entry.at("trial_index").get<int>();
        const auto& origin = entry.at("origin");
        trial.origin.instruction_index = origin.at("instruction_index").get<int>();
        trial.origin.demo_set_index = origin.at("demo_set_index").get<int>();
        trial.origin.demo_seed = origin.at("demo_seed").get<uint64_t>();
        trial.minibatch_ids = entry.at("minibatch_ids").get<std::vector<int>>();
        trial.minibatch_score = entry.at("minibatch_score").get<double>();
        if (entry.contains("full_score")) trial.full_score = entry["full_score"].get<double>();
        trial.note = entry.value("note", "");
        log.trials.push_back(std::move(trial));
    }
    for (const auto& entry : value.value("full_evaluations", json::array())) {
        FullEvaluation full;
        full.trial_index = entry.at("trial_index").get<int>();
        full.candidate_index = entry.at("candidate_index").get<int>();
        full.score = entry.at("score").get<double>();
        log.full_evaluations.push_back(full);
    }
    return log;
}

json report_to_json(const EvaluationReport& report) {
    auto ratio = [](const std::optional<double>& value) {
        return value ? json(*value) : json(nullptr);
    };
    return json{{"tp", report.tp},
                {"fp", report.fp},
                {"tn", report.tn},
                {"fn", report.fn},
                {"not_answered", report.not_answered},
                {"accuracy", ratio(report.accuracy)},
                {"precision", ratio(report.precision)},
                {"recall", ratio(report.recall)},
                {"f1", ratio(report.f1)}};
}

JudgePanel judge_panel_from_json(const json& value) {
    JudgePanel panel;
    const std::string mode = value.value("mode", "online");
    if (mode == "offline") panel.mode = JudgeMode::Offline;
    else if (mode == "online") panel.mode = JudgeMode::Online;
    else fail(Errc::InvalidArgument, "unknown judge mode '" + mode + "'");
    for (const auto& entry : value.at("criteria")) {
        JudgeCriterion criterion;
        criterion.name = entry.at("name").get<std::string>();
        criterion.prompt_instruction = entry.at("instruction").get<std::string>();
        criterion.weight = entry.at("weight").get<double>();
        criterion.is_validity = entry.value("is_validity", false);
        panel.criteria.push_back(std::move(criterion));
    }
    panel.validate();
    return panel;
}

std::string canonical_dump(const json& value) {
    return value.dump(2) + "\n";
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::FileNotFound, path);
    json value = json::parse(in, nullptr, false);
    if (value.is_discarded()) fail(Errc::ParseError, "invalid JSON in " + path);
    return value;
}

void save_json_file(const json& value, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(Errc::IoError, "cannot write " + path);
    out << canonical_dump(value);
    if (!out) fail(Errc::IoError, "write failed for " + path);
}

}  // namespace promptforge
