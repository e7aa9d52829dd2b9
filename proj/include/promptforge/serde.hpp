#pragma once

#include <nlohmann/json.hpp>

#include "promptforge/artifact.hpp"
#include "promptforge/evaluate.hpp"
#include "promptforge/metrics.hpp"
#include "promptforge/optimize.hpp"

// JSON (de)serialization for the public file formats: signatures, artifacts,
// trial logs, reports, judge panels. Object keys are emitted sorted, which
// together with fixed float handling makes every dump canonical.

namespace promptforge {

nlohmann::json signature_to_json(const Signature& sig);
Signature signature_from_json(const nlohmann::json& value);

nlohmann::json example_to_json(const Example& example);
Example example_from_json(const nlohmann::json& value);

nlohmann::json gen_params_to_json(const GenParams& params);
GenParams gen_params_from_json(const nlohmann::json& value);

nlohmann::json artifact_to_json(const OptimizedArtifact& artifact);
OptimizedArtifact artifact_from_json(const nlohmann::json& value);

nlohmann::json trial_log_to_json(const TrialLog& log);
TrialLog trial_log_from_json(const nlohmann::json& value);

nlohmann::json report_to_json(const EvaluationReport& report);

JudgePanel judge_panel_from_json(const nlohmann::json& value);

// dump(2) with a trailing newline; the canonical on-disk form.
std::string canonical_dump(const nlohmann::json& value);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const nlohmann::json& value, const std::string& path);

}  // namespace promptforge
