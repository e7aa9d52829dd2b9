#pragma once

#include <map>
#include <optional>
#include <string>

#include "promptforge/predictors.hpp"

namespace promptforge {

inline constexpr int kArtifactSchemaVersion = 1;

struct TrialSummary {
    std::string optimizer;
    uint64_t seed = 0;
    double best_full_score = 0.0;
    double baseline_full_score = 0.0;
};

// The serialized winner of an optimization run. Loading reconstructs a
// ProgramModule whose rendered prompts are byte-identical to the pre-save
// program's.
struct OptimizedArtifact {
    int version = kArtifactSchemaVersion;
    Signature signature;
    std::vector<Example> demos;
    ModuleKind module_kind = ModuleKind::Predict;
    std::optional<int> vote_n;
    std::optional<std::string> vote_field;
    GenParams gen_params;
    TrialSummary trial_summary;

    ProgramModule to_module() const;
    static OptimizedArtifact from_module(const ProgramModule& module, TrialSummary summary);
};

// Canonical JSON: sorted keys, fixed float formatting, UTF-8, trailing
// newline. Identical artifacts serialize to identical bytes.
void save_artifact(const OptimizedArtifact& artifact, const std::string& path);

// Validates the schema version and every type invariant before returning.
OptimizedArtifact load_artifact(const std::string& path);

enum class ExportStyle { SystemOnly, FullTemplate };

ExportStyle export_style_from_name(const std::string& name);

// SystemOnly emits the optimized instruction verbatim, for use as a plain
// system message. FullTemplate emits the complete adapter rendering (schema
// block, demos, and the input turn) as one text document with role headers;
// without sample_inputs the live turn uses {field} placeholders.
// include_provenance prepends a comment header naming optimizer, seed and
// scores.
std::string export_prompt(const OptimizedArtifact& artifact, ExportStyle style,
                          const std::map<std::string, std::string>* sample_inputs = nullptr,
                          bool include_provenance = false,
                          const AdapterConfig& adapter = {});

}  // namespace promptforge
