#include "promptforge/artifact.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "promptforge/errors.hpp"
#include "promptforge/serde.hpp"

namespace promptforge {

ProgramModule OptimizedArtifact::to_module() const {
    ProgramModule module;
    module.kind = module_kind;
    module.signature = signature;
    module.demos = demos;
    module.params = gen_params;
    if (vote_n) module.vote_n = *vote_n;
    if (vote_field) module.vote_field = *vote_field;
    module.validate();
    return module;
}

OptimizedArtifact OptimizedArtifact::from_module(const ProgramModule& module,
                                                 TrialSummary summary) {
    OptimizedArtifact artifact;
    artifact.signature = module.signature;
    artifact.demos = module.demos;
    artifact.module_kind = module.kind;
    if (module.kind == ModuleKind::MajorityVote) {
        artifact.vote_n = module.vote_n;
        artifact.vote_field = module.effective_vote_field();
    }
    artifact.gen_params = module.params;
    artifact.trial_summary = std::move(summary);
    return artifact;
}

void save_artifact(const OptimizedArtifact& artifact, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::IoError, "cannot write " + path);
    out << canonical_dump(artifact_to_json(artifact));
    out.flush();
    if (!out) fail(Errc::IoError, "write failed for " + path);
}

OptimizedArtifact load_artifact(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::IoError, "cannot read " + path);
    nlohmann::json value = nlohmann::json::parse(in, nullptr, false);
    if (value.is_discarded()) fail(Errc::ParseError, "invalid JSON in " + path);
    OptimizedArtifact artifact = artifact_from_json(value);
    try {
        artifact.to_module();  // runs every module/demo invariant
    } catch (const Error& error) {
        fail(Errc::InvariantViolation, error.what());
    }
    return artifact;
}

ExportStyle export_style_from_name(const std::string& name) {
    if (name == "system_only") return ExportStyle::SystemOnly;
    if (name == "full_template") return ExportStyle::FullTemplate;
    fail(Errc::InvalidArgument, "unknown export style '" + name + "'");
}

namespace {

std::string provenance_header(const OptimizedArtifact& artifact) {
    std::ostringstream out;
    out << "# optimizer: "
        << (artifact.trial_summary.optimizer.empty() ? "none" : artifact.trial_summary.optimizer)
        << "  seed: " << artifact.trial_summary.seed
        << "  best_score: " << artifact.trial_summary.best_full_score
        << "  baseline_score: " << artifact.trial_summary.baseline_full_score << "\n";
    return out.str();
}

}  // namespace

std::string export_prompt(const OptimizedArtifact& artifact, ExportStyle style,
                          const std::map<std::string, std::string>* sample_inputs,
                          bool include_provenance, const AdapterConfig& adapter) {
    std::string out;
    if (include_provenance) out += provenance_header(artifact);

    if (style == ExportStyle::SystemOnly) {
        out += artifact.signature.instruction;
        return out;
    }

    // Placeholders keep the template fillable when no live inputs are given.
    std::map<std::string, std::string> inputs;
    if (sample_inputs) {
        inputs = *sample_inputs;
    } else {
        for (const auto* field : artifact.signature.inputs())
            inputs.emplace(field->name, "{" + field->name + "}");
    }
    ChatMessages messages = render_prompt(artifact.signature, artifact.demos, inputs, adapter);
    for (size_t i = 0; i < messages.size(); ++i) {
        if (i) out += "\n";
        out += "=== " + messages[i].role + " ===\n" + messages[i].content + "\n";
    }
    return out;
}

}  // namespace promptforge
