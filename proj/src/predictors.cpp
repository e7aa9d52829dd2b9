#include "promptforge/predictors.hpp"

#include <algorithm>

#include "promptforge/errors.hpp"

namespace promptforge {

const char* module_kind_name(ModuleKind kind) {
    switch (kind) {
        case ModuleKind::Predict: return "predict";
        case ModuleKind::ChainOfThought: return "chain_of_thought";
        case ModuleKind::MajorityVote: return "majority_vote";
    }
    return "predict";
}

ModuleKind module_kind_from_name(const std::string& name) {
    if (name == "predict") return ModuleKind::Predict;
    if (name == "chain_of_thought") return ModuleKind::ChainOfThought;
    if (name == "majority_vote") return ModuleKind::MajorityVote;
    fail(Errc::InvalidArgument, "unknown module kind '" + name + "'");
}

void ProgramModule::validate() const {
    params.validate();
    const auto outputs = signature.outputs();
    if (outputs.empty()) fail(Errc::NoOutputField, "module signature has no outputs");
    for (const auto& demo : demos) {
        for (const auto* field : signature.inputs())
            if (!demo.has(field->name))
                fail(Errc::IncompleteDemo, "demo missing input '" + field->name + "'");
        for (const auto* field : outputs)
            if (field->required_in_demos && !demo.has(field->name))
                fail(Errc::IncompleteDemo, "demo missing output '" + field->name + "'");
    }
    if (kind == ModuleKind::MajorityVote) {
        if (vote_n < 1) fail(Errc::InvalidArgument, "vote_n must be >= 1");
        if (!vote_field.empty() && signature.find(vote_field) == nullptr)
            fail(Errc::InvalidArgument, "vote_field '" + vote_field + "' not in signature");
    }
}

const std::string& ProgramModule::effective_vote_field() const {
    if (!vote_field.empty()) return vote_field;
    return signature.outputs().front()->name;
}

Signature with_reasoning(const Signature& sig) {
    Signature augmented = sig;
    FieldSpec reasoning;
    reasoning.name = kReasoningField;
    reasoning.description = "Think step by step before producing the other output fields.";
    reasoning.kind = FieldKind::Output;
    reasoning.type = ValueKind::Text;
    reasoning.required_in_demos = false;
    // Prepend to the outputs: reasoning streams before the answer.
    auto insert_at = augmented.fields.begin();
    while (insert_at != augmented.fields.end() && insert_at->kind == FieldKind::Input)
        ++insert_at;
    augmented.fields.insert(insert_at, std::move(reasoning));
    return augmented;
}

namespace {

struct Generation {
    Prediction prediction;
};

ForwardResult run_once(const Signature& render_sig, const ProgramModule& module,
                       const std::map<std::string, std::string>& inputs, Backend& backend,
                       const AdapterConfig& adapter, const GenParams& params) {
    ChatMessages messages = render_prompt(render_sig, module.demos, inputs, adapter);
    Trace trace;
    trace.inputs = inputs;
    trace.messages = messages;
    trace.fingerprint = request_fingerprint(messages, params);

    CompletionResult result = backend.complete(messages, params);
    if (!result.ok()) {
        const auto& error = result.error();
        if (error.kind == BackendErrorKind::ContentFiltered) {
            trace.not_answered = true;
            Prediction blocked;
            blocked.parse_ok = false;
            blocked.raw_text = "";
            trace.prediction = blocked;
            return {blocked, trace};
        }
        fail(error.kind == BackendErrorKind::Transport ? Errc::TransportError
                                                       : Errc::ProviderError,
             error.detail);
    }
    Prediction prediction = parse_completion(render_sig, result.texts().front(), adapter);
    trace.prediction = prediction;
    return {prediction, trace};
}

// Move the synthetic reasoning value off the user-declared output map.
void extract_reasoning(Prediction& prediction) {
    auto it = prediction.values.find(kReasoningField);
    if (it == prediction.values.end()) return;
    prediction.reasoning = value_to_string(it->second);
    prediction.values.erase(it);
}

}  // namespace

Prediction majority_vote_select(const std::vector<Prediction>& predictions,
                                const std::string& vote_field) {
    if (predictions.empty()) fail(Errc::EmptyInput, "no predictions to vote over");

    std::vector<const Prediction*> parsed;
    for (const auto& prediction : predictions)
        if (prediction.parse_ok && prediction.find(vote_field)) parsed.push_back(&prediction);

    if (parsed.empty()) {
        Prediction aggregate;
        aggregate.parse_ok = false;
        aggregate.raw_text = predictions.front().raw_text;
        return aggregate;
    }

    // Highest frequency wins; ties go to the value seen earliest.
    const Prediction* winner = nullptr;
    size_t best_count = 0;
    for (size_t i = 0; i < parsed.size(); ++i) {
        const FieldValue& candidate = *parsed[i]->find(vote_field);
        size_t count = 0;
        bool seen_before = false;
        for (size_t j = 0; j < parsed.size(); ++j) {
            if (*parsed[j]->find(vote_field) == candidate) {
                if (j < i) seen_before = true;
                ++count;
            }
        }
        if (seen_before) continue;
        if (count > best_count) {
            best_count = count;
            winner = parsed[i];
        }
    }
    return *winner;
}

ForwardResult forward(const ProgramModule& module,
                      const std::map<std::string, std::string>& inputs, Backend& backend,
                      const AdapterConfig& adapter) {
    module.validate();
    for (const auto* field : module.signature.inputs())
        if (inputs.count(field->name) == 0)
            fail(Errc::MissingInput, "field '" + field->name + "'");

    switch (module.kind) {
        case ModuleKind::Predict:
            return run_once(module.signature, module, inputs, backend, adapter, module.params);

        case ModuleKind::ChainOfThought: {
            const Signature augmented = with_reasoning(module.signature);
            ForwardResult result =
                run_once(augmented, module, inputs, backend, adapter, module.params);
            extract_reasoning(result.prediction);
            extract_reasoning(result.trace.prediction);
            return result;
        }

        case ModuleKind::MajorityVote: {
            const std::string& field = module.effective_vote_field();
            ChatMessages messages = render_prompt(module.signature, module.demos, inputs, adapter);
            std::vector<std::string> texts;
            Trace trace;
            trace.inputs = inputs;
            trace.messages = messages;

            if (backend.supports_batch_n()) {
                GenParams batch = module.params;
                batch.n = module.vote_n;
                trace.fingerprint = request_fingerprint(messages, batch);
                CompletionResult result = backend.complete(messages, batch);
                if (!result.ok()) {
                    const auto& error = result.error();
                    if (error.kind == BackendErrorKind::ContentFiltered) {
                        trace.not_answered = true;
                        Prediction blocked;
                        blocked.parse_ok = false;
                        trace.prediction = blocked;
                        return {blocked, trace};
                    }
                    fail(error.kind == BackendErrorKind::Transport ? Errc::TransportError
                                                                   : Errc::ProviderError,
                         error.detail);
                }
                texts = result.texts();
            } else {
                GenParams single = module.params;
                single.n = 1;
                trace.fingerprint = request_fingerprint(messages, single);
                for (int i = 0; i < module.vote_n; ++i) {
                    CompletionResult result = backend.complete(messages, single);
                    if (!result.ok()) {
                        const auto& error = result.error();
                        if (error.kind == BackendErrorKind::ContentFiltered) {
                            trace.not_answered = true;
                            Prediction blocked;
                            blocked.parse_ok = false;
                            trace.prediction = blocked;
                            return {blocked, trace};
                        }
                        fail(error.kind == BackendErrorKind::Transport ? Errc::TransportError
                                                                       : Errc::ProviderError,
                             error.detail);
                    }
                    texts.push_back(result.texts().front());
                }
            }

            std::vector<Prediction> generations;
            generations.reserve(texts.size());
            for (const auto& text : texts)
                generations.push_back(parse_completion(module.signature, text, adapter));
            Prediction aggregate = majority_vote_select(generations, field);
            trace.prediction = aggregate;
            return {aggregate, trace};
        }
    }
    fail(Errc::InvalidArgument, "unreachable module kind");
}

}  // namespace promptforge
