#pragma once

#include <map>
#include <string>
#include <vector>

#include "promptforge/backend.hpp"
#include "promptforge/sigcore.hpp"

namespace promptforge {

enum class ModuleKind { Predict, ChainOfThought, MajorityVote };

const char* module_kind_name(ModuleKind kind);
ModuleKind module_kind_from_name(const std::string& name);

// An executable program: a signature bound to demos, generation parameters,
// and a prompting strategy. Immutable after construction; forward is
// reentrant, so parallel forwards over distinct inputs are safe.
struct ProgramModule {
    ModuleKind kind = ModuleKind::Predict;
    Signature signature;
    std::vector<Example> demos;
    GenParams params;
    int vote_n = 5;            // MajorityVote only; odd by default to avoid ties
    std::string vote_field;    // MajorityVote only; defaults to the first output field

    void validate() const;
    // The output field votes are counted on.
    const std::string& effective_vote_field() const;
};

// Record of one forward pass, and the substrate bootstrapping builds demos
// from.
struct Trace {
    std::map<std::string, std::string> inputs;
    Prediction prediction;
    ChatMessages messages;
    std::string fingerprint;
    bool not_answered = false;  // content filter blocked the request
};

struct ForwardResult {
    Prediction prediction;
    Trace trace;
};

// The synthetic reasoning field chain-of-thought prepends to the outputs.
inline constexpr const char* kReasoningField = "reasoning";

// Signature with the reasoning field prepended to the output fields. Demos
// without a reasoning value render without it (labeled examples), demos with
// one keep it (bootstrapped traces).
Signature with_reasoning(const Signature& sig);

// Runs the module once. Content-filter errors come back as a parse_ok=false
// prediction with trace.not_answered set; transport and provider errors
// propagate as exceptions.
ForwardResult forward(const ProgramModule& module,
                      const std::map<std::string, std::string>& inputs, Backend& backend,
                      const AdapterConfig& adapter = {});

// Majority vote over parsed generations: drops unparsed members, counts the
// vote field's values, breaks ties by earliest first occurrence. If every
// member failed parsing the aggregate is parse_ok=false.
Prediction majority_vote_select(const std::vector<Prediction>& predictions,
                                const std::string& vote_field);

}  // namespace promptforge
