#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "promptforge/errors.hpp"

namespace promptforge {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
    bool operator==(const ChatMessage&) const = default;
};
using ChatMessages = std::vector<ChatMessage>;

enum class FieldKind { Input, Output };
enum class ValueKind { Text, Boolean, Float, Literal };

const char* value_kind_name(ValueKind kind);

// A literal field's parsed value. Distinct from plain text because metric
// comparison treats literals exactly and text case-insensitively.
struct LiteralValue {
    std::string value;
    bool operator==(const LiteralValue&) const = default;
};

using FieldValue = std::variant<std::string, bool, double, LiteralValue>;

// Canonical text form: booleans render "True"/"False", floats render with
// enough digits to round-trip, text and literals render verbatim.
std::string value_to_string(const FieldValue& value);

// One typed input or output slot of a signature.
struct FieldSpec {
    std::string name;
    std::string description;
    FieldKind kind = FieldKind::Input;
    ValueKind type = ValueKind::Text;
    std::vector<std::string> choices;  // Literal only, >= 1 distinct entries
    // The synthetic reasoning field is rendered in demos only when the demo
    // actually carries it (bootstrapped traces do, labeled examples do not).
    bool required_in_demos = true;
};

FieldSpec input_field(std::string name, ValueKind type = ValueKind::Text,
                      std::string description = "");
FieldSpec output_field(std::string name, ValueKind type = ValueKind::Text,
                       std::string description = "");
FieldSpec literal_output_field(std::string name, std::vector<std::string> choices,
                               std::string description = "");

// The optimizable unit: an instruction plus an ordered, typed field schema.
struct Signature {
    std::string name;
    std::string instruction;
    std::vector<FieldSpec> fields;

    std::vector<const FieldSpec*> inputs() const;
    std::vector<const FieldSpec*> outputs() const;
    const FieldSpec* find(const std::string& field_name) const;
};

// Validates and returns a Signature. Field names must be unique identifiers,
// and there must be at least one input and one output field.
Signature define_signature(std::string name, std::string instruction,
                           std::vector<FieldSpec> fields);

// A named field-value map. Demos must carry values for every output field.
struct Example {
    std::map<std::string, std::string> values;
    std::set<std::string> input_keys;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    bool operator==(const Example&) const = default;
};

Example make_example(std::map<std::string, std::string> values,
                     std::set<std::string> input_keys);

// Parsed model output. Parse failures are data, not exceptions: parse_ok is
// false and values holds whatever fields did parse.
struct Prediction {
    std::map<std::string, FieldValue> values;
    std::string raw_text;
    bool parse_ok = false;
    std::optional<std::string> reasoning;

    const FieldValue* find(const std::string& field_name) const;
};

// Marker grammar for rendering and parsing completions. Defaults are part of
// the public contract; exported prompts and the parser share them.
struct AdapterConfig {
    std::string field_open_marker = "[[ ## ";
    std::string field_close_marker = " ## ]]";
    std::string completed_marker = "[[ ## completed ## ]]";

    std::string marker(const std::string& field_name) const {
        return field_open_marker + field_name + field_close_marker;
    }
    void validate() const;
};

// Renders the full chat prompt: one system message (instruction, field
// schema, response format), a user/assistant pair per demo, and a final user
// message with the live inputs. Byte-identical output for identical inputs.
ChatMessages render_prompt(const Signature& sig, const std::vector<Example>& demos,
                           const std::map<std::string, std::string>& inputs,
                           const AdapterConfig& adapter = {});

// Extracts each output field's span from marker-delimited raw text and
// coerces it to the declared type. Never throws; see Prediction::parse_ok.
Prediction parse_completion(const Signature& sig, const std::string& raw,
                            const AdapterConfig& adapter = {});

// The assistant-side rendering of a demo's outputs (also what parse_completion
// inverts). Exposed for export and for building scripted test completions.
std::string render_output_block(const Signature& sig, const Example& demo,
                                const AdapterConfig& adapter = {});

std::string trim(const std::string& text);

}  // namespace promptforge
