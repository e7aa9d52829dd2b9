#include "promptforge/sigcore.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace promptforge {

namespace {

bool is_identifier(const std::string& name) {
    if (name.empty()) return false;
    auto head = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto tail = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    if (!head(name[0])) return false;
    return std::all_of(name.begin() + 1, name.end(), tail);
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string lowercase(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

std::string join_choices(const std::vector<std::string>& choices) {
    std::string out;
    for (size_t i = 0; i < choices.size(); ++i) {
        if (i) out += ", ";
        out += choices[i];
    }
    return out;
}

// Schema line for the system message, e.g. "1. `score` (float): the score".
void append_field_line(std::string& out, size_t index, const FieldSpec& field) {
    out += std::to_string(index) + ". `" + field.name + "` (" + value_kind_name(field.type) + ")";
    if (!field.description.empty()) out += ": " + field.description;
    if (field.type == ValueKind::Literal) {
        out += " Must be exactly one of: " + join_choices(field.choices) + ".";
    } else if (field.type == ValueKind::Boolean && field.kind == FieldKind::Output) {
        out += " Must be True or False.";
    }
    out += "\n";
}

}  // namespace

const char* value_kind_name(ValueKind kind) {
    switch (kind) {
        case ValueKind::Text: return "text";
        case ValueKind::Boolean: return "boolean";
        case ValueKind::Float: return "float";
        case ValueKind::Literal: return "literal";
    }
    return "text";
}

std::string value_to_string(const FieldValue& value) {
    if (const auto* text = std::get_if<std::string>(&value)) return *text;
    if (const auto* flag = std::get_if<bool>(&value)) return *flag ? "True" : "False";
    if (const auto* num = std::get_if<double>(&value)) return format_double(*num);
    return std::get<LiteralValue>(value).value;
}

std::string trim(const std::string& text) {
    size_t begin = 0;
    size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return text.substr(begin, end - begin);
}

FieldSpec input_field(std::string name, ValueKind type, std::string description) {
    return FieldSpec{std::move(name), std::move(description), FieldKind::Input, type, {}, true};
}

FieldSpec output_field(std::string name, ValueKind type, std::string description) {
    return FieldSpec{std::move(name), std::move(description), FieldKind::Output, type, {}, true};
}

FieldSpec literal_output_field(std::string name, std::vector<std::string> choices,
                               std::string description) {
    return FieldSpec{std::move(name), std::move(description), FieldKind::Output,
                     ValueKind::Literal, std::move(choices), true};
}

std::vector<const FieldSpec*> Signature::inputs() const {
    std::vector<const FieldSpec*> out;
    for (const auto& field : fields)
        if (field.kind == FieldKind::Input) out.push_back(&field);
    return out;
}

std::vector<const FieldSpec*> Signature::outputs() const {
    std::vector<const FieldSpec*> out;
    for (const auto& field : fields)
        if (field.kind == FieldKind::Output) out.push_back(&field);
    return out;
}

const FieldSpec* Signature::find(const std::string& field_name) const {
    for (const auto& field : fields)
        if (field.name == field_name) return &field;
    return nullptr;
}

Signature define_signature(std::string name, std::string instruction,
                           std::vector<FieldSpec> fields) {
    if (trim(instruction).empty()) fail(Errc::EmptyInstruction, "signature '" + name + "'");
    std::set<std::string> seen;
    size_t inputs = 0;
    size_t outputs = 0;
    for (const auto& field : fields) {
        if (!is_identifier(field.name))
            fail(Errc::InvalidField, "field name '" + field.name + "' is not an identifier");
        if (!seen.insert(field.name).second)
            fail(Errc::DuplicateField, "field '" + field.name + "'");
        if (field.type == ValueKind::Literal) {
            if (field.choices.empty())
                fail(Errc::InvalidField, "literal field '" + field.name + "' has no choices");
            std::set<std::string> distinct(field.choices.begin(), field.choices.end());
            if (distinct.size() != field.choices.size())
                fail(Errc::InvalidField, "literal field '" + field.name + "' repeats a choice");
        }
        (field.kind == FieldKind::Input ? inputs : outputs) += 1;
    }
    if (inputs == 0) fail(Errc::NoInputField, "signature '" + name + "'");
    if (outputs == 0) fail(Errc::NoOutputField, "signature '" + name + "'");
    return Signature{std::move(name), std::move(instruction), std::move(fields)};
}

const std::string& Example::get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) fail(Errc::MissingInput, "example has no value for '" + key + "'");
    return it->second;
}

Example make_example(std::map<std::string, std::string> values,
                     std::set<std::string> input_keys) {
    for (const auto& key : input_keys) {
        if (values.count(key) == 0)
            fail(Errc::InvalidArgument, "input key '" + key + "' missing from example values");
    }
    return Example{std::move(values), std::move(input_keys)};
}

const FieldValue* Prediction::find(const std::string& field_name) const {
    auto it = values.find(field_name);
    return it == values.end() ? nullptr : &it->second;
}

void AdapterConfig::validate() const {
    if (field_open_marker.empty() || field_close_marker.empty() || completed_marker.empty())
        fail(Errc::InvalidArgument, "adapter markers must be non-empty");
    if (field_open_marker == field_close_marker || field_open_marker == completed_marker ||
        field_close_marker == completed_marker)
        fail(Errc::InvalidArgument, "adapter markers must be mutually distinct");
}

namespace {

std::string render_system_message(const Signature& sig, const AdapterConfig& adapter) {
    std::string out = sig.instruction;
    out += "\n\nYour input fields are:\n";
    size_t index = 0;
    for (const auto* field : sig.inputs()) append_field_line(out, ++index, *field);
    out += "\nYour output fields are:\n";
    index = 0;
    for (const auto* field : sig.outputs()) append_field_line(out, ++index, *field);
    out += "\nAll interactions are structured in the following way, with the appropriate "
           "values filled in.\n\n";
    for (const auto& field : sig.fields) {
        out += adapter.marker(field.name) + "\n{" + field.name + "}\n\n";
    }
    out += adapter.completed_marker;
    return out;
}

std::string render_input_block(const Signature& sig, const std::map<std::string, std::string>& values,
                               const AdapterConfig& adapter, bool is_demo) {
    std::string out;
    for (const auto* field : sig.inputs()) {
        auto it = values.find(field->name);
        if (it == values.end())
            fail(is_demo ? Errc::IncompleteDemo : Errc::MissingInput, "field '" + field->name + "'");
        out += adapter.marker(field->name) + "\n" + it->second + "\n\n";
    }
    return out;
}

}  // namespace

std::string render_output_block(const Signature& sig, const Example& demo,
                                const AdapterConfig& adapter) {
    std::string out;
    for (const auto* field : sig.outputs()) {
        auto it = demo.values.find(field->name);
        if (it == demo.values.end()) {
            if (!field->required_in_demos) continue;
            fail(Errc::IncompleteDemo, "field '" + field->name + "'");
        }
        out += adapter.marker(field->name) + "\n" + it->second + "\n\n";
    }
    out += adapter.completed_marker;
    return out;
}

ChatMessages render_prompt(const Signature& sig, const std::vector<Example>& demos,
                           const std::map<std::string, std::string>& inputs,
                           const AdapterConfig& adapter) {
    adapter.validate();
    ChatMessages messages;
    messages.push_back({"system", render_system_message(sig, adapter)});
    for (const auto& demo : demos) {
        messages.push_back({"user", render_input_block(sig, demo.values, adapter, true)});
        messages.push_back({"assistant", render_output_block(sig, demo, adapter)});
    }
    std::string live = render_input_block(sig, inputs, adapter, false);
    const auto outputs = sig.outputs();
    live += "Respond with the corresponding output fields, starting with the field " +
            adapter.marker(outputs.front()->name) + ", and end with the marker " +
            adapter.completed_marker + ".";
    messages.push_back({"user", live});
    return messages;
}

namespace {

std::optional<FieldValue> coerce(const FieldSpec& field, const std::string& span) {
    switch (field.type) {
        case ValueKind::Text:
            return FieldValue{span};
        case ValueKind::Boolean: {
            std::string low = lowercase(span);
            if (low == "true") return FieldValue{true};
            if (low == "false") return FieldValue{false};
            return std::nullopt;
        }
        case ValueKind::Float: {
            double parsed = 0.0;
            const char* begin = span.data();
            const char* end = begin + span.size();
            auto [ptr, ec] = std::from_chars(begin, end, parsed);
            if (ec != std::errc() || ptr != end || span.empty()) return std::nullopt;
            return FieldValue{parsed};
        }
        case ValueKind::Literal: {
            for (const auto& choice : field.choices)
                if (span == choice) return FieldValue{LiteralValue{span}};
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

Prediction parse_completion(const Signature& sig, const std::string& raw,
                            const AdapterConfig& adapter) {
    adapter.validate();
    Prediction prediction;
    prediction.raw_text = raw;
    prediction.parse_ok = true;

    // Positions of every marker we know about, so each field's span ends at
    // the next marker (or completed marker, or end of text).
    std::vector<size_t> boundaries;
    const auto outputs = sig.outputs();
    for (const auto* field : outputs) {
        const std::string marker = adapter.marker(field->name);
        for (size_t pos = raw.find(marker); pos != std::string::npos;
             pos = raw.find(marker, pos + 1))
            boundaries.push_back(pos);
    }
    for (size_t pos = raw.find(adapter.completed_marker); pos != std::string::npos;
         pos = raw.find(adapter.completed_marker, pos + 1))
        boundaries.push_back(pos);
    std::sort(boundaries.begin(), boundaries.end());

    for (const auto* field : outputs) {
        const std::string marker = adapter.marker(field->name);
        size_t start = raw.find(marker);
        if (start == std::string::npos) {
            prediction.parse_ok = false;
            continue;
        }
        size_t content_begin = start + marker.size();
        size_t content_end = raw.size();
        for (size_t boundary : boundaries) {
            if (boundary >= content_begin) {
                content_end = boundary;
                break;
            }
        }
        std::string span = trim(raw.substr(content_begin, content_end - content_begin));
        auto value = coerce(*field, span);
        if (!value) {
            prediction.parse_ok = false;
            continue;
        }
        prediction.values.emplace(field->name, std::move(*value));
    }
    return prediction;
}

}  // namespace promptforge
