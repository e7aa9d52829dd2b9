#include "promptforge/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "promptforge/errors.hpp"
#include "promptforge/rng.hpp"

namespace promptforge {

using nlohmann::json;

DataFormat data_format_from_name(const std::string& name) {
    if (name == "csv") return DataFormat::Csv;
    if (name == "jsonl") return DataFormat::Jsonl;
    fail(Errc::InvalidArgument, "unknown dataset format '" + name + "'");
}

namespace {

// RFC 4180 style: quoted fields may contain commas, quotes ("" escape) and
// newlines. Returns one record per call, or false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, size_t& line_no) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in.get()) != EOF) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line_no;
                field.push_back(static_cast<char>(c));
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            // swallow; newline handling below
        } else if (c == '\n') {
            ++line_no;
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(static_cast<char>(c));
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

std::string csv_escape(const std::string& value) {
    if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string json_value_to_string(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_boolean()) return value.get<bool>() ? "True" : "False";
    return value.dump();
}

Example row_to_example(const std::map<std::string, std::string>& row, const LoadSpec& spec,
                       size_t row_no) {
    Example example;
    if (spec.mapping.empty()) {
        for (const auto& [column, value] : row) example.values[column] = value;
    } else {
        for (const auto& [column, field] : spec.mapping) {
            auto it = row.find(column);
            if (it == row.end())
                fail(Errc::MissingColumn,
                     "row " + std::to_string(row_no) + " has no column '" + column + "'");
            example.values[field] = it->second;
        }
    }
    for (const auto& field : spec.input_fields) {
        if (!example.has(field))
            fail(Errc::MissingColumn,
                 "row " + std::to_string(row_no) + " has no value for input field '" + field + "'");
        example.input_keys.insert(field);
    }
    return example;
}

}  // namespace

Dataset load_dataset(const std::string& path, DataFormat format, const LoadSpec& spec) {
    std::ifstream in(path);
    if (!in) fail(Errc::FileNotFound, path);

    Dataset dataset;
    dataset.field_mapping = spec.mapping;
    dataset.provenance.source = path;
    dataset.provenance.transforms.push_back("load:" + path);

    if (format == DataFormat::Csv) {
        std::vector<std::string> header;
        size_t line_no = 1;
        if (!read_csv_record(in, header, line_no))
            fail(Errc::ParseError, "row 1: empty CSV file");
        std::vector<std::string> fields;
        size_t row_no = 1;
        while (read_csv_record(in, fields, line_no)) {
            ++row_no;
            if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
            if (fields.size() != header.size())
                fail(Errc::ParseError, "row " + std::to_string(row_no) + ": expected " +
                                           std::to_string(header.size()) + " columns, got " +
                                           std::to_string(fields.size()));
            std::map<std::string, std::string> row;
            for (size_t i = 0; i < header.size(); ++i) row[header[i]] = fields[i];
            dataset.examples.push_back(row_to_example(row, spec, row_no));
        }
    } else {
        std::string line;
        size_t row_no = 0;
        while (std::getline(in, line)) {
            ++row_no;
            if (trim(line).empty()) continue;
            json parsed = json::parse(line, nullptr, false);
            if (parsed.is_discarded() || !parsed.is_object())
                fail(Errc::ParseError, "row " + std::to_string(row_no) + ": not a JSON object");
            std::map<std::string, std::string> row;
            for (const auto& [key, value] : parsed.items())
                row[key] = json_value_to_string(value);
            dataset.examples.push_back(row_to_example(row, spec, row_no));
        }
    }
    return dataset;
}

void save_dataset(const Dataset& dataset, const std::string& path, DataFormat format) {
    std::ofstream out(path);
    if (!out) fail(Errc::IoError, "cannot write " + path);

    if (format == DataFormat::Jsonl) {
        for (const auto& example : dataset.examples) {
            json row;
            for (const auto& [key, value] : example.values) row[key] = value;
            out << row.dump() << "\n";
        }
        return;
    }

    // Union of keys across examples, sorted, as the CSV header.
    std::vector<std::string> columns;
    for (const auto& example : dataset.examples)
        for (const auto& [key, value] : example.values)
            if (std::find(columns.begin(), columns.end(), key) == columns.end())
                columns.push_back(key);
    std::sort(columns.begin(), columns.end());
    for (size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << csv_escape(columns[i]);
    out << "\n";
    for (const auto& example : dataset.examples) {
        for (size_t i = 0; i < columns.size(); ++i) {
            auto it = example.values.find(columns[i]);
            out << (i ? "," : "") << csv_escape(it == example.values.end() ? "" : it->second);
        }
        out << "\n";
    }
}

void write_provenance_sidecar(const Dataset& dataset, const std::string& dataset_path) {
    json sidecar;
    sidecar["source"] = dataset.provenance.source;
    sidecar["transforms"] = dataset.provenance.transforms;
    std::ofstream out(dataset_path + ".provenance.json");
    if (!out) fail(Errc::IoError, "cannot write provenance sidecar for " + dataset_path);
    out << sidecar.dump(2) << "\n";
}

Dataset balance_by_label(const Dataset& dataset, const std::string& label_field, uint64_t seed) {
    std::map<std::string, std::vector<size_t>> by_class;
    for (size_t i = 0; i < dataset.examples.size(); ++i) {
        const Example& example = dataset.examples[i];
        if (!example.has(label_field))
            fail(Errc::MissingColumn, "example " + std::to_string(i) + " has no '" + label_field + "'");
        by_class[example.values.at(label_field)].push_back(i);
    }
    if (by_class.size() < 2) fail(Errc::SingleClass, "label '" + label_field + "'");

    size_t minority = dataset.examples.size();
    for (const auto& [label, indices] : by_class) minority = std::min(minority, indices.size());

    Rng rng(seed);
    std::vector<size_t> kept;
    for (auto& [label, indices] : by_class) {
        rng.shuffle(indices);
        kept.insert(kept.end(), indices.begin(), indices.begin() + static_cast<long>(minority));
    }
    rng.shuffle(kept);

    Dataset out;
    out.field_mapping = dataset.field_mapping;
    out.provenance = dataset.provenance;
    out.provenance.transforms.push_back("balance_by_label:" + label_field +
                                        ":seed=" + std::to_string(seed));
    out.examples.reserve(kept.size());
    for (size_t index : kept) out.examples.push_back(dataset.examples[index]);
    return out;
}

SplitResult split(const Dataset& dataset, SplitSizes sizes, uint64_t seed) {
    const size_t wanted = sizes.train + sizes.val + sizes.test;
    if (wanted > dataset.examples.size())
        fail(Errc::InsufficientData, "need " + std::to_string(wanted) + " examples, have " +
                                         std::to_string(dataset.examples.size()));

    std::vector<size_t> order(dataset.examples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    auto slice = [&](size_t begin, size_t count, const char* name) {
        Dataset part;
        part.field_mapping = dataset.field_mapping;
        part.provenance = dataset.provenance;
        part.provenance.transforms.push_back(std::string("split:") + name +
                                             ":seed=" + std::to_string(seed));
        for (size_t i = begin; i < begin + count; ++i)
            part.examples.push_back(dataset.examples[order[i]]);
        return part;
    };
    return SplitResult{slice(0, sizes.train, "train"), slice(sizes.train, sizes.val, "val"),
                       slice(sizes.train + sizes.val, sizes.test, "test")};
}

namespace {

const std::map<std::string, CorruptionFamily>& kind_registry() {
    static const std::map<std::string, CorruptionFamily> registry = {
        {"unreachable_code", CorruptionFamily::Hallucination},
        {"syntactic_incorrectness", CorruptionFamily::Hallucination},
        {"logical_error", CorruptionFamily::Hallucination},
        {"robustness_issue", CorruptionFamily::Hallucination},
        {"instruction", CorruptionFamily::Contradiction},
        {"format", CorruptionFamily::Contradiction},
        {"example", CorruptionFamily::Contradiction},
    };
    return registry;
}

const std::map<std::string, std::string>& builtin_templates() {
    static const std::map<std::string, std::string> templates = {
        {"unreachable_code",
         "Rewrite the following code so it still looks plausible but contains a dead, "
         "unreachable, or redundant piece of code. Return only the code.\n\n{value}"},
        {"syntactic_incorrectness",
         "Rewrite the following code so it contains a syntax error and fails to compile. "
         "Return only the code.\n\n{value}"},
        {"logical_error",
         "Rewrite the following code so it contains a logical error and no longer solves "
         "the problem correctly, while still looking reasonable. Return only the code.\n\n{value}"},
        {"robustness_issue",
         "Rewrite the following code so it has a robustness issue, such as failing on an "
         "edge case or raising an exception on unusual input. Return only the code.\n\n{value}"},
        {"instruction",
         "Rewrite the following system prompt so two or more instructions directly conflict "
         "or cause ambiguity. Keep the rest unchanged. Return only the prompt.\n\n{value}"},
        {"format",
         "Rewrite the following system prompt so the required output format conflicts with "
         "other stated guidelines. Keep the rest unchanged. Return only the prompt.\n\n{value}"},
        {"example",
         "Rewrite the following system prompt so the provided examples no longer follow the "
         "rules described in the instructions. Keep the rest unchanged. Return only the "
         "prompt.\n\n{value}"},
    };
    return templates;
}

std::string fill_template(std::string text, const std::string& value) {
    const std::string placeholder = "{value}";
    size_t pos = text.find(placeholder);
    while (pos != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos = text.find(placeholder, pos + value.size());
    }
    return text;
}

}  // namespace

CorruptionKind corruption_kind(const std::string& name) {
    auto it = kind_registry().find(name);
    if (it == kind_registry().end())
        fail(Errc::InvalidArgument, "unknown corruption kind '" + name + "'");
    return CorruptionKind{it->second, name};
}

std::string corruption_prompt_template(const std::string& kind_name) {
    auto it = builtin_templates().find(kind_name);
    if (it == builtin_templates().end())
        fail(Errc::InvalidArgument, "no template for corruption kind '" + kind_name + "'");
    return it->second;
}

Dataset inject_corruptions(const Dataset& dataset, const std::vector<CorruptionKind>& kinds,
                           double ratio, const std::string& target_field, Backend& lm_backend,
                           const GenParams& params, uint64_t seed,
                           const std::map<std::string, std::string>* templates) {
    if (kinds.empty()) fail(Errc::EmptyKindList, "at least one corruption kind required");
    if (!(ratio > 0.0 && ratio <= 1.0)) fail(Errc::OutOfRange, "ratio must be in (0, 1]");
    const CorruptionFamily family = kinds.front().family;
    for (const auto& kind : kinds) {
        if (kind_registry().at(kind.name) != kind.family)
            fail(Errc::InvalidArgument, "kind '" + kind.name + "' assigned to the wrong family");
        if (kind.family != family)
            fail(Errc::InvalidArgument, "corruption kinds must share one family");
    }
    for (size_t i = 0; i < dataset.examples.size(); ++i)
        if (!dataset.examples[i].has(target_field))
            fail(Errc::MissingColumn,
                 "example " + std::to_string(i) + " has no '" + target_field + "'");

    const std::string label_field =
        family == CorruptionFamily::Hallucination ? "is_hallucination" : "is_contradiction";
    const size_t count = static_cast<size_t>(
        std::ceil(ratio * static_cast<double>(dataset.examples.size())));

    Rng rng(seed);
    std::vector<size_t> selected = rng.sample_indices(dataset.examples.size(), count);

    Dataset out;
    out.field_mapping = dataset.field_mapping;
    out.provenance = dataset.provenance;
    out.examples = dataset.examples;
    for (auto& example : out.examples) example.values[label_field] = "False";

    size_t skipped = 0;
    for (size_t i = 0; i < selected.size(); ++i) {
        Example& example = out.examples[selected[i]];
        const CorruptionKind& kind = kinds[i % kinds.size()];
        const std::string tpl = templates && templates->count(kind.name)
                                    ? templates->at(kind.name)
                                    : corruption_prompt_template(kind.name);
        ChatMessages messages{{"user", fill_template(tpl, example.values.at(target_field))}};
        CompletionResult result = lm_backend.complete(messages, params);
        if (!result.ok()) {
            ++skipped;  // stays clean, labeled False
            continue;
        }
        example.values[target_field] = result.texts().front();
        example.values[label_field] = "True";
    }

    rng.shuffle(out.examples);
    out.provenance.transforms.push_back(
        "inject_corruptions:" + label_field + ":ratio=" + std::to_string(ratio) +
        ":seed=" + std::to_string(seed) +
        (skipped ? ":skipped=" + std::to_string(skipped) : ""));
    return out;
}

}  // namespace promptforge
