#pragma once

#include <map>
#include <string>
#include <vector>

#include "promptforge/backend.hpp"
#include "promptforge/sigcore.hpp"

namespace promptforge {

struct Provenance {
    std::string source;
    std::vector<std::string> transforms;  // every operation applied, in order
};

struct Dataset {
    std::vector<Example> examples;
    std::map<std::string, std::string> field_mapping;  // file column -> field name
    Provenance provenance;
};

enum class DataFormat { Csv, Jsonl };

DataFormat data_format_from_name(const std::string& name);

struct LoadSpec {
    // Empty mapping keeps column names as field names.
    std::map<std::string, std::string> mapping;
    std::vector<std::string> input_fields;
};

// Parses rows into Examples, preserving row order. Malformed rows and rows
// missing mapped columns are rejected with their 1-based row number.
Dataset load_dataset(const std::string& path, DataFormat format, const LoadSpec& spec);

void save_dataset(const Dataset& dataset, const std::string& path, DataFormat format);

// Writes the transform chain next to a saved dataset as
// "<dataset_path>.provenance.json".
void write_provenance_sidecar(const Dataset& dataset, const std::string& dataset_path);

// Downsamples every class to the minority-class count (seeded, without
// replacement), then reshuffles with the same seed.
Dataset balance_by_label(const Dataset& dataset, const std::string& label_field, uint64_t seed);

struct SplitSizes {
    size_t train = 0;
    size_t val = 0;
    size_t test = 0;
};

struct SplitResult {
    Dataset train;
    Dataset val;
    Dataset test;
};

// Seeded shuffle then contiguous slices; partitions are disjoint and
// size-exact. Leftover rows are dropped.
SplitResult split(const Dataset& dataset, SplitSizes sizes, uint64_t seed);

enum class CorruptionFamily { Hallucination, Contradiction };

struct CorruptionKind {
    CorruptionFamily family = CorruptionFamily::Hallucination;
    std::string name;
};

// Resolves a kind name ("unreachable_code", "instruction", ...) to its family.
CorruptionKind corruption_kind(const std::string& name);

// The built-in corruption prompt template for a kind; "{value}" is replaced
// with the clean field value. Editable copies ship under assets/.
std::string corruption_prompt_template(const std::string& kind_name);

// Corrupts ceil(ratio * |dataset|) seeded-selected examples by sending each
// kind's prompt template to the backend and replacing target_field with the
// response; assigns kinds round-robin in selection order. Every example gains
// a boolean label column (is_hallucination or is_contradiction by family);
// the result is the merged, seed-shuffled mix of corrupted and clean rows.
// Backend failures leave the example clean (skip is recorded in provenance).
Dataset inject_corruptions(const Dataset& dataset, const std::vector<CorruptionKind>& kinds,
                           double ratio, const std::string& target_field, Backend& lm_backend,
                           const GenParams& params, uint64_t seed,
                           const std::map<std::string, std::string>* templates = nullptr);

}  // namespace promptforge
