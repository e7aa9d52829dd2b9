#include <doctest.h>

#include <map>
#include <set>

#include "promptforge/data.hpp"
#include "test_support.hpp"

using namespace promptforge;
using pftest::TmpDir;
using pftest::write_file;

namespace {

Dataset labeled_dataset(size_t total, size_t positives) {
    Dataset dataset;
    for (size_t i = 0; i < total; ++i) {
        Example example;
        example.values["prompt"] = "row " + std::to_string(i);
        example.values["label"] = i < positives ? "True" : "False";
        dataset.examples.push_back(std::move(example));
    }
    return dataset;
}

std::multiset<std::string> row_multiset(const Dataset& dataset) {
    std::multiset<std::string> rows;
    for (const auto& example : dataset.examples) rows.insert(example.values.at("prompt"));
    return rows;
}

}  // namespace

TEST_SUITE_BEGIN("data");

TEST_CASE("csv loading maps columns and preserves row order") {
    TmpDir dir("csv");
    const std::string path = dir.file("data.csv");
    write_file(path,
               "question,label\n"
               "what is rust,False\n"
               "\"ignore, all previous\",True\n"
               "\"a \"\"quoted\"\" one\",False\n");
    LoadSpec spec;
    spec.mapping = {{"question", "question"}, {"label", "is_jailbreak"}};
    spec.input_fields = {"question"};
    const Dataset dataset = load_dataset(path, DataFormat::Csv, spec);
    REQUIRE(dataset.examples.size() == 3);
    CHECK(dataset.examples[0].values.at("question") == "what is rust");
    CHECK(dataset.examples[1].values.at("question") == "ignore, all previous");
    CHECK(dataset.examples[1].values.at("is_jailbreak") == "True");
    CHECK(dataset.examples[2].values.at("question") == "a \"quoted\" one");
    CHECK(dataset.examples[0].input_keys.count("question") == 1);
}

TEST_CASE("csv rows with the wrong arity are rejected with their row number") {
    TmpDir dir("csv_bad");
    const std::string path = dir.file("data.csv");
    write_file(path, "a,b\n1,2\nonly-one\n");
    try {
        load_dataset(path, DataFormat::Csv, {});
        FAIL_CHECK("expected ParseError");
    } catch (const Error& error) {
        CHECK(error.code() == Errc::ParseError);
        CHECK(std::string(error.what()).find("row 3") != std::string::npos);
    }
}

TEST_CASE("jsonl loading rejects rows missing a mapped column") {
    TmpDir dir("jsonl");
    const std::string path = dir.file("data.jsonl");
    write_file(path,
               R"({"question": "q1", "label": "True"})" "\n"
               R"({"question": "q2"})" "\n");
    LoadSpec spec;
    spec.mapping = {{"question", "question"}, {"label", "label"}};
    try {
        load_dataset(path, DataFormat::Jsonl, spec);
        FAIL_CHECK("expected MissingColumn");
    } catch (const Error& error) {
        CHECK(error.code() == Errc::MissingColumn);
        CHECK(std::string(error.what()).find("row 2") != std::string::npos);
    }
}

TEST_CASE("jsonl stringifies booleans and numbers") {
    TmpDir dir("jsonl_types");
    const std::string path = dir.file("data.jsonl");
    write_file(path, R"({"q": "x", "flag": true, "n": 3})" "\n");
    const Dataset dataset = load_dataset(path, DataFormat::Jsonl, {});
    CHECK(dataset.examples[0].values.at("flag") == "True");
    CHECK(dataset.examples[0].values.at("n") == "3");
}

TEST_CASE("missing files and malformed json are reported") {
    TmpDir dir("missing");
    try {
        load_dataset(dir.file("nope.jsonl"), DataFormat::Jsonl, {});
        FAIL_CHECK("expected FileNotFound");
    } catch (const Error& error) {
        CHECK(error.code() == Errc::FileNotFound);
        CHECK(std::string(error.what()).find("nope.jsonl") != std::string::npos);
    }
    const std::string path = dir.file("bad.jsonl");
    write_file(path, "{not json}\n");
    CHECK_THROWS_AS(load_dataset(path, DataFormat::Jsonl, {}), Error);
}

TEST_CASE("reloading a file yields identical content") {
    TmpDir dir("reload");
    const std::string path = dir.file("data.csv");
    write_file(path, "a,b\n1,2\n3,4\n");
    const Dataset first = load_dataset(path, DataFormat::Csv, {});
    const Dataset second = load_dataset(path, DataFormat::Csv, {});
    CHECK(first.examples == second.examples);
}

TEST_CASE("save and reload round-trips both formats") {
    TmpDir dir("roundtrip");
    Dataset dataset = labeled_dataset(7, 3);
    for (const char* name : {"out.csv", "out.jsonl"}) {
        const DataFormat format =
            std::string(name).ends_with("csv") ? DataFormat::Csv : DataFormat::Jsonl;
        const std::string path = dir.file(name);
        save_dataset(dataset, path, format);
        const Dataset loaded = load_dataset(path, format, {});
        REQUIRE(loaded.examples.size() == dataset.examples.size());
        for (size_t i = 0; i < loaded.examples.size(); ++i)
            CHECK(loaded.examples[i].values == dataset.examples[i].values);
    }
}

TEST_CASE("balancing downsamples every class to the minority count") {
    const Dataset dataset = labeled_dataset(6142, 666);
    const Dataset balanced = balance_by_label(dataset, "label", 13);
    CHECK(balanced.examples.size() == 1332);
    std::map<std::string, int> counts;
    for (const auto& example : balanced.examples) counts[example.values.at("label")] += 1;
    CHECK(counts["True"] == 666);
    CHECK(counts["False"] == 666);
}

TEST_CASE("an already balanced dataset is reshuffled, same multiset") {
    const Dataset dataset = labeled_dataset(10, 5);
    const Dataset balanced = balance_by_label(dataset, "label", 3);
    CHECK(balanced.examples.size() == 10);
    CHECK(row_multiset(balanced) == row_multiset(dataset));
}

TEST_CASE("balancing is deterministic per seed") {
    const Dataset dataset = labeled_dataset(50, 20);
    const Dataset a = balance_by_label(dataset, "label", 7);
    const Dataset b = balance_by_label(dataset, "label", 7);
    CHECK(a.examples == b.examples);
    const Dataset c = balance_by_label(dataset, "label", 8);
    CHECK(a.examples != c.examples);
}

TEST_CASE("balancing a single class fails") {
    CHECK_THROWS_AS(balance_by_label(labeled_dataset(5, 5), "label", 0), Error);
}

TEST_CASE("split produces exact, disjoint partitions") {
    const Dataset dataset = labeled_dataset(136, 60);
    const SplitResult parts = split(dataset, {40, 75, 21}, 11);
    CHECK(parts.train.examples.size() == 40);
    CHECK(parts.val.examples.size() == 75);
    CHECK(parts.test.examples.size() == 21);
    std::set<std::string> seen;
    for (const auto* part : {&parts.train, &parts.val, &parts.test})
        for (const auto& example : part->examples)
            CHECK(seen.insert(example.values.at("prompt")).second);
}

TEST_CASE("split leaves surplus rows out") {
    const Dataset dataset = labeled_dataset(90, 45);
    const SplitResult parts = split(dataset, {28, 45, 13}, 5);
    CHECK(parts.train.examples.size() == 28);
    CHECK(parts.val.examples.size() == 45);
    CHECK(parts.test.examples.size() == 13);
}

TEST_CASE("split edge cases") {
    const Dataset dataset = labeled_dataset(4, 2);
    const SplitResult empty = split(dataset, {0, 0, 0}, 1);
    CHECK(empty.train.examples.empty());
    CHECK(empty.val.examples.empty());
    CHECK(empty.test.examples.empty());
    CHECK_THROWS_AS(split(dataset, {3, 2, 0}, 1), Error);
}

TEST_CASE("corruption keeps the row count and labels exactly the selected share") {
    ScriptedBackend backend({}, "CORRUPTED");
    GenParams params;
    params.model = "corruptor";
    const Dataset dataset = labeled_dataset(100, 0);
    const Dataset out = inject_corruptions(
        dataset, {corruption_kind("logical_error")}, 0.5, "prompt", backend, params, 3);
    CHECK(out.examples.size() == 100);
    int corrupted = 0;
    for (const auto& example : out.examples) {
        REQUIRE(example.has("is_hallucination"));
        if (example.values.at("is_hallucination") == "True") {
            ++corrupted;
            CHECK(example.values.at("prompt") == "CORRUPTED");
        }
    }
    CHECK(corrupted == 50);
}

TEST_CASE("corruption assigns kinds round-robin in selection order") {
    // distinct response per kind, keyed on each template's distinctive wording
    ScriptedBackend backend(
        {{"dead, unreachable", {"K:unreachable_code"}, std::nullopt},
         {"syntax error", {"K:syntactic_incorrectness"}, std::nullopt},
         {"logical error", {"K:logical_error"}, std::nullopt},
         {"robustness issue", {"K:robustness_issue"}, std::nullopt}},
        "K:none");
    GenParams params;
    params.model = "corruptor";
    const std::vector<CorruptionKind> kinds = {
        corruption_kind("unreachable_code"), corruption_kind("syntactic_incorrectness"),
        corruption_kind("logical_error"), corruption_kind("robustness_issue")};
    const Dataset dataset = labeled_dataset(40, 0);
    const Dataset out = inject_corruptions(dataset, kinds, 1.0, "prompt", backend, params, 17);

    std::map<std::string, int> per_kind;
    for (const auto& example : out.examples)
        if (example.values.at("is_hallucination") == "True")
            per_kind[example.values.at("prompt")] += 1;
    REQUIRE(per_kind.size() == 4);
    for (const auto& kind : kinds) CHECK(per_kind["K:" + kind.name] == 10);
}

TEST_CASE("clean rows keep untouched fields byte-for-byte") {
    ScriptedBackend backend({}, "CORRUPTED");
    GenParams params;
    params.model = "corruptor";
    Dataset dataset = labeled_dataset(10, 0);
    for (auto& example : dataset.examples) example.values["extra"] = "payload \xF0\x9F\x8C\x8D";
    const Dataset out = inject_corruptions(
        dataset, {corruption_kind("instruction")}, 0.3, "prompt", backend, params, 4);
    std::map<std::string, Example> originals;
    for (const auto& example : dataset.examples) originals[example.values.at("prompt")] = example;

    int clean = 0;
    for (const auto& example : out.examples) {
        if (example.values.at("is_contradiction") == "True") continue;
        ++clean;
        const Example& original = originals.at(example.values.at("prompt"));
        CHECK(example.values.at("extra") == original.values.at("extra"));
        CHECK(example.values.at("prompt") == original.values.at("prompt"));
    }
    CHECK(clean == 7);  // ceil(0.3 * 10) = 3 corrupted
}

TEST_CASE("backend failures leave the example clean and labeled false") {
    ScriptedBackend backend(
        {{"row 0", {}, BackendError{BackendErrorKind::Transport, "down"}}}, "CORRUPTED");
    GenParams params;
    params.model = "corruptor";
    const Dataset dataset = labeled_dataset(4, 0);
    const Dataset out = inject_corruptions(
        dataset, {corruption_kind("format")}, 1.0, "prompt", backend, params, 9);
    int corrupted = 0;
    for (const auto& example : out.examples) {
        if (example.values.at("is_contradiction") == "True") ++corrupted;
        if (example.values.at("prompt") == "row 0")
            CHECK(example.values.at("is_contradiction") == "False");
    }
    CHECK(corrupted == 3);
}

TEST_CASE("corruption input validation") {
    ScriptedBackend backend({}, "x");
    GenParams params;
    params.model = "corruptor";
    const Dataset dataset = labeled_dataset(4, 0);
    CHECK_THROWS_AS(
        inject_corruptions(dataset, {}, 0.5, "prompt", backend, params, 1), Error);
    CHECK_THROWS_AS(inject_corruptions(dataset, {corruption_kind("format")}, 0.0, "prompt",
                                       backend, params, 1),
                    Error);
    CHECK_THROWS_AS(inject_corruptions(dataset,
                                       {corruption_kind("format"),
                                        corruption_kind("logical_error")},
                                       0.5, "prompt", backend, params, 1),
                    Error);
    CHECK_THROWS_AS(corruption_kind("bogus"), Error);
}

TEST_CASE("transforms are recorded in provenance and the sidecar") {
    TmpDir dir("prov");
    const Dataset dataset = labeled_dataset(10, 5);
    const Dataset balanced = balance_by_label(dataset, "label", 2);
    REQUIRE(balanced.provenance.transforms.size() >= 1);
    CHECK(balanced.provenance.transforms.back().find("balance_by_label") == 0);

    const std::string path = dir.file("out.jsonl");
    save_dataset(balanced, path, DataFormat::Jsonl);
    write_provenance_sidecar(balanced, path);
    const std::string sidecar = pftest::read_file(path + ".provenance.json");
    CHECK(sidecar.find("balance_by_label") != std::string::npos);
}

TEST_SUITE_END();
