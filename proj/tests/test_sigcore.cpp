#include <doctest.h>

#include <functional>
#include <set>

#include "promptforge/rng.hpp"
#include "promptforge/sigcore.hpp"
#include "test_support.hpp"

using namespace promptforge;
using pftest::completion;
using pftest::jailbreak_signature;

namespace {

void check_error(Errc expected, const std::function<void()>& fn) {
    try {
        fn();
        FAIL_CHECK("expected error " << errc_name(expected));
    } catch (const Error& error) {
        CHECK(error.code() == expected);
    }
}

}  // namespace

TEST_SUITE_BEGIN("sigcore");

TEST_CASE("define_signature accepts the boolean classifier shape") {
    const Signature sig = jailbreak_signature();
    CHECK(sig.inputs().size() == 1);
    CHECK(sig.outputs().size() == 1);
    CHECK(sig.outputs()[0]->name == "is_jailbreak");
    CHECK(sig.outputs()[0]->type == ValueKind::Boolean);
}

TEST_CASE("define_signature accepts a literal-typed router output") {
    const std::vector<std::string> roles = {
        "Human_Administrator", "Project_Manager", "Software_Engineer", "Writer",
        "Executor",            "Cegid_Loop",      "Weather",           "Cegid_Business"};
    const Signature sig = define_signature(
        "router",
        "Read the conversation and select the next role from roles_list to play. Only return "
        "the role.",
        {input_field("roles", ValueKind::Text, "available roles"), input_field("roles_list"),
         input_field("conversation"), literal_output_field("selected_role", roles)});
    CHECK(sig.outputs().size() == 1);
    CHECK(sig.outputs()[0]->choices.size() == 8);
}

TEST_CASE("define_signature rejects invalid field sets") {
    check_error(Errc::DuplicateField, [] {
        define_signature("t", "x", {input_field("prompt"), output_field("prompt")});
    });
    check_error(Errc::NoInputField, [] { define_signature("t", "x", {output_field("a")}); });
    check_error(Errc::NoOutputField, [] { define_signature("t", "x", {input_field("a")}); });
    check_error(Errc::EmptyInstruction, [] {
        define_signature("t", "  ", {input_field("a"), output_field("b")});
    });
    check_error(Errc::InvalidField, [] {
        define_signature("t", "x", {input_field("9bad"), output_field("b")});
    });
    check_error(Errc::InvalidField, [] {
        define_signature("t", "x", {input_field("a"), literal_output_field("b", {})});
    });
}

TEST_CASE("render_prompt zero-demo shape") {
    const auto messages = render_prompt(jailbreak_signature(), {}, {{"question", "hi"}});
    REQUIRE(messages.size() == 2);
    CHECK(messages[0].role == "system");
    CHECK(messages[1].role == "user");
    CHECK(messages[0].content.find("is_jailbreak") != std::string::npos);
    CHECK(messages[0].content.find("[[ ## is_jailbreak ## ]]") != std::string::npos);
    CHECK(messages[1].content.find("hi") != std::string::npos);
}

TEST_CASE("render_prompt message arithmetic is 2 + 2*demos") {
    const Signature sig = jailbreak_signature();
    std::vector<Example> demos;
    for (int n = 0; n <= 5; ++n) {
        const auto messages = render_prompt(sig, demos, {{"question", "hi"}});
        CHECK(messages.size() == 2 + 2 * demos.size());
        if (n == 1) {
            REQUIRE(messages.size() == 4);
            CHECK(messages[0].role == "system");
            CHECK(messages[1].role == "user");
            CHECK(messages[2].role == "assistant");
            CHECK(messages[3].role == "user");
        }
        demos.push_back(pftest::jailbreak_example("demo " + std::to_string(n), n % 2 == 0));
    }
}

TEST_CASE("render_prompt is deterministic") {
    const Signature sig = jailbreak_signature();
    const std::vector<Example> demos = {pftest::jailbreak_example("d", true)};
    const auto first = render_prompt(sig, demos, {{"question", "hi"}});
    const auto second = render_prompt(sig, demos, {{"question", "hi"}});
    REQUIRE(first.size() == second.size());
    for (size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].role == second[i].role);
        CHECK(first[i].content == second[i].content);
    }
}

TEST_CASE("render_prompt rejects missing inputs and incomplete demos") {
    const Signature sig = jailbreak_signature();
    check_error(Errc::MissingInput, [&] { render_prompt(sig, {}, {}); });
    Example incomplete;
    incomplete.values["question"] = "q";
    incomplete.input_keys.insert("question");
    check_error(Errc::IncompleteDemo,
                [&] { render_prompt(sig, {incomplete}, {{"question", "hi"}}); });
}

TEST_CASE("parse_completion handles the boolean field") {
    const Prediction prediction = parse_completion(
        jailbreak_signature(), "[[ ## is_jailbreak ## ]]\nTrue\n[[ ## completed ## ]]");
    REQUIRE(prediction.parse_ok);
    CHECK(std::get<bool>(*prediction.find("is_jailbreak")) == true);
    CHECK(prediction.raw_text.find("True") != std::string::npos);
}

TEST_CASE("parse_completion is case-insensitive for booleans only") {
    const Prediction lower = parse_completion(
        jailbreak_signature(), "[[ ## is_jailbreak ## ]]\ntrue\n[[ ## completed ## ]]");
    REQUIRE(lower.parse_ok);
    CHECK(std::get<bool>(*lower.find("is_jailbreak")) == true);
}

TEST_CASE("parse_completion rejects out-of-vocabulary literals") {
    const Signature sig = define_signature(
        "route", "Pick a role.",
        {input_field("conversation"), literal_output_field("selected_role", {"Writer", "Executor"})});
    const Prediction bad =
        parse_completion(sig, completion({{"selected_role", "Gardener"}}));
    CHECK_FALSE(bad.parse_ok);
    const Prediction good =
        parse_completion(sig, completion({{"selected_role", "Writer"}}));
    REQUIRE(good.parse_ok);
    CHECK(std::get<LiteralValue>(*good.find("selected_role")).value == "Writer");
}

TEST_CASE("parse_completion parses decimal floats") {
    const Signature sig = define_signature(
        "score", "Score it.", {input_field("prompt"), output_field("score", ValueKind::Float)});
    const Prediction prediction = parse_completion(sig, completion({{"score", "0.75"}}));
    REQUIRE(prediction.parse_ok);
    CHECK(std::get<double>(*prediction.find("score")) == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("parse_completion keeps partial values on failure") {
    const Signature sig = define_signature(
        "two", "Emit two.",
        {input_field("x"), output_field("a", ValueKind::Boolean), output_field("b", ValueKind::Float)});
    const Prediction prediction =
        parse_completion(sig, "[[ ## a ## ]]\nTrue\n[[ ## completed ## ]]");
    CHECK_FALSE(prediction.parse_ok);
    REQUIRE(prediction.find("a"));
    CHECK(std::get<bool>(*prediction.find("a")) == true);
    CHECK(prediction.find("b") == nullptr);
}

TEST_CASE("parse_completion of plain garbage fails but preserves raw text") {
    const Prediction prediction = parse_completion(jailbreak_signature(), "no markers here");
    CHECK_FALSE(prediction.parse_ok);
    CHECK(prediction.raw_text == "no markers here");
}

// Randomized render/parse inverse: the assistant-side output block must parse
// back to the exact values (floats within 1e-9).
TEST_CASE("render and parse are inverse over randomized signatures") {
    Rng rng(20240817);
    const std::vector<std::string> names = {"alpha", "beta",  "gamma", "delta",
                                            "omega", "sigma", "kappa", "theta"};
    const std::vector<std::string> words = {"red", "green", "blue", "umber", "teal", "plum"};

    for (int round = 0; round < 500; ++round) {
        std::vector<std::string> pool = names;
        rng.shuffle(pool);
        size_t cursor = 0;

        std::vector<FieldSpec> fields;
        fields.push_back(input_field(pool[cursor++]));
        const int output_count = 1 + static_cast<int>(rng.below(4));
        for (int i = 0; i < output_count; ++i) {
            const std::string name = pool[cursor++];
            switch (rng.below(4)) {
                case 0: fields.push_back(output_field(name, ValueKind::Text)); break;
                case 1: fields.push_back(output_field(name, ValueKind::Boolean)); break;
                case 2: fields.push_back(output_field(name, ValueKind::Float)); break;
                default: {
                    std::vector<std::string> choices = words;
                    rng.shuffle(choices);
                    choices.resize(2 + rng.below(3));
                    fields.push_back(literal_output_field(name, choices));
                }
            }
        }
        const Signature sig = define_signature("prop", "Do the task.", fields);

        Example demo;
        demo.values[sig.inputs()[0]->name] = "input value";
        demo.input_keys.insert(sig.inputs()[0]->name);
        std::map<std::string, FieldValue> expected;
        for (const auto* field : sig.outputs()) {
            FieldValue value;
            switch (field->type) {
                case ValueKind::Text: {
                    std::string text = words[rng.below(words.size())] + " " +
                                       words[rng.below(words.size())];
                    value = text;
                    break;
                }
                case ValueKind::Boolean: value = rng.below(2) == 0; break;
                case ValueKind::Float:
                    value = (rng.unit() - 0.5) * 2000.0;
                    break;
                case ValueKind::Literal:
                    value = LiteralValue{field->choices[rng.below(field->choices.size())]};
                    break;
            }
            expected[field->name] = value;
            demo.values[field->name] = value_to_string(value);
        }

        const std::string block = render_output_block(sig, demo);
        const Prediction parsed = parse_completion(sig, block);
        REQUIRE(parsed.parse_ok);
        for (const auto& [name, value] : expected) {
            REQUIRE(parsed.find(name));
            const FieldValue& got = *parsed.find(name);
            if (const auto* num = std::get_if<double>(&value)) {
                CHECK(std::abs(std::get<double>(got) - *num) <= 1e-9);
            } else {
                CHECK(got == value);
            }
        }
    }
}

TEST_CASE("adapter markers must be distinct and non-empty") {
    AdapterConfig broken;
    broken.field_open_marker = "";
    check_error(Errc::InvalidArgument, [&] { broken.validate(); });
    AdapterConfig same;
    same.field_close_marker = same.field_open_marker;
    check_error(Errc::InvalidArgument, [&] { same.validate(); });
}

TEST_SUITE_END();
