#include <doctest.h>

#include "promptforge/predictors.hpp"
#include "promptforge/rng.hpp"
#include "test_support.hpp"

using namespace promptforge;
using pftest::bool_completion;
using pftest::completion;
using pftest::jailbreak_program;

namespace {

Prediction bool_prediction(bool value, bool ok = true) {
    Prediction prediction;
    prediction.parse_ok = ok;
    if (ok) prediction.values.emplace("is_jailbreak", value);
    return prediction;
}

}  // namespace

TEST_SUITE_BEGIN("predictors");

TEST_CASE("predict forwards, completes once, and parses") {
    ScriptedBackend backend({}, bool_completion("is_jailbreak", true));
    const auto result = forward(jailbreak_program(), {{"question", "hi"}}, backend);
    REQUIRE(result.prediction.parse_ok);
    CHECK(std::get<bool>(*result.prediction.find("is_jailbreak")) == true);
    CHECK_FALSE(result.prediction.reasoning.has_value());
    CHECK_FALSE(result.trace.not_answered);
}

TEST_CASE("chain_of_thought exposes reasoning next to the declared outputs") {
    ScriptedBackend backend({}, completion({{"reasoning", "It asks for harm step by step."},
                                            {"is_jailbreak", "True"}}));
    const auto result =
        forward(jailbreak_program(ModuleKind::ChainOfThought), {{"question", "hi"}}, backend);
    REQUIRE(result.prediction.parse_ok);
    REQUIRE(result.prediction.reasoning.has_value());
    CHECK(*result.prediction.reasoning == "It asks for harm step by step.");
    CHECK(std::get<bool>(*result.prediction.find("is_jailbreak")) == true);
    // reasoning never joins the user-declared output set
    CHECK(result.prediction.values.size() == 1);
    // and the prompt advertises the reasoning field first
    CHECK(result.trace.messages[0].content.find("reasoning") != std::string::npos);
}

TEST_CASE("chain_of_thought without a reasoning block fails parsing") {
    ScriptedBackend backend({}, bool_completion("is_jailbreak", true));
    const auto result =
        forward(jailbreak_program(ModuleKind::ChainOfThought), {{"question", "hi"}}, backend);
    CHECK_FALSE(result.prediction.parse_ok);
}

TEST_CASE("majority vote aggregates five generations") {
    const std::vector<std::string> generations = {
        bool_completion("is_jailbreak", true), bool_completion("is_jailbreak", true),
        bool_completion("is_jailbreak", false), bool_completion("is_jailbreak", true),
        bool_completion("is_jailbreak", false)};

    ProgramModule program = jailbreak_program(ModuleKind::MajorityVote);
    program.vote_n = 5;

    SUBCASE("single batched request") {
        ScriptedBackend backend({{"question", generations, std::nullopt}}, "x");
        const auto result = forward(program, {{"question", "hi"}}, backend);
        REQUIRE(result.prediction.parse_ok);
        CHECK(std::get<bool>(*result.prediction.find("is_jailbreak")) == true);
    }
    SUBCASE("one request per generation") {
        ScriptedBackend backend({{"question", generations, std::nullopt}}, "x", false);
        const auto result = forward(program, {{"question", "hi"}}, backend);
        REQUIRE(result.prediction.parse_ok);
        CHECK(std::get<bool>(*result.prediction.find("is_jailbreak")) == true);
    }
}

TEST_CASE("majority_vote_select counts the most frequent value") {
    CHECK(std::get<bool>(*majority_vote_select({bool_prediction(false), bool_prediction(false),
                                                bool_prediction(true)},
                                               "is_jailbreak")
                              .find("is_jailbreak")) == false);
}

TEST_CASE("majority_vote_select breaks ties by earliest occurrence") {
    const Prediction tie_true = majority_vote_select(
        {bool_prediction(true), bool_prediction(false)}, "is_jailbreak");
    CHECK(std::get<bool>(*tie_true.find("is_jailbreak")) == true);
    const Prediction tie_false = majority_vote_select(
        {bool_prediction(false), bool_prediction(true)}, "is_jailbreak");
    CHECK(std::get<bool>(*tie_false.find("is_jailbreak")) == false);
}

TEST_CASE("majority_vote_select over only unparsed members fails softly") {
    const Prediction aggregate = majority_vote_select(
        {bool_prediction(false, false), bool_prediction(true, false)}, "is_jailbreak");
    CHECK_FALSE(aggregate.parse_ok);
}

TEST_CASE("majority_vote_select drops unparsed members before counting") {
    const Prediction aggregate = majority_vote_select(
        {bool_prediction(false, false), bool_prediction(true), bool_prediction(false, false)},
        "is_jailbreak");
    REQUIRE(aggregate.parse_ok);
    CHECK(std::get<bool>(*aggregate.find("is_jailbreak")) == true);
}

TEST_CASE("majority_vote_select rejects empty input") {
    CHECK_THROWS_AS(majority_vote_select({}, "is_jailbreak"), Error);
}

TEST_CASE("strict majorities are permutation invariant") {
    Rng rng(7);
    std::vector<Prediction> votes = {bool_prediction(true), bool_prediction(true),
                                     bool_prediction(true), bool_prediction(false),
                                     bool_prediction(false)};
    for (int round = 0; round < 50; ++round) {
        rng.shuffle(votes);
        CHECK(std::get<bool>(*majority_vote_select(votes, "is_jailbreak").find("is_jailbreak")) ==
              true);
    }
}

TEST_CASE("vote_n=1 majority vote equals predict on the same script") {
    ScriptedBackend backend({}, bool_completion("is_jailbreak", false));
    ProgramModule voting = jailbreak_program(ModuleKind::MajorityVote);
    voting.vote_n = 1;
    const auto voted = forward(voting, {{"question", "hi"}}, backend);
    const auto predicted = forward(jailbreak_program(), {{"question", "hi"}}, backend);
    REQUIRE(voted.prediction.parse_ok);
    REQUIRE(predicted.prediction.parse_ok);
    CHECK(*voted.prediction.find("is_jailbreak") == *predicted.prediction.find("is_jailbreak"));
}

TEST_CASE("trace fingerprints re-derive from recorded messages and params") {
    ScriptedBackend backend({}, bool_completion("is_jailbreak", true));
    const ProgramModule program = jailbreak_program();
    const auto result = forward(program, {{"question", "hi"}}, backend);
    CHECK(result.trace.fingerprint == request_fingerprint(result.trace.messages, program.params));
}

TEST_CASE("content filtering yields a not_answered trace, not an exception") {
    ScriptedBackend backend(
        {{"question", {}, BackendError{BackendErrorKind::ContentFiltered, "policy"}}}, "x");
    const auto result = forward(jailbreak_program(), {{"question", "hi"}}, backend);
    CHECK(result.trace.not_answered);
    CHECK_FALSE(result.prediction.parse_ok);
}

TEST_CASE("transport errors propagate") {
    ScriptedBackend backend(
        {{"question", {}, BackendError{BackendErrorKind::Transport, "down"}}}, "x");
    try {
        forward(jailbreak_program(), {{"question", "hi"}}, backend);
        FAIL_CHECK("expected TransportError");
    } catch (const Error& error) {
        CHECK(error.code() == Errc::TransportError);
    }
}

TEST_CASE("forward rejects missing inputs") {
    ScriptedBackend backend({}, "x");
    CHECK_THROWS_AS(forward(jailbreak_program(), {}, backend), Error);
}

TEST_SUITE_END();
