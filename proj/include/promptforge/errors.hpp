#pragma once

#include <stdexcept>
#include <string>

namespace promptforge {

// Every failure the library reports deliberately, identified by code so
// callers (and tests) can switch on the cause instead of parsing messages.
enum class Errc {
    // signature validation
    DuplicateField,
    NoInputField,
    NoOutputField,
    EmptyInstruction,
    InvalidField,
    // prompt rendering
    MissingInput,
    IncompleteDemo,
    // backends
    TransportError,
    ProviderError,
    ContentFiltered,
    ReplayMiss,
    // metrics
    MissingGroundTruth,
    LengthMismatch,
    ScoreOutOfRange,
    OutOfRange,
    EmptyInput,
    // evaluation harness
    EmptyDataset,
    MetricSignatureMismatch,
    BatchMisconfigured,
    // optimizers
    InsufficientData,
    NoSuccessfulTraces,
    EmptyProposal,
    ProposalFailure,
    // datasets
    FileNotFound,
    MissingColumn,
    ParseError,
    SingleClass,
    EmptyKindList,
    // artifacts
    IoError,
    SchemaVersionMismatch,
    InvariantViolation,
    // everything else
    InvalidArgument,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& detail) {
    throw Error(code, detail);
}

}  // namespace promptforge
