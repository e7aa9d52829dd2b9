#include "promptforge/errors.hpp"

namespace promptforge {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::DuplicateField: return "DuplicateField";
        case Errc::NoInputField: return "NoInputField";
        case Errc::NoOutputField: return "NoOutputField";
        case Errc::EmptyInstruction: return "EmptyInstruction";
        case Errc::InvalidField: return "InvalidField";
        case Errc::MissingInput: return "MissingInput";
        case Errc::IncompleteDemo: return "IncompleteDemo";
        case Errc::TransportError: return "TransportError";
        case Errc::ProviderError: return "ProviderError";
        case Errc::ContentFiltered: return "ContentFiltered";
        case Errc::ReplayMiss: return "ReplayMiss";
        case Errc::MissingGroundTruth: return "MissingGroundTruth";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::ScoreOutOfRange: return "ScoreOutOfRange";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::EmptyDataset: return "EmptyDataset";
        case Errc::MetricSignatureMismatch: return "MetricSignatureMismatch";
        case Errc::BatchMisconfigured: return "BatchMisconfigured";
        case Errc::InsufficientData: return "InsufficientData";
        case Errc::NoSuccessfulTraces: return "NoSuccessfulTraces";
        case Errc::EmptyProposal: return "EmptyProposal";
        case Errc::ProposalFailure: return "ProposalFailure";
        case Errc::FileNotFound: return "FileNotFound";
        case Errc::MissingColumn: return "MissingColumn";
        case Errc::ParseError: return "ParseError";
        case Errc::SingleClass: return "SingleClass";
        case Errc::EmptyKindList: return "EmptyKindList";
        case Errc::IoError: return "IoError";
        case Errc::SchemaVersionMismatch: return "SchemaVersionMismatch";
        case Errc::InvariantViolation: return "InvariantViolation";
        case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Error";
}

}  // namespace promptforge
