#include "densitrace/errors.hpp"

namespace densitrace {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MissingFile: return "MissingFile";
        case ErrorKind::MalformedContainer: return "MalformedContainer";
        case ErrorKind::MissingTensor: return "MissingTensor";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::NonFiniteWeight: return "NonFiniteWeight";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::InputTooShort: return "InputTooShort";
        case ErrorKind::InputTooLong: return "InputTooLong";
        case ErrorKind::InvalidToken: return "InvalidToken";
        case ErrorKind::InvalidP: return "InvalidP";
        case ErrorKind::UnknownEdge: return "UnknownEdge";
        case ErrorKind::SizeInfeasible: return "SizeInfeasible";
        case ErrorKind::TraceMismatch: return "TraceMismatch";
        case ErrorKind::ResidualAblationForbidden: return "ResidualAblationForbidden";
        case ErrorKind::VocabMismatch: return "VocabMismatch";
        case ErrorKind::DegenerateVariance: return "DegenerateVariance";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Error";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind), detail_(detail) {}

void fail(ErrorKind kind, const std::string& detail) { throw Error(kind, detail); }

}  // namespace densitrace
