#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace densitrace {

enum class ErrorKind {
    MissingFile,
    MalformedContainer,
    MissingTensor,
    ShapeMismatch,
    NonFiniteWeight,
    InvalidConfig,
    InputTooShort,
    InputTooLong,
    InvalidToken,
    InvalidP,
    UnknownEdge,
    SizeInfeasible,
    TraceMismatch,
    ResidualAblationForbidden,
    VocabMismatch,
    DegenerateVariance,
    ParseError,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. what() is prefixed with the kind name
/// ("ShapeMismatch: layers.0.attn.wq ...") so CLI output stays greppable.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& detail);

}  // namespace densitrace
