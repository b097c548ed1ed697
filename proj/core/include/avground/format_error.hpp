#pragma once

#include <string>
#include <utility>
#include <variant>

namespace avground {

/// Why a piece of model output was rejected. Answer-grammar violations use
/// the first five codes; the caption-analyzer format uses the last three.
enum class FormatErrorCode {
    MissingTag,
    UnbalancedTag,
    BadNumber,
    BadBox,
    BadInterval,
    UnknownLabel,
    CountMismatch,
    NoSubjectsHeader,
};

const char* to_string(FormatErrorCode code);

struct FormatError {
    FormatErrorCode code;
    std::string detail;  // e.g. the offending tag name or token

    std::string message() const;
};

/// Result of a parse: either a value or the first format violation.
/// Parsing never throws; rewards need a total, deterministic verdict.
template <typename T>
class Parsed {
  public:
    Parsed(T value) : state_(std::move(value)) {}
    Parsed(FormatError error) : state_(std::move(error)) {}

    bool ok() const { return std::holds_alternative<T>(state_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& { return std::get<T>(state_); }
    T&& value() && { return std::get<T>(std::move(state_)); }
    const FormatError& error() const { return std::get<FormatError>(state_); }

  private:
    std::variant<T, FormatError> state_;
};

}  // namespace avground
