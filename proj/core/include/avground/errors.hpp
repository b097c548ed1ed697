#pragma once

#include <stdexcept>
#include <string>

namespace avground {

/// Malformed input file or record; the CLI maps this to exit code 2.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ZeroVector : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct OutOfVocabulary : std::runtime_error {
    explicit OutOfVocabulary(const std::string& name)
        : std::runtime_error("no embedding for name: \"" + name + "\""), name(name) {}
    std::string name;
};

struct GroupTooSmall : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonFiniteGradient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyDenominator : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DuplicateQaId : SchemaError {
    explicit DuplicateQaId(const std::string& qa_id)
        : SchemaError("duplicate qa_id: \"" + qa_id + "\"") {}
};

struct UnknownQaId : SchemaError {
    explicit UnknownQaId(const std::string& qa_id)
        : SchemaError("prediction for unknown qa_id: \"" + qa_id + "\"") {}
};

struct NonPositiveDuration : SchemaError {
    using SchemaError::SchemaError;
};

struct InvalidScore : SchemaError {
    using SchemaError::SchemaError;
};

}  // namespace avground
