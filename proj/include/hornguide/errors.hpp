#pragma once

#include <stdexcept>
#include <string>

namespace hornguide {

// Error classes map onto the CLI exit codes documented in the README.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad syntax, arity mismatches, symbols outside the vocabulary.
struct MalformedInputError : Error {
    using Error::Error;
};

// A generator could not satisfy its contract (duplicate exhaustion,
// too few derived facts, anchor space exhausted, ...).
struct GenerationError : Error {
    using Error::Error;
};

struct EncodingError : Error {
    using Error::Error;
};

// Non-finite loss or other unrecoverable optimizer state.
struct TrainingError : Error {
    using Error::Error;
};

// Model applied to data from a different vocabulary or embedding.
struct VocabMismatchError : Error {
    using Error::Error;
};

// A query or other runtime input that cannot be interpreted against the KB.
struct InputError : Error {
    using Error::Error;
};

// Missing or corrupt pipeline artifact.
struct ArtifactError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Anchor classification is only defined for arity <= 2.
struct UnsupportedAnchorError : Error {
    using Error::Error;
};

}  // namespace hornguide
