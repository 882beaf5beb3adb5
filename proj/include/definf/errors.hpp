#pragma once

#include <stdexcept>
#include <string>

namespace definf {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed linearized graph text. `what()` carries the violation in the
// form "MissingRole(H-)", "DuplicateRole(S)", "UnknownTag([X])" or
// "EmptyLabel(C+)".
struct ParseError : Error {
  using Error::Error;
};

// Parallel corpora whose lengths disagree.
struct AlignmentError : Error {
  using Error::Error;
};

// Operand shapes do not conform.
struct ShapeError : Error {
  using Error::Error;
};

// A probability vector that does not sum to one.
struct NotNormalized : Error {
  using Error::Error;
};

// NaN or infinity where a finite value is required.
struct NonFiniteError : Error {
  using Error::Error;
};

// Every node of a graph normalized to an empty token multiset.
struct DegenerateLabels : Error {
  using Error::Error;
};

// Metric asked of an empty corpus, or too few samples for a statistic.
struct InsufficientData : Error {
  using Error::Error;
};

// Embedding table problems: bad dimension or a lookup miss.
struct EmbeddingError : Error {
  using Error::Error;
};

// Unreadable, truncated or wrong-version checkpoint files.
struct CheckpointError : Error {
  using Error::Error;
};

// A pluggable corrector raised; wrapped and propagated by the driver.
struct CorrectorFailure : Error {
  using Error::Error;
};

// File-level input problems with line information where available.
struct DataError : Error {
  using Error::Error;
};

}  // namespace definf
