#pragma once

#include <stdexcept>
#include <string>

namespace actclust {

// Failure taxonomy. The CLI maps these onto process exit codes:
// ConfigError -> 1 (usage), FormatError/DataError/ShapeError/IndexError -> 2,
// NumericError -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor / matrix dimension mismatches.
struct ShapeError : Error {
    using Error::Error;
};

// Malformed files: bad magic, wrong version, truncated payloads.
struct FormatError : Error {
    using Error::Error;
};

// Invalid configuration values (k < 2, top_k <= 0, ...).
struct ConfigError : Error {
    using Error::Error;
};

// API misuse, e.g. backprop without a cached forward pass.
struct StateError : Error {
    using Error::Error;
};

// Out-of-range labels or layer indices.
struct IndexError : Error {
    using Error::Error;
};

// Numeric failures: diverged training, degenerate inputs or clusters.
struct NumericError : Error {
    using Error::Error;
};

// Missing or inconsistent pipeline artifacts.
struct DataError : Error {
    using Error::Error;
};

}  // namespace actclust
