#pragma once

#include <stdexcept>
#include <string>

namespace chelsea {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Violated call contract: dimension mismatch, empty inputs, invalid ranges.
struct ContractError : Error {
    using Error::Error;
};

// Invalid tunables: ratios out of range, budget smaller than the protected
// regions, infeasible head reallocation.
struct ConfigError : Error {
    using Error::Error;
};

// Compression cannot reach the budget (e.g. the ratio schedule decayed to
// zero while the cache is still over budget).
struct ConvergenceError : Error {
    using Error::Error;
};

// Tensor file parsing, with the failure class kept machine-readable.
struct TensorIoError : Error {
    enum class Kind { open_failed, bad_magic, bad_version, size_mismatch, short_read, bad_payload };

    TensorIoError(Kind k, const std::string& msg) : Error(msg), kind(k) {}

    Kind kind;
};

}  // namespace chelsea
