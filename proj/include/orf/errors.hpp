#pragma once

#include <stdexcept>
#include <string>

namespace orf {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid or infeasible configuration: bad hyperparameters, unsatisfiable
// chunk bounds, scenario specs with no valid bucketization.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Filesystem-level failures.
struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Malformed container payloads: bad magic, version mismatch, truncation,
// field invariant violations. A kind of I/O failure for exit-code purposes.
struct FormatError : IoError {
    explicit FormatError(const std::string& msg) : IoError(msg) {}
};

// A broken internal contract: out-of-range indices, dimension mismatches,
// structurally invalid chunkings.
struct InvariantError : Error {
    explicit InvariantError(const std::string& msg) : Error(msg) {}
};

} // namespace orf
