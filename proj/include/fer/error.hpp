#pragma once

#include <stdexcept>
#include <string>

namespace fer {

/// Error families. Each maps to a distinct CLI exit code.
enum class ErrorKind {
    InvalidInput,
    Io,
    Ingest,
    NormalizationFailure,
    TrainingFailure,
    Construction,
    Connectivity,
    Numeric,
    Bundle,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Io: return "io";
    case ErrorKind::Ingest: return "ingest";
    case ErrorKind::NormalizationFailure: return "normalization-failure";
    case ErrorKind::TrainingFailure: return "training-failure";
    case ErrorKind::Construction: return "construction-failure";
    case ErrorKind::Connectivity: return "connectivity";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Bundle: return "bundle";
    }
    return "unknown";
}

inline int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidInput: return 3;
    case ErrorKind::Io: return 4;
    case ErrorKind::Ingest: return 5;
    case ErrorKind::NormalizationFailure: return 6;
    case ErrorKind::TrainingFailure: return 7;
    case ErrorKind::Construction: return 8;
    case ErrorKind::Connectivity: return 8;
    case ErrorKind::Numeric: return 9;
    case ErrorKind::Bundle: return 10;
    }
    return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline void require(bool cond, const std::string& what) {
    if (!cond) {
        throw Error(ErrorKind::InvalidInput, what);
    }
}

}  // namespace fer
