// Copyright 2026 The dbmerge Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dbmerge {

enum class ErrorCode {
    MalformedDocument,
    DanglingReference,
    DuplicateTable,
    CyclicDependency,
    UnknownTable,
    UnknownColumn,
    RuleParameterError,
    ConfigValidationError,
    SealedMap,
    UnsealedMap,
    DuplicateOldKey,
    DuplicateNewKey,
    StorageError,
    PreconditionError,
    UncoveredSource,
    ConnectionError,
    AbortSignal,
    SqliteError,
    IOError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Setup-time and run-stopping failures. Per-row problems are values
/// (see RowFault) and only become an Error when the policy says abort.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(std::string(to_string(code)) + ": " + msg),
          code_(code), detail_(msg) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::DuplicateTable: return "DuplicateTable";
    case ErrorCode::CyclicDependency: return "CyclicDependency";
    case ErrorCode::UnknownTable: return "UnknownTable";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::RuleParameterError: return "RuleParameterError";
    case ErrorCode::ConfigValidationError: return "ConfigValidationError";
    case ErrorCode::SealedMap: return "SealedMap";
    case ErrorCode::UnsealedMap: return "UnsealedMap";
    case ErrorCode::DuplicateOldKey: return "DuplicateOldKey";
    case ErrorCode::DuplicateNewKey: return "DuplicateNewKey";
    case ErrorCode::StorageError: return "StorageError";
    case ErrorCode::PreconditionError: return "PreconditionError";
    case ErrorCode::UncoveredSource: return "UncoveredSource";
    case ErrorCode::ConnectionError: return "ConnectionError";
    case ErrorCode::AbortSignal: return "AbortSignal";
    case ErrorCode::SqliteError: return "SqliteError";
    case ErrorCode::IOError: return "IOError";
    }
    return "Unknown";
}

/// Why a single row was diverted. `kind` is a stable token used in
/// reports (e.g. "UnknownCode", "MissingMapping"); `detail` is free text.
struct RowFault {
    std::string kind;
    std::string detail;

    std::string describe() const {
        return detail.empty() ? kind : kind + "(" + detail + ")";
    }
    bool operator==(const RowFault&) const = default;
};

} // namespace dbmerge
