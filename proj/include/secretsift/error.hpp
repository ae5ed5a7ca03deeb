// Copyright 2026 The secretsift Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace secretsift {

enum class ErrorCode {
    MalformedCatalog,
    InvalidPattern,
    DuplicateId,
    RootMissing,
    IoError,
    SpanOutOfRange,
    ExemplarMismatch,
    KOutOfRange,
    InputTooLong,
    BackendUnavailable,
    UnparseableAnswer,
    EmptyModelId,
    MalformedRow,
    UnknownLabel,
    UnknownType,
    InsufficientPool,
    MissingTypeLabel,
    LengthMismatch,
    UnknownCategory,
    DomainError,
    EmptyMatrix,
    MalformedManifest,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::MalformedCatalog: return "MalformedCatalog";
    case ErrorCode::InvalidPattern: return "InvalidPattern";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::RootMissing: return "RootMissing";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SpanOutOfRange: return "SpanOutOfRange";
    case ErrorCode::ExemplarMismatch: return "ExemplarMismatch";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::InputTooLong: return "InputTooLong";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::UnparseableAnswer: return "UnparseableAnswer";
    case ErrorCode::EmptyModelId: return "EmptyModelId";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::InsufficientPool: return "InsufficientPool";
    case ErrorCode::MissingTypeLabel: return "MissingTypeLabel";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::MalformedManifest: return "MalformedManifest";
    }
    return "Unknown";
}

/// The single exception type thrown by the library. `code()` identifies the
/// failure; `detail()` carries an optional payload (for example the raw model
/// response behind an UnparseableAnswer).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string detail = {})
        : std::runtime_error(std::string(to_string(code)) + ": " + message)
        , code_(code)
        , detail_(std::move(detail))
    {
    }

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

} // namespace secretsift
