// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/error.hpp"

namespace driftdiff {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnreadableSource: return "UnreadableSource";
        case ErrorCode::RaggedRow: return "RaggedRow";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DuplicateColumn: return "DuplicateColumn";
        case ErrorCode::QueryFailed: return "QueryFailed";
        case ErrorCode::NonReadOnlyQuery: return "NonReadOnlyQuery";
        case ErrorCode::ConflictingOverrides: return "ConflictingOverrides";
        case ErrorCode::UnknownColumn: return "UnknownColumn";
        case ErrorCode::DuplicateKey: return "DuplicateKey";
        case ErrorCode::KeyNotMapped: return "KeyNotMapped";
        case ErrorCode::IncomparableProfiles: return "IncomparableProfiles";
        case ErrorCode::NoValidCandidates: return "NoValidCandidates";
        case ErrorCode::ClientUnavailable: return "ClientUnavailable";
        case ErrorCode::MissingBatch: return "MissingBatch";
        case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
        case ErrorCode::SeedMismatch: return "SeedMismatch";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::StageFailed: return "StageFailed";
    }
    return "Unknown";
}

} // namespace driftdiff
