// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/error.hpp"

namespace attrag {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::kUndecodableInput: return "UndecodableInput";
        case ErrorCode::kMalformedJson: return "MalformedJson";
        case ErrorCode::kEmptyDocument: return "EmptyDocument";
        case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::kInvalidChunkParams: return "InvalidChunkParams";
        case ErrorCode::kEmbedderUnavailable: return "EmbedderUnavailable";
        case ErrorCode::kLlmUnavailable: return "LlmUnavailable";
        case ErrorCode::kProviderTimeout: return "ProviderTimeout";
        case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
        case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
        case ErrorCode::kIoFailure: return "IoFailure";
        case ErrorCode::kCorruptIndex: return "CorruptIndex";
        case ErrorCode::kVersionMismatch: return "VersionMismatch";
        case ErrorCode::kIndexMismatch: return "IndexMismatch";
        case ErrorCode::kEmptyQuery: return "EmptyQuery";
        case ErrorCode::kEmptyEvidence: return "EmptyEvidence";
        case ErrorCode::kCorpusNotFound: return "CorpusNotFound";
        case ErrorCode::kCorpusBusy: return "CorpusBusy";
        case ErrorCode::kCorpusNotReady: return "CorpusNotReady";
        case ErrorCode::kConversationNotFound: return "ConversationNotFound";
        case ErrorCode::kInvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace attrag
