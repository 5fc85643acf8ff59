// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace attrag {

enum class ErrorCode {
    kUndecodableInput,
    kMalformedJson,
    kEmptyDocument,
    kUnsupportedFormat,
    kInvalidChunkParams,
    kEmbedderUnavailable,
    kLlmUnavailable,
    kProviderTimeout,
    kEmptyCorpus,
    kDimensionMismatch,
    kIoFailure,
    kCorruptIndex,
    kVersionMismatch,
    kIndexMismatch,
    kEmptyQuery,
    kEmptyEvidence,
    kCorpusNotFound,
    kCorpusBusy,
    kCorpusNotReady,
    kConversationNotFound,
    kInvalidArgument,
};

/// Stable wire name, e.g. "CorpusBusy".
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace attrag
