// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace attrag {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

using DeltaCallback = std::function<void(std::string_view delta)>;

/// Text generation backend. Implementations must tolerate concurrent calls.
///
/// Failures are reported as attrag::Error with kLlmUnavailable or
/// kProviderTimeout.
class LlmProvider {
  public:
    virtual ~LlmProvider() = default;

    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;

    /// Streams the completion as deltas and returns the concatenation. The
    /// default emits the whole completion as a single delta.
    virtual std::string stream(const std::vector<ChatMessage>& messages, const DeltaCallback& on_delta) {
        std::string text = complete(messages);
        if (on_delta && !text.empty()) on_delta(text);
        return text;
    }

    virtual std::string name() const = 0;
};

/// Sentence/passage embedding backend. Implementations must tolerate
/// concurrent calls. Failures are reported as kEmbedderUnavailable.
class Embedder {
  public:
    virtual ~Embedder() = default;

    virtual std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) = 0;

    virtual std::size_t dims() const = 0;

    virtual std::string name() const = 0;
};

/// L2-normalizes in place; zero vectors are left untouched.
void l2_normalize(std::vector<float>& v);

/// Cosine similarity computed in double precision.
double cosine(const std::vector<float>& a, const std::vector<float>& b);

}  // namespace attrag
