// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string>

#include "attrag/providers.hpp"

namespace attrag {

struct HttpProviderConfig {
    std::string base_url;  // scheme://host[:port]
    std::string path;      // request path, e.g. "/v1/chat/completions"
    std::string model;
    std::string api_key;   // sent as "Authorization: Bearer <key>" when set
    std::chrono::seconds timeout{60};
};

/// JSON-over-HTTP chat backend.
///
/// Request:  {"model", "messages": [{"role", "content"}], "stream"}
/// Response: {"content"} or, when streaming, server-sent events carrying
///           {"delta"}; the OpenAI-style "choices" shapes are accepted too.
class HttpLlm : public LlmProvider {
  public:
    explicit HttpLlm(HttpProviderConfig config);

    std::string complete(const std::vector<ChatMessage>& messages) override;
    std::string stream(const std::vector<ChatMessage>& messages, const DeltaCallback& on_delta) override;
    std::string name() const override { return "http:" + config_.model; }

  private:
    HttpProviderConfig config_;
};

/// Request {"model", "input": [string]}; response {"vectors": [[real]]} or
/// the OpenAI-style {"data": [{"embedding"}]}.
class HttpEmbedder : public Embedder {
  public:
    HttpEmbedder(HttpProviderConfig config, std::size_t dims);

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override;
    std::size_t dims() const override { return dims_; }
    std::string name() const override { return "http:" + config_.model; }

  private:
    HttpProviderConfig config_;
    std::size_t dims_;
};

}  // namespace attrag
