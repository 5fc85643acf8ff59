// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "attrag/providers.hpp"

// Offline providers. They back the "mock" and "hashing" configuration
// choices, the test suites, and the no-network CLI path.
namespace attrag {

/// Feature-hashing bag-of-words embedder: deterministic, no model needed.
class HashingEmbedder : public Embedder {
  public:
    explicit HashingEmbedder(std::size_t dims = 256) : dims_(dims) {}

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override;
    std::size_t dims() const override { return dims_; }
    std::string name() const override { return "hashing"; }

    std::vector<float> embed_one(const std::string& text) const;

  private:
    std::size_t dims_;
};

/// Wraps another embedder with call counting, fault injection and an
/// optional per-call delay.
class InstrumentedEmbedder : public Embedder {
  public:
    explicit InstrumentedEmbedder(Embedder& inner) : inner_(inner) {}

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override;
    std::size_t dims() const override { return inner_.dims(); }
    std::string name() const override { return inner_.name(); }

    void set_down(bool down) { down_ = down; }
    void set_delay(std::chrono::milliseconds d) { delay_ms_ = d.count(); }
    std::size_t calls() const { return calls_; }

  private:
    Embedder& inner_;
    std::atomic<bool> down_{false};
    std::atomic<std::chrono::milliseconds::rep> delay_ms_{0};
    std::atomic<std::size_t> calls_{0};
};

/// Routes on the "### task:" marker of the prompt.
///
/// Built-in behaviour per task, used when no scripted rule matches:
///   coreference          reproduces the template's worked example when the
///                        passage is the example passage, otherwise echoes it
///   usefulness           {"useful": true, "rationale": "..."}
///   query_*              []
///   answer               an extractive answer: the first context sentence as
///                        summary, then one bold section per context block
///                        listing its sentences as bullets
class ScriptedLlm : public LlmProvider {
  public:
    struct Rule {
        std::string task;      // empty matches any task
        std::string contains;  // substring the prompt must contain; empty matches
        std::string response;
    };

    ScriptedLlm() = default;

    void add_rule(Rule rule);

    /// Marks a task (or "*" for all) as failing with kLlmUnavailable.
    void set_down(const std::string& task, bool down = true);
    /// Streaming splits the response into pieces of this many bytes.
    void set_stream_piece_size(std::size_t bytes) { piece_size_ = bytes; }
    void set_delay_per_delta(std::chrono::milliseconds d) { delay_per_delta_ = d; }

    std::string complete(const std::vector<ChatMessage>& messages) override;
    std::string stream(const std::vector<ChatMessage>& messages, const DeltaCallback& on_delta) override;
    std::string name() const override { return "mock"; }

    /// Prompts seen so far, in call order.
    std::vector<std::string> calls() const;
    std::size_t call_count(const std::string& task) const;

    static std::string prompt_text(const std::vector<ChatMessage>& messages);

  private:
    std::string respond(const std::string& prompt);

    mutable std::mutex mu_;
    std::vector<Rule> rules_;
    std::set<std::string> down_;
    std::vector<std::string> calls_;
    std::size_t piece_size_ = 0;
    std::chrono::milliseconds delay_per_delta_{0};
};

/// The deterministic answer ScriptedLlm produces for an answer prompt.
std::string extractive_answer(const std::string& prompt);

}  // namespace attrag
