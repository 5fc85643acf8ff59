// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "attrag/ingest.hpp"
#include "attrag/providers.hpp"
#include "attrag/retrieval.hpp"

namespace attrag {

/// Evidence from one document, rendered as "[n] Title" plus "- sentence" lines.
struct ContextBlock {
    std::size_t id = 1;
    std::string doc_id;
    std::string title;
    std::vector<EvidenceSpan> sentences;  // document order

    std::string render() const;
};

struct Prompt {
    std::string system;
    std::vector<ContextBlock> blocks;
    std::string user_query;
    std::vector<ChatMessage> history;

    /// The context section exactly as sent; its length is what the budget
    /// bounds.
    std::string rendered_context() const;
    std::vector<ChatMessage> messages() const;
};

using DocumentLookup = std::function<const Document*(std::string_view doc_id)>;

inline constexpr std::size_t kDefaultPromptBudget = 6000;

/// Groups evidence (given in fused-rank order) into one block per document,
/// numbered by first appearance. Over budget, whole blocks are dropped from
/// the tail; if block 1 alone is over, its sentences are dropped from the
/// end, keeping at least one. Throws kEmptyEvidence for no evidence.
Prompt assemble_prompt(std::string_view query, const std::vector<EvidenceSpan>& evidence,
                       const DocumentLookup& docs, const std::vector<ChatMessage>& history,
                       std::size_t budget_chars = kDefaultPromptBudget);

struct GenerateOptions {
    bool stream = false;
    DeltaCallback on_delta;  // streaming only
    std::chrono::milliseconds timeout{0};  // 0 disables the deadline
};

/// Calls the provider. Streamed deltas are forwarded as they arrive; once the
/// deadline passes further deltas are suppressed and kProviderTimeout is
/// thrown, discarding the partial text.
std::string generate(const Prompt& prompt, LlmProvider& llm, const GenerateOptions& options = {});

enum class SentenceKind { kSummary, kHeading, kContent };

std::string_view sentence_kind_name(SentenceKind k);

struct AnswerSentence {
    std::string text;       // inline emphasis markers removed
    std::size_t index = 0;  // global ordinal
    SentenceKind kind = SentenceKind::kContent;
    bool opinion_bearing = false;
    std::size_t raw_start = 0;  // byte range in StructuredAnswer::raw
    std::size_t raw_end = 0;

    bool operator==(const AnswerSentence&) const = default;
};

struct AnswerSection {
    std::optional<std::size_t> heading;  // index into sentences; absent when untitled
    std::vector<std::size_t> body;       // indexes into sentences

    bool operator==(const AnswerSection&) const = default;
};

struct StructuredAnswer {
    std::string raw;
    std::vector<AnswerSentence> sentences;  // in raw order
    std::vector<std::size_t> summary;       // indexes into sentences
    std::vector<AnswerSection> sections;

    std::string summary_text() const;
    std::string heading_text(const AnswerSection& s) const;

    bool operator==(const StructuredAnswer&) const = default;
};

/// Paragraphs before the first heading form the summary; each markdown
/// heading or whole-line bold text opens a section. Without any heading,
/// everything is one untitled section. Never throws.
StructuredAnswer parse_structured_answer(std::string_view raw);

/// Canonical markdown rendering: summary paragraph, "**heading**" lines and
/// "- sentence" bullets.
std::string render_markdown(const StructuredAnswer& answer);

/// True for sentences that assert something needing support: at least one
/// content word and not a purely structural phrase.
bool is_opinion_bearing(std::string_view sentence);

nlohmann::json to_json(const Prompt& prompt);

}  // namespace attrag
