// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "attrag/chunking.hpp"
#include "attrag/citation.hpp"
#include "attrag/generation.hpp"
#include "attrag/indexing.hpp"
#include "attrag/query.hpp"
#include "attrag/retrieval.hpp"

namespace attrag {

/// Everything a question needs from one built corpus. Immutable once
/// constructed, so it is shared between concurrent turns.
struct CorpusSnapshot {
    std::map<std::string, Document> documents;
    std::map<std::string, Chunk> chunks;
    SparseIndex sparse;
    std::optional<DenseIndex> dense;

    const Document* document(std::string_view id) const;
    const Chunk* chunk(std::string_view id) const;
    DocumentLookup lookup() const;
};

struct BuildOptions {
    ChunkConfig chunking;
    bool decontextualize = true;
    std::size_t embed_batch = 64;
};

/// Chunks, decontextualizes and indexes `docs`. `embedder` is required for
/// semantic chunking and enables the dense index; `llm` may be null.
std::shared_ptr<const CorpusSnapshot> build_snapshot(const std::vector<Document>& docs, const BuildOptions& options,
                                                     Embedder* embedder, LlmProvider* llm);

/// Rebuilds a snapshot from stored documents, chunks and loaded indexes.
/// Throws kIndexMismatch when the indexes were built over other chunks.
std::shared_ptr<const CorpusSnapshot> assemble_snapshot(std::vector<Document> docs, std::vector<Chunk> chunks,
                                                        LoadedIndexes indexes);

enum class Stage { kQueryUnderstanding, kRetrieval, kUtility, kGeneration, kCitation, kError };

std::string_view stage_name(Stage s);

struct TraceEvent {
    std::size_t sequence = 0;  // 1-based, strictly increasing within a turn
    Stage stage = Stage::kQueryUnderstanding;
    std::string timestamp;
    nlohmann::json payload;

    nlohmann::json to_json() const;
    /// "event: <stage>\ndata: <json>\n\n"
    std::string to_sse() const;
};

struct PipelineConfig {
    std::set<RewriteKind> rewrite_modes;
    MultipathParams retrieval;
    bool use_dense = true;
    bool judge = true;
    std::size_t max_evidence_sentences = 4;
    bool embedding_evidence_scorer = false;  // lexical overlap otherwise
    std::size_t prompt_budget = kDefaultPromptBudget;
    CitationOptions citation;
    bool stream = true;
    std::chrono::milliseconds generation_timeout{0};
};

struct PipelineProviders {
    LlmProvider* rewriter = nullptr;
    LlmProvider* judger = nullptr;
    LlmProvider* generator = nullptr;
    Embedder* embedder = nullptr;
};

using Clock = std::function<std::string()>;
using EventSink = std::function<void(const TraceEvent&)>;

struct TurnOutcome {
    bool ok = false;
    nlohmann::json answer;  // annotated answer on success
    std::string error_code;
    std::string error_message;
    std::vector<RetrievalHit> hits;
    std::vector<TraceEvent> events;
};

/// The answer used when nothing relevant survives retrieval and judging.
inline constexpr std::string_view kInsufficientAnswer =
    "The provided documents do not contain enough information to answer this question.";

/// Runs one question through every stage, emitting events as they happen.
/// Provider failures end the turn with an "error" event instead of
/// throwing; only kEmptyQuery is thrown, before any event.
TurnOutcome run_turn(std::string_view query, const std::vector<ChatMessage>& history, const CorpusSnapshot& corpus,
                     const PipelineProviders& providers, const PipelineConfig& config, const Clock& clock,
                     const EventSink& sink);

/// ISO-8601 UTC timestamp with millisecond precision.
std::string utc_now_iso();

}  // namespace attrag
