// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attrag/ingest.hpp"
#include "attrag/providers.hpp"

namespace attrag {

struct EmbeddingVector {
    std::vector<float> values;
    bool normalized = false;

    std::size_t dims() const { return values.size(); }

    bool operator==(const EmbeddingVector&) const = default;
};

/// A contiguous run of whole sentences of one document.
///
/// `text` is the original body span and is never rewritten; retrieval and
/// display use `enriched_text`, citations always point at original offsets.
struct Chunk {
    std::string id;
    std::string doc_id;
    std::size_t start = 0;  // byte offsets into Document::body
    std::size_t end = 0;
    std::size_t seq = 0;
    std::size_t first_sentence = 0;
    std::size_t sentence_count = 0;
    std::string text;
    std::string context_header;
    std::string enriched_text;
    std::optional<EmbeddingVector> embedding;
    Metadata metadata;

    bool operator==(const Chunk&) const = default;
};

enum class ChunkStrategy { kFixed, kSemantic };

std::string_view chunk_strategy_name(ChunkStrategy s);
std::optional<ChunkStrategy> parse_chunk_strategy(std::string_view name);

struct ChunkConfig {
    ChunkStrategy strategy = ChunkStrategy::kSemantic;
    std::size_t target_size = 4;  // sentences, fixed strategy
    std::size_t overlap = 0;      // sentences, fixed strategy
    double breakpoint_percentile = 90.0;
};

std::string chunk_id(std::string_view doc_id, std::size_t seq);

/// Windows of `target_size` sentences advancing by `target_size - overlap`;
/// the last window may be short. Throws kInvalidChunkParams.
std::vector<Chunk> chunk_fixed(const Document& doc, std::size_t target_size, std::size_t overlap);

/// Cosine distance between the embeddings of consecutive sentence windows
/// (sentence plus one neighbour on each side). Distances below 1e-9 are
/// reported as exactly 0.
std::vector<double> adjacent_window_distances(const Document& doc, Embedder& embedder);

/// Percentile with linear interpolation between closest ranks.
double percentile(std::vector<double> values, double p);

/// Indices i such that a boundary falls after sentence i: those whose
/// distance strictly exceeds the p-th percentile of all distances. At
/// p <= 0 the threshold is 0, so every nonzero distance splits.
std::vector<std::size_t> semantic_boundaries(const std::vector<double>& distances, double p);

/// Throws kEmbedderUnavailable when the provider fails.
std::vector<Chunk> chunk_semantic(const Document& doc, Embedder& embedder, double breakpoint_percentile);

/// Dispatches on config.strategy; `embedder` may be null only for kFixed.
std::vector<Chunk> chunk_document(const Document& doc, const ChunkConfig& config, Embedder* embedder);

/// Title followed by the heading chain enclosing `offset`, joined by " > ".
std::string context_header_at(const Document& doc, std::size_t offset);

Chunk attach_context_header(Chunk chunk, const Document& doc);

struct Decontextualized {
    std::string enriched_text;
    Metadata flags;  // "coref": applied|skipped|disabled, "dates": normalized|no_publish_date
};

/// Relative-date normalization, then an LLM coreference rewrite using up
/// to two preceding sentences as context, then the context header on top.
/// `llm` may be null; provider failures degrade to the rule-based steps.
Decontextualized decontextualize(const Chunk& chunk, const Document& doc, LlmProvider* llm);

/// Fills chunk.enriched_text and merges the decontextualization flags.
void enrich_chunk(Chunk& chunk, const Document& doc, LlmProvider* llm);

}  // namespace attrag
