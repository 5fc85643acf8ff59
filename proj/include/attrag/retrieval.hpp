// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "attrag/chunking.hpp"
#include "attrag/indexing.hpp"
#include "attrag/query.hpp"

namespace attrag {

/// One ranked list of chunk ids entering fusion.
struct Ranking {
    std::vector<std::string> chunk_ids;  // best first, duplicate-free
    double weight = 1.0;
    std::string variant_text;
};

inline constexpr int kRrfK = 60;

/// Reciprocal rank fusion: score(c) = sum of weight / (k_const + rank).
///
/// Contributions are summed in a canonical order, so permuting the input
/// rankings yields bit-identical scores. A fused hit keeps the variant text
/// of its largest contribution.
std::vector<RetrievalHit> rrf_fuse(const std::vector<Ranking>& rankings, int k_const = kRrfK);

struct MultipathParams {
    std::size_t k_per_path = 20;
    std::size_t k_final = 8;
    int k_const = kRrfK;
};

/// Sparse and (when both `dense` and `embedder` are given) dense search for
/// the original query and every variant, fused with the variant weights.
/// Throws kIndexMismatch when the indexes were built over different chunks.
std::vector<RetrievalHit> retrieve_multipath(const QueryBundle& bundle, const SparseIndex& sparse,
                                             const DenseIndex* dense, Embedder* embedder,
                                             const MultipathParams& params = {});

struct UtilityVerdict {
    std::string chunk_id;
    bool useful = true;
    std::string rationale;
    bool degraded = false;  // the judge was unreachable and the verdict defaulted

    bool operator==(const UtilityVerdict&) const = default;
};

/// Asks the judge for {"useful": bool, "rationale": string}. Output that is
/// not exactly that shape yields useful=true with rationale "parse_failure";
/// provider failures yield useful=true with degraded=true.
UtilityVerdict judge_usefulness(std::string_view query, const Chunk& chunk, std::string_view doc_title,
                                LlmProvider& llm);

/// A document sentence selected as evidence.
struct EvidenceSpan {
    std::string chunk_id;
    std::string doc_id;
    std::size_t sentence_index = 0;
    std::size_t start = 0;  // byte offsets into the document body
    std::size_t end = 0;
    double score = 0.0;  // clamped to [0, 1]
    std::string text;

    bool operator==(const EvidenceSpan&) const = default;
};

/// Lexical relevance |q ∩ s| / |q| over distinct exact lowercase tokens.
double token_overlap(std::string_view query, std::string_view sentence);

/// Scores every sentence of the chunk (cosine with an embedder, token
/// overlap without) and returns the best `max_sentences` in document order.
std::vector<EvidenceSpan> extract_evidence(std::string_view query, const Chunk& chunk, const Document& doc,
                                           Embedder* embedder, std::size_t max_sentences);

nlohmann::json to_json(const RetrievalHit& hit);
nlohmann::json to_json(const UtilityVerdict& verdict);
nlohmann::json to_json(const EvidenceSpan& span);

}  // namespace attrag
