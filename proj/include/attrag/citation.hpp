// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "attrag/generation.hpp"
#include "attrag/retrieval.hpp"

namespace attrag {

enum class MatchKind { kExact, kAligned };

std::string_view match_kind_name(MatchKind k);

struct SentenceScore {
    double score = 0.0;
    MatchKind kind = MatchKind::kAligned;
};

/// 1.0/exact when either sentence, whitespace-collapsed and case-folded, is
/// a substring of the other; otherwise the fraction of distinct answer tokens
/// found in the source sentence.
SentenceScore sentence_score(std::string_view answer_sentence, std::string_view source_sentence);

struct Citation {
    std::size_t answer_sentence_index = 0;
    std::string doc_id;
    std::size_t start = 0;  // byte offsets into the document body
    std::size_t end = 0;
    double score = 0.0;
    MatchKind kind = MatchKind::kAligned;

    bool operator==(const Citation&) const = default;
};

struct CitationOptions {
    double tau = 0.5;
    std::size_t max_per_sentence = 3;
    bool cite_summary = true;
    bool cite_headings = false;
};

struct CitationResult {
    std::vector<Citation> citations;      // by answer sentence, then strength
    std::vector<std::size_t> unsupported;  // eligible sentences left uncited
};

/// Scores every eligible answer sentence against every evidence sentence.
/// `evidence` is in fused-rank order; ties on score prefer the document that
/// appears first there, then the earlier span. Throws kInvalidArgument for
/// tau outside (0, 1].
CitationResult match_citations(const StructuredAnswer& answer, const std::vector<EvidenceSpan>& evidence,
                               const CitationOptions& options = {});

struct CitationGroup {
    std::size_t id = 1;
    std::string doc_id;
    std::vector<Citation> members;  // by source start offset

    std::string label() const { return "[" + std::to_string(id) + "]"; }

    bool operator==(const CitationGroup&) const = default;
};

/// One group per cited document, numbered by first appearance in the answer.
std::vector<CitationGroup> group_citations(const std::vector<Citation>& citations);

struct CrossReference {
    std::size_t from_group = 0;
    std::size_t to_group = 0;
    std::vector<std::size_t> shared_sentence_indexes;

    bool operator==(const CrossReference&) const = default;
};

std::vector<CrossReference> cross_reference(const std::vector<CitationGroup>& groups);

/// The raw answer with " [n]" labels inserted after every cited sentence.
std::string annotate_text(const StructuredAnswer& answer, const std::vector<CitationGroup>& groups);

/// Wire serialization consumed by the CLI and the browser client:
///
///   {"summary": {"text", "sentences": [...]},
///    "sections": [{"heading", "sentences": [...]}],
///    "groups": [{"id", "label", "doc_id", "title", "source_uri", "publish_date", "spans"}],
///    "cross_references": [{"from_group", "to_group", "shared_sentence_indexes"}],
///    "annotated_text", "raw"}
///
/// where each sentence is {"index", "text", "kind", "opinion_bearing",
/// "citations": [{"group", "doc_id", "span", "score", "kind"}], "unsupported"}.
nlohmann::json annotated_answer_json(const StructuredAnswer& answer, const CitationResult& result,
                                     const std::vector<CitationGroup>& groups,
                                     const std::vector<CrossReference>& cross_refs, const DocumentLookup& docs);

}  // namespace attrag
