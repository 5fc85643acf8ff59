// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "attrag/providers.hpp"

namespace attrag {

// Declaration order is the assembly order of variants in a bundle.
enum class RewriteKind { kExpansion, kDecomposition, kDisambiguation, kAbstraction };

std::string_view rewrite_kind_name(RewriteKind k);
std::optional<RewriteKind> parse_rewrite_kind(std::string_view name);

struct QueryVariant {
    std::string text;
    RewriteKind kind = RewriteKind::kExpansion;
    double weight = 0.5;

    bool operator==(const QueryVariant&) const = default;
};

/// The original query plus its rewrites. The original is implicit with
/// weight 1.0 and never appears in `variants`.
struct QueryBundle {
    std::string original;
    std::vector<QueryVariant> variants;
    std::vector<std::string> warnings;

    /// (text, weight) for the original followed by every variant.
    std::vector<std::pair<std::string, double>> weighted_texts() const;
};

inline constexpr std::size_t kMaxQueryVariants = 8;
inline constexpr double kVariantWeight = 0.5;

/// Parses a JSON list of strings, tolerating a surrounding code fence.
/// Returns nullopt when the text is not such a list.
std::optional<std::vector<std::string>> parse_string_list(std::string_view text);

/// One LLM call per requested kind, in kind order. Unparseable output or a
/// provider failure for a kind contributes no variants and a warning.
/// `history` is rendered into the prompt; `llm` may be null when `modes` is
/// empty. Throws kEmptyQuery for a blank query.
QueryBundle rewrite_query(std::string_view query, const std::set<RewriteKind>& modes, LlmProvider* llm,
                          const std::vector<ChatMessage>& history = {});

nlohmann::json to_json(const QueryBundle& bundle);

}  // namespace attrag
