// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/query.hpp"

#include <nlohmann/json.hpp>

#include <unordered_set>

#include "attrag/error.hpp"
#include "attrag/prompts.hpp"
#include "attrag/text.hpp"

namespace attrag {

using nlohmann::json;

std::string_view rewrite_kind_name(RewriteKind k) {
    switch (k) {
        case RewriteKind::kExpansion: return "expansion";
        case RewriteKind::kDecomposition: return "decomposition";
        case RewriteKind::kDisambiguation: return "disambiguation";
        case RewriteKind::kAbstraction: return "abstraction";
    }
    return "expansion";
}

std::optional<RewriteKind> parse_rewrite_kind(std::string_view name) {
    for (auto k : {RewriteKind::kExpansion, RewriteKind::kDecomposition, RewriteKind::kDisambiguation,
                   RewriteKind::kAbstraction}) {
        if (rewrite_kind_name(k) == name) return k;
    }
    return std::nullopt;
}

std::vector<std::pair<std::string, double>> QueryBundle::weighted_texts() const {
    std::vector<std::pair<std::string, double>> out;
    out.emplace_back(original, 1.0);
    for (const auto& v : variants) out.emplace_back(v.text, v.weight);
    return out;
}

std::optional<std::vector<std::string>> parse_string_list(std::string_view text) {
    std::string_view body = text::trim(text);
    // Models often wrap JSON in a fenced block despite instructions.
    if (body.starts_with("```")) {
        const auto first_nl = body.find('\n');
        const auto last_fence = body.rfind("```");
        if (first_nl == std::string_view::npos || last_fence <= first_nl) return std::nullopt;
        body = text::trim(body.substr(first_nl + 1, last_fence - first_nl - 1));
    }
    const json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_array()) return std::nullopt;
    std::vector<std::string> out;
    for (const auto& item : j) {
        if (!item.is_string()) return std::nullopt;
        out.push_back(item.get<std::string>());
    }
    return out;
}

namespace {

std::string_view template_for(RewriteKind k) {
    switch (k) {
        case RewriteKind::kExpansion: return prompts::kQueryExpansion;
        case RewriteKind::kDecomposition: return prompts::kQueryDecomposition;
        case RewriteKind::kDisambiguation: return prompts::kQueryDisambiguation;
        case RewriteKind::kAbstraction: return prompts::kQueryAbstraction;
    }
    return prompts::kQueryExpansion;
}

std::string render_history(const std::vector<ChatMessage>& history) {
    if (history.empty()) return {};
    std::string out = "\nConversation so far:\n";
    for (const auto& m : history) {
        out += m.role == "assistant" ? "Assistant: " : "User: ";
        out += text::collapse_whitespace(m.content);
        out += "\n";
    }
    return out;
}

std::string dedup_key(std::string_view s) { return text::case_fold(text::collapse_whitespace(s)); }

}  // namespace

QueryBundle rewrite_query(std::string_view query, const std::set<RewriteKind>& modes, LlmProvider* llm,
                          const std::vector<ChatMessage>& history) {
    if (text::is_blank(query)) throw Error(ErrorCode::kEmptyQuery, "query is empty");
    QueryBundle bundle;
    bundle.original = std::string(query);
    if (modes.empty()) return bundle;

    std::unordered_set<std::string> seen{dedup_key(query)};
    const std::string history_text = render_history(history);
    for (RewriteKind kind : modes) {
        const std::string name(rewrite_kind_name(kind));
        if (llm == nullptr) {
            bundle.warnings.push_back(name + ": no rewrite provider configured");
            continue;
        }
        const std::string prompt =
            prompts::render(prompts::get(template_for(kind)), {{"query", bundle.original}, {"history", history_text}});
        std::string reply;
        try {
            reply = llm->complete({{"user", prompt}});
        } catch (const Error& e) {
            bundle.warnings.push_back(name + ": provider failed (" + std::string(error_code_name(e.code())) + ")");
            continue;
        }
        const auto items = parse_string_list(reply);
        if (!items) {
            bundle.warnings.push_back(name + ": unparseable rewrite output ignored");
            continue;
        }
        for (const auto& item : *items) {
            if (bundle.variants.size() >= kMaxQueryVariants) break;
            const std::string cleaned = text::collapse_whitespace(item);
            if (cleaned.empty() || !seen.insert(dedup_key(cleaned)).second) continue;
            bundle.variants.push_back({cleaned, kind, kVariantWeight});
        }
    }
    return bundle;
}

json to_json(const QueryBundle& bundle) {
    json variants = json::array();
    for (const auto& v : bundle.variants) {
        variants.push_back({{"text", v.text}, {"kind", rewrite_kind_name(v.kind)}, {"weight", v.weight}});
    }
    return {{"original", bundle.original}, {"variants", variants}, {"warnings", bundle.warnings}};
}

}  // namespace attrag
