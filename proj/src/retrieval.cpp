// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/retrieval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "attrag/error.hpp"
#include "attrag/prompts.hpp"
#include "attrag/text.hpp"

namespace attrag {

using nlohmann::json;

std::vector<RetrievalHit> rrf_fuse(const std::vector<Ranking>& rankings, int k_const) {
    if (k_const < 1) throw Error(ErrorCode::kInvalidArgument, "k_const must be at least 1");
    struct Contribution {
        double value;
        const std::string* variant;
    };
    std::map<std::string, std::vector<Contribution>> by_chunk;
    for (const auto& r : rankings) {
        for (std::size_t i = 0; i < r.chunk_ids.size(); ++i) {
            by_chunk[r.chunk_ids[i]].push_back({r.weight / static_cast<double>(k_const + i + 1), &r.variant_text});
        }
    }
    std::vector<RetrievalHit> fused;
    fused.reserve(by_chunk.size());
    for (auto& [id, parts] : by_chunk) {
        std::sort(parts.begin(), parts.end(), [](const Contribution& a, const Contribution& b) {
            if (a.value != b.value) return a.value > b.value;
            return *a.variant < *b.variant;
        });
        double score = 0.0;
        for (const auto& p : parts) score += p.value;
        fused.push_back({id, score, HitPath::kFused, 0, *parts.front().variant});
    }
    std::stable_sort(fused.begin(), fused.end(),
                     [](const RetrievalHit& a, const RetrievalHit& b) { return a.score > b.score; });
    for (std::size_t i = 0; i < fused.size(); ++i) fused[i].rank = i + 1;
    return fused;
}

std::vector<RetrievalHit> retrieve_multipath(const QueryBundle& bundle, const SparseIndex& sparse,
                                             const DenseIndex* dense, Embedder* embedder,
                                             const MultipathParams& params) {
    if (dense != nullptr && dense->corpus_id() != sparse.corpus_id()) {
        throw Error(ErrorCode::kIndexMismatch, "sparse and dense indexes cover different corpora");
    }
    const auto texts = bundle.weighted_texts();
    std::vector<Ranking> rankings;
    auto add = [&](const std::vector<RetrievalHit>& hits, const std::pair<std::string, double>& variant) {
        Ranking r{{}, variant.second, variant.first};
        for (const auto& h : hits) r.chunk_ids.push_back(h.chunk_id);
        rankings.push_back(std::move(r));
    };
    for (const auto& t : texts) add(sparse.search(t.first, params.k_per_path), t);
    if (dense != nullptr && embedder != nullptr) {
        std::vector<std::string> queries;
        for (const auto& t : texts) queries.push_back(t.first);
        const auto vectors = embedder->embed(queries);
        if (vectors.size() != queries.size()) {
            throw Error(ErrorCode::kEmbedderUnavailable, "embedder returned the wrong number of vectors");
        }
        for (std::size_t i = 0; i < texts.size(); ++i) add(dense->search(vectors[i], params.k_per_path), texts[i]);
    }
    auto fused = rrf_fuse(rankings, params.k_const);
    if (fused.size() > params.k_final) fused.resize(params.k_final);
    return fused;
}

UtilityVerdict judge_usefulness(std::string_view query, const Chunk& chunk, std::string_view doc_title,
                                LlmProvider& llm) {
    UtilityVerdict verdict{chunk.id, true, {}, false};
    const std::string prompt = prompts::render(
        prompts::get(prompts::kUsefulness),
        {{"query", std::string(query)}, {"title", std::string(doc_title)}, {"passage", chunk.enriched_text}});
    std::string reply;
    try {
        reply = llm.complete({{"user", prompt}});
    } catch (const Error& e) {
        verdict.rationale = "judger_unavailable: " + std::string(error_code_name(e.code()));
        verdict.degraded = true;
        return verdict;
    }
    const json j = json::parse(text::trim(reply), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("useful") || !j["useful"].is_boolean() ||
        (j.contains("rationale") && !j["rationale"].is_string())) {
        verdict.rationale = "parse_failure";
        return verdict;
    }
    verdict.useful = j["useful"].get<bool>();
    verdict.rationale = j.value("rationale", "");
    return verdict;
}

double token_overlap(std::string_view query, std::string_view sentence) {
    const auto q_tokens = text::tokenize(query);
    const std::set<std::string> q(q_tokens.begin(), q_tokens.end());
    if (q.empty()) return 0.0;
    const auto s_tokens = text::tokenize(sentence);
    const std::set<std::string> s(s_tokens.begin(), s_tokens.end());
    std::size_t shared = 0;
    for (const auto& t : q) shared += s.count(t);
    return static_cast<double>(shared) / static_cast<double>(q.size());
}

std::vector<EvidenceSpan> extract_evidence(std::string_view query, const Chunk& chunk, const Document& doc,
                                           Embedder* embedder, std::size_t max_sentences) {
    std::vector<EvidenceSpan> spans;
    for (std::size_t i = chunk.first_sentence; i < chunk.first_sentence + chunk.sentence_count; ++i) {
        const auto& s = doc.sentences.at(i);
        spans.push_back({chunk.id, doc.id, i, s.start, s.end, 0.0, std::string(doc.sentence_text(i))});
    }
    if (spans.empty() || max_sentences == 0) return {};

    if (embedder != nullptr) {
        std::vector<std::string> texts{std::string(query)};
        for (const auto& s : spans) texts.push_back(s.text);
        const auto vectors = embedder->embed(texts);
        if (vectors.size() != texts.size()) {
            throw Error(ErrorCode::kEmbedderUnavailable, "embedder returned the wrong number of vectors");
        }
        for (std::size_t i = 0; i < spans.size(); ++i) spans[i].score = cosine(vectors[0], vectors[i + 1]);
    } else {
        for (auto& s : spans) s.score = token_overlap(query, s.text);
    }
    for (auto& s : spans) s.score = std::clamp(s.score, 0.0, 1.0);

    if (spans.size() > max_sentences) {
        std::vector<std::size_t> order(spans.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return spans[a].score > spans[b].score; });
        order.resize(max_sentences);
        std::sort(order.begin(), order.end());
        std::vector<EvidenceSpan> kept;
        for (std::size_t i : order) kept.push_back(std::move(spans[i]));
        spans = std::move(kept);
    }
    return spans;
}

json to_json(const RetrievalHit& hit) {
    return {{"chunk_id", hit.chunk_id},
            {"score", hit.score},
            {"path", hit_path_name(hit.path)},
            {"rank", hit.rank},
            {"variant_text", hit.variant_text}};
}

json to_json(const UtilityVerdict& v) {
    return {{"chunk_id", v.chunk_id}, {"useful", v.useful}, {"rationale", v.rationale}, {"degraded", v.degraded}};
}

json to_json(const EvidenceSpan& s) {
    return {{"chunk_id", s.chunk_id},
            {"doc_id", s.doc_id},
            {"sentence_index", s.sentence_index},
            {"span", {s.start, s.end}},
            {"score", s.score},
            {"text", s.text}};
}

}  // namespace attrag
