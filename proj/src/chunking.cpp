// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/chunking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "attrag/error.hpp"
#include "attrag/prompts.hpp"
#include "attrag/text.hpp"

namespace attrag {

namespace {

Chunk make_chunk(const Document& doc, std::size_t seq, std::size_t first, std::size_t count) {
    Chunk c;
    c.doc_id = doc.id;
    c.seq = seq;
    c.id = chunk_id(doc.id, seq);
    c.first_sentence = first;
    c.sentence_count = count;
    c.start = doc.sentences[first].start;
    c.end = doc.sentences[first + count - 1].end;
    c.text = doc.body.substr(c.start, c.end - c.start);
    c = attach_context_header(std::move(c), doc);
    c.enriched_text = c.context_header.empty() ? c.text : c.context_header + "\n" + c.text;
    return c;
}

std::vector<Chunk> chunks_from_boundaries(const Document& doc, const std::vector<std::size_t>& boundaries) {
    std::vector<Chunk> chunks;
    std::size_t first = 0;
    for (std::size_t b : boundaries) {
        chunks.push_back(make_chunk(doc, chunks.size(), first, b + 1 - first));
        first = b + 1;
    }
    if (first < doc.sentences.size()) {
        chunks.push_back(make_chunk(doc, chunks.size(), first, doc.sentences.size() - first));
    }
    return chunks;
}

}  // namespace

std::string_view chunk_strategy_name(ChunkStrategy s) {
    return s == ChunkStrategy::kFixed ? "fixed" : "semantic";
}

std::optional<ChunkStrategy> parse_chunk_strategy(std::string_view name) {
    if (name == "fixed") return ChunkStrategy::kFixed;
    if (name == "semantic") return ChunkStrategy::kSemantic;
    return std::nullopt;
}

std::string chunk_id(std::string_view doc_id, std::size_t seq) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "-%06zu", seq);
    return std::string(doc_id.substr(0, 16)) + buf;
}

std::vector<Chunk> chunk_fixed(const Document& doc, std::size_t target_size, std::size_t overlap) {
    if (target_size < 1 || overlap >= target_size) {
        throw Error(ErrorCode::kInvalidChunkParams,
                    "chunk_fixed requires target_size >= 1 and 0 <= overlap < target_size");
    }
    std::vector<Chunk> chunks;
    const std::size_t n = doc.sentences.size();
    std::size_t first = 0;
    while (first < n) {
        const std::size_t last = std::min(first + target_size, n);
        chunks.push_back(make_chunk(doc, chunks.size(), first, last - first));
        if (last == n) break;
        first = last - overlap;
    }
    return chunks;
}

std::vector<double> adjacent_window_distances(const Document& doc, Embedder& embedder) {
    const std::size_t n = doc.sentences.size();
    if (n < 2) return {};
    std::vector<std::string> windows;
    windows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = std::min(i + 1, n - 1);
        std::string w;
        for (std::size_t k = lo; k <= hi; ++k) {
            if (!w.empty()) w += ' ';
            w += doc.sentence_text(k);
        }
        windows.push_back(std::move(w));
    }
    std::vector<std::vector<float>> vectors;
    try {
        vectors = embedder.embed(windows);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::kEmbedderUnavailable, e.what());
    }
    if (vectors.size() != n) {
        throw Error(ErrorCode::kEmbedderUnavailable, "embedder returned the wrong number of vectors");
    }
    std::vector<double> distances;
    distances.reserve(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (vectors[i].size() != vectors[i + 1].size()) {
            throw Error(ErrorCode::kDimensionMismatch, "embedder returned vectors of differing dimensionality");
        }
        double d = 1.0 - cosine(vectors[i], vectors[i + 1]);
        if (std::abs(d) < 1e-9) d = 0.0;
        distances.push_back(d);
    }
    return distances;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    p = std::clamp(p, 0.0, 100.0);
    const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = static_cast<std::size_t>(std::ceil(rank));
    return values[lo] + (rank - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<std::size_t> semantic_boundaries(const std::vector<double>& distances, double p) {
    const double threshold = p <= 0.0 ? 0.0 : percentile(distances, p);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < distances.size(); ++i) {
        if (distances[i] > threshold) out.push_back(i);
    }
    return out;
}

std::vector<Chunk> chunk_semantic(const Document& doc, Embedder& embedder, double breakpoint_percentile) {
    if (doc.sentences.empty()) return {};
    const auto distances = adjacent_window_distances(doc, embedder);
    return chunks_from_boundaries(doc, semantic_boundaries(distances, breakpoint_percentile));
}

std::vector<Chunk> chunk_document(const Document& doc, const ChunkConfig& config, Embedder* embedder) {
    if (config.strategy == ChunkStrategy::kFixed) {
        return chunk_fixed(doc, config.target_size, config.overlap);
    }
    if (embedder == nullptr) {
        throw Error(ErrorCode::kEmbedderUnavailable, "semantic chunking requires an embedder");
    }
    return chunk_semantic(doc, *embedder, config.breakpoint_percentile);
}

std::string context_header_at(const Document& doc, std::size_t offset) {
    std::vector<const Heading*> stack;
    for (const auto& h : doc.headings) {
        if (h.offset > offset) break;
        while (!stack.empty() && stack.back()->level >= h.level) stack.pop_back();
        stack.push_back(&h);
    }
    std::string header = doc.title;
    for (const Heading* h : stack) {
        if (!header.empty()) header += " > ";
        header += h->text;
    }
    return header;
}

Chunk attach_context_header(Chunk chunk, const Document& doc) {
    chunk.context_header = context_header_at(doc, chunk.start);
    return chunk;
}

Decontextualized decontextualize(const Chunk& chunk, const Document& doc, LlmProvider* llm) {
    Decontextualized out;
    std::string passage = chunk.text;
    if (doc.publish_date) {
        passage = normalize_relative_dates(passage, *doc.publish_date);
        out.flags["dates"] = "normalized";
    } else {
        out.flags["dates"] = "no_publish_date";
    }

    if (llm == nullptr) {
        out.flags["coref"] = "disabled";
    } else {
        std::string context;
        const std::size_t lookback_from = chunk.first_sentence >= 2 ? chunk.first_sentence - 2 : 0;
        for (std::size_t i = lookback_from; i < chunk.first_sentence; ++i) {
            if (!context.empty()) context += ' ';
            context += doc.sentence_text(i);
        }
        const std::string prompt = prompts::render(
            prompts::get(prompts::kCoreference),
            {{"context", context.empty() ? "(none)" : context}, {"passage", passage}});
        try {
            const std::string rewritten(text::trim(llm->complete({{"user", prompt}})));
            if (rewritten.empty()) {
                out.flags["coref"] = "skipped";
            } else {
                passage = rewritten;
                out.flags["coref"] = "applied";
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::kLlmUnavailable && e.code() != ErrorCode::kProviderTimeout) throw;
            out.flags["coref"] = "skipped";
        }
    }

    const std::string header = chunk.context_header.empty() ? context_header_at(doc, chunk.start)
                                                            : chunk.context_header;
    out.enriched_text = header.empty() ? passage : header + "\n" + passage;
    return out;
}

void enrich_chunk(Chunk& chunk, const Document& doc, LlmProvider* llm) {
    auto result = decontextualize(chunk, doc, llm);
    chunk.enriched_text = std::move(result.enriched_text);
    for (auto& [k, v] : result.flags) chunk.metadata[k] = std::move(v);
}

}  // namespace attrag
