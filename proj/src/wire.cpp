// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/wire.hpp"

#include "attrag/error.hpp"

namespace attrag {

using nlohmann::json;

json to_json(const Document& doc) {
    json sentences = json::array();
    for (const auto& s : doc.sentences) sentences.push_back({s.start, s.end});
    json headings = json::array();
    for (const auto& h : doc.headings) {
        headings.push_back({{"level", h.level}, {"text", h.text}, {"offset", h.offset}});
    }
    return {{"id", doc.id},
            {"title", doc.title},
            {"source_uri", doc.source_uri},
            {"publish_date", doc.publish_date ? json(format_iso_date(*doc.publish_date)) : json(nullptr)},
            {"body", doc.body},
            {"sentences", sentences},
            {"headings", headings},
            {"metadata", doc.metadata}};
}

Document document_from_json(const json& j) {
    try {
        Document doc;
        doc.id = j.at("id").get<std::string>();
        doc.title = j.at("title").get<std::string>();
        doc.source_uri = j.at("source_uri").get<std::string>();
        if (j.contains("publish_date") && j["publish_date"].is_string()) {
            doc.publish_date = parse_iso_date(j["publish_date"].get<std::string>());
        }
        doc.body = j.at("body").get<std::string>();
        std::size_t index = 0;
        for (const auto& s : j.at("sentences")) {
            doc.sentences.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(), index++});
        }
        for (const auto& h : j.at("headings")) {
            doc.headings.push_back(
                {h.at("level").get<int>(), h.at("text").get<std::string>(), h.at("offset").get<std::size_t>()});
        }
        doc.metadata = j.value("metadata", Metadata{});
        return doc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kMalformedJson, std::string("stored document is malformed: ") + e.what());
    }
}

json to_json(const Chunk& c) {
    json j = {{"id", c.id},
              {"doc_id", c.doc_id},
              {"span", {c.start, c.end}},
              {"seq", c.seq},
              {"first_sentence", c.first_sentence},
              {"sentence_count", c.sentence_count},
              {"text", c.text},
              {"context_header", c.context_header},
              {"enriched_text", c.enriched_text},
              {"metadata", c.metadata}};
    if (c.embedding) j["embedding"] = {{"values", c.embedding->values}, {"normalized", c.embedding->normalized}};
    return j;
}

Chunk chunk_from_json(const json& j) {
    try {
        Chunk c;
        c.id = j.at("id").get<std::string>();
        c.doc_id = j.at("doc_id").get<std::string>();
        c.start = j.at("span").at(0).get<std::size_t>();
        c.end = j.at("span").at(1).get<std::size_t>();
        c.seq = j.at("seq").get<std::size_t>();
        c.first_sentence = j.at("first_sentence").get<std::size_t>();
        c.sentence_count = j.at("sentence_count").get<std::size_t>();
        c.text = j.at("text").get<std::string>();
        c.context_header = j.at("context_header").get<std::string>();
        c.enriched_text = j.at("enriched_text").get<std::string>();
        c.metadata = j.value("metadata", Metadata{});
        if (j.contains("embedding")) {
            c.embedding = EmbeddingVector{j["embedding"].at("values").get<std::vector<float>>(),
                                          j["embedding"].at("normalized").get<bool>()};
        }
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kMalformedJson, std::string("stored chunk is malformed: ") + e.what());
    }
}

json to_json(const ChunkConfig& config) {
    return {{"strategy", chunk_strategy_name(config.strategy)},
            {"target_size", config.target_size},
            {"overlap", config.overlap},
            {"breakpoint_percentile", config.breakpoint_percentile}};
}

ChunkConfig chunk_config_from_json(const json& j, const ChunkConfig& base) {
    ChunkConfig c = base;
    if (j.is_null()) return c;
    if (!j.is_object()) throw Error(ErrorCode::kInvalidChunkParams, "chunk_config must be an object");
    try {
        if (j.contains("strategy")) {
            const auto s = parse_chunk_strategy(j["strategy"].get<std::string>());
            if (!s) throw Error(ErrorCode::kInvalidChunkParams, "unknown chunking strategy");
            c.strategy = *s;
        }
        if (j.contains("target_size")) c.target_size = j["target_size"].get<std::size_t>();
        if (j.contains("overlap")) c.overlap = j["overlap"].get<std::size_t>();
        if (j.contains("breakpoint_percentile")) c.breakpoint_percentile = j["breakpoint_percentile"].get<double>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kInvalidChunkParams, std::string("invalid chunk_config: ") + e.what());
    }
    if (c.target_size < 1 || c.overlap >= c.target_size) {
        throw Error(ErrorCode::kInvalidChunkParams, "require target_size >= 1 and overlap < target_size");
    }
    if (!(c.breakpoint_percentile >= 0.0 && c.breakpoint_percentile <= 100.0)) {
        throw Error(ErrorCode::kInvalidChunkParams, "breakpoint_percentile must lie in [0, 100]");
    }
    return c;
}

}  // namespace attrag
