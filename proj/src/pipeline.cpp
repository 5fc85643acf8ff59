// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/pipeline.hpp"

#include <cstdio>
#include <ctime>

#include "attrag/error.hpp"
#include "attrag/text.hpp"

namespace attrag {

using nlohmann::json;

const Document* CorpusSnapshot::document(std::string_view id) const {
    auto it = documents.find(std::string(id));
    return it == documents.end() ? nullptr : &it->second;
}

const Chunk* CorpusSnapshot::chunk(std::string_view id) const {
    auto it = chunks.find(std::string(id));
    return it == chunks.end() ? nullptr : &it->second;
}

DocumentLookup CorpusSnapshot::lookup() const {
    return [this](std::string_view id) { return document(id); };
}

std::shared_ptr<const CorpusSnapshot> build_snapshot(const std::vector<Document>& docs, const BuildOptions& options,
                                                     Embedder* embedder, LlmProvider* llm) {
    auto snap = std::make_shared<CorpusSnapshot>();
    std::vector<Chunk> all;
    for (const auto& doc : docs) {
        snap->documents.emplace(doc.id, doc);
        auto chunks = chunk_document(doc, options.chunking, embedder);
        for (auto& c : chunks) {
            if (options.decontextualize) enrich_chunk(c, doc, llm);
            all.push_back(c);
        }
    }
    snap->sparse = SparseIndex::build(all);
    if (embedder != nullptr) snap->dense = DenseIndex::build(all, *embedder, options.embed_batch);
    for (auto& c : all) {
        const std::string id = c.id;
        snap->chunks.emplace(id, std::move(c));
    }
    return snap;
}

std::shared_ptr<const CorpusSnapshot> assemble_snapshot(std::vector<Document> docs, std::vector<Chunk> chunks,
                                                        LoadedIndexes indexes) {
    if (indexes.sparse.corpus_id() != corpus_digest(chunks)) {
        throw Error(ErrorCode::kIndexMismatch, "stored index does not match the stored chunks");
    }
    auto snap = std::make_shared<CorpusSnapshot>();
    for (auto& d : docs) {
        const std::string id = d.id;
        snap->documents.emplace(id, std::move(d));
    }
    for (auto& c : chunks) {
        const std::string id = c.id;
        snap->chunks.emplace(id, std::move(c));
    }
    snap->sparse = std::move(indexes.sparse);
    snap->dense = std::move(indexes.dense);
    return snap;
}

std::string_view stage_name(Stage s) {
    switch (s) {
        case Stage::kQueryUnderstanding: return "query_understanding";
        case Stage::kRetrieval: return "retrieval";
        case Stage::kUtility: return "utility";
        case Stage::kGeneration: return "generation";
        case Stage::kCitation: return "citation";
        case Stage::kError: return "error";
    }
    return "error";
}

json TraceEvent::to_json() const {
    return {{"sequence", sequence}, {"stage", stage_name(stage)}, {"timestamp", timestamp}, {"payload", payload}};
}

std::string TraceEvent::to_sse() const {
    return "event: " + std::string(stage_name(stage)) + "\ndata: " + to_json().dump() + "\n\n";
}

std::string utc_now_iso() {
    const auto now = std::chrono::system_clock::now();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

namespace {

class Emitter {
  public:
    Emitter(const Clock& clock, const EventSink& sink, std::vector<TraceEvent>& log)
        : clock_(clock), sink_(sink), log_(log) {}

    void emit(Stage stage, json payload) {
        TraceEvent e{++seq_, stage, clock_ ? clock_() : utc_now_iso(), std::move(payload)};
        if (sink_) sink_(e);
        log_.push_back(std::move(e));
    }

  private:
    const Clock& clock_;
    const EventSink& sink_;
    std::vector<TraceEvent>& log_;
    std::size_t seq_ = 0;
};

json hits_json(const std::vector<RetrievalHit>& hits, const CorpusSnapshot& corpus) {
    json out = json::array();
    for (const auto& h : hits) {
        json j = to_json(h);
        if (const Chunk* c = corpus.chunk(h.chunk_id)) {
            j["doc_id"] = c->doc_id;
            j["context_header"] = c->context_header;
        }
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace

TurnOutcome run_turn(std::string_view query, const std::vector<ChatMessage>& history, const CorpusSnapshot& corpus,
                     const PipelineProviders& providers, const PipelineConfig& config, const Clock& clock,
                     const EventSink& sink) {
    if (text::is_blank(query)) throw Error(ErrorCode::kEmptyQuery, "query is empty");
    TurnOutcome outcome;
    Emitter out(clock, sink, outcome.events);
    Stage stage = Stage::kQueryUnderstanding;
    try {
        // 1. Query understanding.
        const QueryBundle bundle = rewrite_query(query, config.rewrite_modes, providers.rewriter, history);
        out.emit(stage, to_json(bundle));

        // 2. Multi-path retrieval and fusion.
        stage = Stage::kRetrieval;
        const DenseIndex* dense = config.use_dense && corpus.dense ? &*corpus.dense : nullptr;
        outcome.hits =
            retrieve_multipath(bundle, corpus.sparse, dense, dense ? providers.embedder : nullptr, config.retrieval);
        out.emit(stage, {{"hits", hits_json(outcome.hits, corpus)},
                         {"paths", dense ? json::array({"sparse", "dense"}) : json::array({"sparse"})}});

        // 3. Usefulness judging and evidence extraction.
        stage = Stage::kUtility;
        json verdicts = json::array();
        json dropped = json::array();
        std::vector<EvidenceSpan> evidence;
        bool degraded = false;
        Embedder* scorer = config.embedding_evidence_scorer ? providers.embedder : nullptr;
        for (const auto& hit : outcome.hits) {
            const Chunk* chunk = corpus.chunk(hit.chunk_id);
            const Document* doc = chunk ? corpus.document(chunk->doc_id) : nullptr;
            if (chunk == nullptr || doc == nullptr) {
                throw Error(ErrorCode::kIndexMismatch, "index refers to unknown chunk " + hit.chunk_id);
            }
            UtilityVerdict v{chunk->id, true, "judging disabled", false};
            if (config.judge && providers.judger != nullptr) {
                v = judge_usefulness(bundle.original, *chunk, doc->title, *providers.judger);
            }
            degraded = degraded || v.degraded;
            verdicts.push_back(to_json(v));
            if (!v.useful) {
                dropped.push_back(chunk->id);
                continue;
            }
            for (auto& e : extract_evidence(bundle.original, *chunk, *doc, scorer, config.max_evidence_sentences)) {
                evidence.push_back(std::move(e));
            }
        }
        json evidence_json = json::array();
        for (const auto& e : evidence) evidence_json.push_back(to_json(e));
        out.emit(stage, {{"verdicts", verdicts},
                         {"dropped", dropped},
                         {"evidence", evidence_json},
                         {"judger_degraded", degraded}});

        // 4. Generation.
        stage = Stage::kGeneration;
        std::string raw;
        if (evidence.empty()) {
            raw = std::string(kInsufficientAnswer);
            out.emit(stage, {{"done", true}, {"skipped", "no_evidence"}, {"raw", raw}});
        } else {
            if (providers.generator == nullptr) {
                throw Error(ErrorCode::kLlmUnavailable, "no generation provider configured");
            }
            const Prompt prompt = assemble_prompt(bundle.original, evidence, corpus.lookup(), history,
                                                  config.prompt_budget);
            std::string pending;
            GenerateOptions opts;
            opts.stream = config.stream;
            opts.timeout = config.generation_timeout;
            opts.on_delta = [&](std::string_view delta) {
                pending.append(delta);
                const std::size_t n = text::utf8_complete_prefix(pending);
                if (n == 0) return;
                out.emit(stage, {{"delta", pending.substr(0, n)}});
                pending.erase(0, n);
            };
            raw = generate(prompt, *providers.generator, opts);
            if (!pending.empty()) out.emit(stage, {{"delta", pending}});
            out.emit(stage, {{"done", true}, {"reasoning", to_json(prompt)}, {"raw", raw}});
        }

        // 5. Post-generation citation.
        stage = Stage::kCitation;
        const StructuredAnswer answer = parse_structured_answer(raw);
        const CitationResult cites = match_citations(answer, evidence, config.citation);
        const auto groups = group_citations(cites.citations);
        const auto xrefs = cross_reference(groups);
        outcome.answer = annotated_answer_json(answer, cites, groups, xrefs, corpus.lookup());
        out.emit(stage, {{"answer", outcome.answer}, {"unsupported", cites.unsupported}});
        outcome.ok = true;
    } catch (const Error& e) {
        outcome.error_code = std::string(error_code_name(e.code()));
        outcome.error_message = e.what();
        out.emit(Stage::kError,
                 {{"code", outcome.error_code}, {"message", outcome.error_message}, {"stage", stage_name(stage)}});
    } catch (const std::exception& e) {
        outcome.error_code = "Internal";
        outcome.error_message = e.what();
        out.emit(Stage::kError,
                 {{"code", outcome.error_code}, {"message", outcome.error_message}, {"stage", stage_name(stage)}});
    }
    return outcome;
}

}  // namespace attrag
