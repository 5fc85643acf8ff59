// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/service.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "attrag/error.hpp"
#include "attrag/text.hpp"
#include "attrag/wire.hpp"

namespace attrag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_atomic(const fs::path& path, std::string_view content) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorCode::kIoFailure, "error writing " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::kIoFailure, "cannot replace " + path.string() + ": " + ec.message());
}

void append_line(const fs::path& path, const std::string& line) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot append to " + path.string());
    out << line << '\n';
    if (!out) throw Error(ErrorCode::kIoFailure, "error appending to " + path.string());
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kMalformedJson, path.string() + ": " + e.what());
    }
}

std::vector<json> read_json_lines(const fs::path& path) {
    std::vector<json> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (text::is_blank(line)) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::kMalformedJson, path.string() + ": " + e.what());
        }
    }
    return out;
}

std::string random_id(std::string_view prefix) {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::ostringstream s;
    s << prefix << '_' << std::hex;
    s.width(16);
    s.fill('0');
    s << rng();
    return s.str();
}

json error_record(const Error& e, const std::string& at) {
    return {{"code", error_code_name(e.code())}, {"message", e.what()}, {"at", at}};
}

}  // namespace

int http_status_for(const std::string& code) {
    static const std::map<std::string, int> table = {
        {"CorpusNotFound", 404},      {"ConversationNotFound", 404}, {"CorpusBusy", 409},
        {"CorpusNotReady", 409},      {"UnsupportedFormat", 415},    {"LlmUnavailable", 502},
        {"EmbedderUnavailable", 502}, {"ProviderTimeout", 504},      {"IoFailure", 500},
        {"CorruptIndex", 500},        {"VersionMismatch", 500},      {"IndexMismatch", 500},
        {"Internal", 500}};
    auto it = table.find(code);
    return it == table.end() ? 400 : it->second;
}

Service::Service(ServiceConfig config, ProviderRegistry providers, ServiceHooks hooks)
    : config_(std::move(config)), providers_(std::move(providers)), hooks_(std::move(hooks)) {
    load_all();
}

std::string Service::now() const { return hooks_.clock ? hooks_.clock() : utc_now_iso(); }

std::string Service::new_id(std::string_view prefix) const {
    return hooks_.new_id ? hooks_.new_id(prefix) : random_id(prefix);
}

fs::path Service::corpus_dir(const std::string& id) const { return config_.data_dir / "corpora" / id; }

fs::path Service::conversation_dir(const std::string& id) const {
    return config_.data_dir / "conversations" / id;
}

void Service::save_corpus_meta(const std::string& id, const json& meta) const {
    write_atomic(corpus_dir(id) / "corpus.json", meta.dump(2) + "\n");
}

json Service::public_corpus(const json& meta) const { return meta; }

std::vector<Document> Service::load_documents(const std::string& id, const json& meta) const {
    std::vector<Document> docs;
    for (const auto& d : meta["documents"]) {
        docs.push_back(
            document_from_json(read_json(corpus_dir(id) / "documents" / (d["id"].get<std::string>() + ".json"))));
    }
    return docs;
}

std::shared_ptr<const CorpusSnapshot> Service::load_snapshot(const std::string& id, const json& meta) const {
    std::vector<Chunk> chunks;
    for (const auto& j : read_json_lines(corpus_dir(id) / "chunks.jsonl")) chunks.push_back(chunk_from_json(j));
    return assemble_snapshot(load_documents(id, meta), std::move(chunks), load_indexes(corpus_dir(id) / "index"));
}

void Service::load_all() {
    std::error_code ec;
    fs::create_directories(config_.data_dir / "corpora", ec);
    fs::create_directories(config_.data_dir / "conversations", ec);
    if (ec) throw Error(ErrorCode::kIoFailure, "cannot create data directory " + config_.data_dir.string());

    for (const auto& entry : fs::directory_iterator(config_.data_dir / "corpora")) {
        const fs::path meta_path = entry.path() / "corpus.json";
        if (!fs::exists(meta_path)) continue;
        json meta = read_json(meta_path);
        const std::string id = meta.at("id").get<std::string>();
        CorpusRecord rec{meta, nullptr};
        const std::string state = meta.value("index_state", "empty");
        if (state == "ready") {
            try {
                rec.snapshot = load_snapshot(id, meta);
            } catch (const Error& e) {
                rec.meta["index_state"] = "empty";
                rec.meta["last_error"] = error_record(e, now());
                save_corpus_meta(id, rec.meta);
            }
        } else if (state == "building") {
            // A build interrupted by shutdown never completed.
            rec.meta["index_state"] = "empty";
            rec.meta["last_error"] = {{"code", "IoFailure"}, {"message", "build interrupted"}, {"at", now()}};
            save_corpus_meta(id, rec.meta);
        }
        corpora_.emplace(id, std::move(rec));
    }
    for (const auto& entry : fs::directory_iterator(config_.data_dir / "conversations")) {
        const fs::path meta_path = entry.path() / "conversation.json";
        if (!fs::exists(meta_path)) continue;
        ConversationRecord rec;
        rec.meta = read_json(meta_path);
        rec.turns = read_json_lines(entry.path() / "turns.jsonl");
        const std::string id = rec.meta.at("id").get<std::string>();
        conversations_.emplace(id, std::move(rec));
    }
}

json Service::create_corpus(const std::string& name, const json& chunk_config) {
    if (text::is_blank(name)) throw Error(ErrorCode::kInvalidArgument, "corpus name is empty");
    const ChunkConfig cc = chunk_config_from_json(chunk_config, config_.chunking);
    std::lock_guard lock(mu_);
    const std::string id = new_id("cor");
    const std::string ts = now();
    json meta = {{"id", id},
                 {"name", name},
                 {"chunk_config", to_json(cc)},
                 {"index_state", "empty"},
                 {"created_at", ts},
                 {"updated_at", ts},
                 {"documents", json::array()},
                 {"chunk_count", 0},
                 {"corpus_digest", nullptr},
                 {"last_error", nullptr}};
    save_corpus_meta(id, meta);
    corpora_[id] = {meta, nullptr};
    return public_corpus(meta);
}

json Service::list_corpora() const {
    std::lock_guard lock(mu_);
    json out = json::array();
    for (const auto& [id, rec] : corpora_) out.push_back(public_corpus(rec.meta));
    return out;
}

json Service::get_corpus(const std::string& corpus_id) const {
    std::lock_guard lock(mu_);
    auto it = corpora_.find(corpus_id);
    if (it == corpora_.end()) throw Error(ErrorCode::kCorpusNotFound, "no corpus " + corpus_id);
    return public_corpus(it->second.meta);
}

void Service::delete_corpus(const std::string& corpus_id) {
    std::lock_guard lock(mu_);
    if (!corpora_.contains(corpus_id)) throw Error(ErrorCode::kCorpusNotFound, "no corpus " + corpus_id);
    if (building_.contains(corpus_id)) throw Error(ErrorCode::kCorpusBusy, "corpus is being indexed");
    std::error_code ec;
    fs::remove_all(corpus_dir(corpus_id), ec);
    if (ec) throw Error(ErrorCode::kIoFailure, "cannot delete corpus files: " + ec.message());
    corpora_.erase(corpus_id);
}

json Service::upload_document(const std::string& corpus_id, const std::string& filename, std::string_view bytes,
                              std::optional<Format> format, const Metadata& metadata) {
    if (!format) format = format_from_filename(filename);
    if (!format) throw Error(ErrorCode::kUnsupportedFormat, "unsupported file type: " + filename);
    Metadata md = metadata;
    if (!md.contains("source_uri")) md["source_uri"] = filename;
    // Parse outside the lock; it is pure.
    const Document doc = parse_document(bytes, *format, md);

    std::lock_guard lock(mu_);
    auto it = corpora_.find(corpus_id);
    if (it == corpora_.end()) throw Error(ErrorCode::kCorpusNotFound, "no corpus " + corpus_id);
    if (building_.contains(corpus_id)) throw Error(ErrorCode::kCorpusBusy, "corpus is being indexed");
    json& meta = it->second.meta;

    write_atomic(corpus_dir(corpus_id) / "documents" / (doc.id + ".json"), to_json(doc).dump() + "\n");
    json entry = {{"id", doc.id},
                  {"title", doc.title},
                  {"filename", filename},
                  {"format", format_name(*format)},
                  {"source_uri", doc.source_uri},
                  {"publish_date", doc.publish_date ? json(format_iso_date(*doc.publish_date)) : json(nullptr)},
                  {"sentence_count", doc.sentences.size()},
                  {"bytes", doc.body.size()}};
    bool replaced = false;
    for (auto& d : meta["documents"]) {
        if (d["id"] == doc.id) {
            d = entry;
            replaced = true;
        }
    }
    if (!replaced) meta["documents"].push_back(entry);
    meta["index_state"] = "empty";
    meta["chunk_count"] = 0;
    meta["corpus_digest"] = nullptr;
    meta["updated_at"] = now();
    it->second.snapshot.reset();
    save_corpus_meta(corpus_id, meta);
    return entry;
}

json Service::build_index(const std::string& corpus_id) {
    json meta;
    {
        std::lock_guard lock(mu_);
        auto it = corpora_.find(corpus_id);
        if (it == corpora_.end()) throw Error(ErrorCode::kCorpusNotFound, "no corpus " + corpus_id);
        if (building_.contains(corpus_id)) throw Error(ErrorCode::kCorpusBusy, "corpus is already being indexed");
        if (it->second.meta["documents"].empty()) {
            throw Error(ErrorCode::kEmptyCorpus, "corpus has no documents to index");
        }
        building_.insert(corpus_id);
        it->second.meta["index_state"] = "building";
        it->second.meta["updated_at"] = now();
        try {
            save_corpus_meta(corpus_id, it->second.meta);
        } catch (...) {
            building_.erase(corpus_id);
            throw;
        }
        meta = it->second.meta;
    }

    try {
        BuildOptions opts;
        opts.chunking = chunk_config_from_json(meta["chunk_config"], config_.chunking);
        const auto docs = load_documents(corpus_id, meta);
        auto snap = build_snapshot(docs, opts, providers_.embedder.get(), providers_.llm(config_.default_llm));

        std::string lines;
        for (const auto& doc : docs) {
            for (const auto& [id, c] : snap->chunks) {
                if (c.doc_id == doc.id) lines += to_json(c).dump() + "\n";
            }
        }
        write_atomic(corpus_dir(corpus_id) / "chunks.jsonl", lines);
        persist_indexes(corpus_dir(corpus_id) / "index", snap->sparse, snap->dense ? &*snap->dense : nullptr);

        std::lock_guard lock(mu_);
        auto& rec = corpora_.at(corpus_id);
        rec.meta["index_state"] = "ready";
        rec.meta["chunk_count"] = snap->chunks.size();
        rec.meta["corpus_digest"] = snap->sparse.corpus_id();
        rec.meta["dense"] = snap->dense.has_value();
        rec.meta["last_error"] = nullptr;
        rec.meta["updated_at"] = now();
        rec.snapshot = std::move(snap);
        building_.erase(corpus_id);
        save_corpus_meta(corpus_id, rec.meta);
        return public_corpus(rec.meta);
    } catch (const Error& e) {
        std::lock_guard lock(mu_);
        auto& rec = corpora_.at(corpus_id);
        rec.meta["index_state"] = "empty";
        rec.meta["last_error"] = error_record(e, now());
        rec.snapshot.reset();
        building_.erase(corpus_id);
        save_corpus_meta(corpus_id, rec.meta);
        throw;
    }
}

json Service::list_chunks(const std::string& corpus_id) const {
    std::shared_ptr<const CorpusSnapshot> snap;
    json meta;
    {
        std::lock_guard lock(mu_);
        auto it = corpora_.find(corpus_id);
        if (it == corpora_.end()) throw Error(ErrorCode::kCorpusNotFound, "no corpus " + corpus_id);
        snap = it->second.snapshot;
        meta = it->second.meta;
    }
    json chunks = json::array();
    if (snap) {
        for (const auto& d : meta["documents"]) {
            const std::string doc_id = d["id"].get<std::string>();
            for (const auto& [id, c] : snap->chunks) {
                if (c.doc_id == doc_id) chunks.push_back(to_json(c));
            }
        }
    }
    return {{"corpus_id", corpus_id}, {"index_state", meta["index_state"]}, {"chunks", chunks}};
}

std::shared_ptr<const CorpusSnapshot> Service::snapshot(const std::string& corpus_id) const {
    std::lock_guard lock(mu_);
    auto it = corpora_.find(corpus_id);
    if (it == corpora_.end()) throw Error(ErrorCode::kCorpusNotFound, "no corpus " + corpus_id);
    if (!it->second.snapshot) throw Error(ErrorCode::kCorpusNotReady, "corpus " + corpus_id + " is not indexed");
    return it->second.snapshot;
}

json Service::create_conversation(const std::string& corpus_id, const json& retrieval_config,
                                  const json& generation_config) {
    json gen = generation_config.is_object() ? generation_config : json::object();
    if (!gen.contains("llm")) gen["llm"] = config_.default_llm;
    if (!gen.contains("judger")) gen["judger"] = config_.default_judger;
    for (const char* role : {"llm", "judger"}) {
        if (!gen[role].is_string() || providers_.llm(gen[role].get<std::string>()) == nullptr) {
            throw Error(ErrorCode::kInvalidArgument, std::string("unknown ") + role + " provider");
        }
    }
    const json retr = retrieval_config.is_object() ? retrieval_config : json::object();
    // Reject bad settings now rather than on the first message.
    apply_pipeline_overrides(config_.pipeline, retr, gen, gen.value("citation", json()));

    std::lock_guard lock(mu_);
    if (!corpora_.contains(corpus_id)) throw Error(ErrorCode::kCorpusNotFound, "no corpus " + corpus_id);
    const std::string id = new_id("conv");
    json meta = {{"id", id},
                 {"corpus_id", corpus_id},
                 {"created_at", now()},
                 {"retrieval_config", retr},
                 {"generation_config", gen}};
    write_atomic(conversation_dir(id) / "conversation.json", meta.dump(2) + "\n");
    ConversationRecord rec;
    rec.meta = meta;
    conversations_.emplace(id, std::move(rec));
    json out = meta;
    out["turns"] = json::array();
    return out;
}

json Service::get_conversation(const std::string& conversation_id) const {
    std::lock_guard lock(mu_);
    auto it = conversations_.find(conversation_id);
    if (it == conversations_.end()) {
        throw Error(ErrorCode::kConversationNotFound, "no conversation " + conversation_id);
    }
    json out = it->second.meta;
    out["turns"] = it->second.turns;
    return out;
}

void Service::validate_message(const std::string& conversation_id, const std::string& query) const {
    std::lock_guard lock(mu_);
    auto it = conversations_.find(conversation_id);
    if (it == conversations_.end()) {
        throw Error(ErrorCode::kConversationNotFound, "no conversation " + conversation_id);
    }
    const std::string corpus_id = it->second.meta["corpus_id"].get<std::string>();
    auto c = corpora_.find(corpus_id);
    if (c == corpora_.end()) throw Error(ErrorCode::kCorpusNotFound, "no corpus " + corpus_id);
    if (!c->second.snapshot) throw Error(ErrorCode::kCorpusNotReady, "corpus " + corpus_id + " is not indexed");
    if (text::is_blank(query)) throw Error(ErrorCode::kEmptyQuery, "query is empty");
}

TurnOutcome Service::handle_message(const std::string& conversation_id, const std::string& query,
                                    const EventSink& sink) {
    validate_message(conversation_id, query);
    std::shared_ptr<std::mutex> turn_mutex;
    {
        std::lock_guard lock(mu_);
        turn_mutex = conversations_.at(conversation_id).turn_mutex;
    }
    std::lock_guard turn_lock(*turn_mutex);

    json meta;
    std::vector<ChatMessage> history;
    std::shared_ptr<const CorpusSnapshot> snap;
    std::size_t turn_index = 0;
    {
        std::lock_guard lock(mu_);
        const auto& rec = conversations_.at(conversation_id);
        meta = rec.meta;
        turn_index = rec.turns.size();
        for (const auto& t : rec.turns) {
            if (t.value("status", "") != "ok") continue;
            history.push_back({"user", t["query"].get<std::string>()});
            history.push_back({"assistant", t["answer"]["raw"].get<std::string>()});
        }
        auto c = corpora_.find(meta["corpus_id"].get<std::string>());
        if (c == corpora_.end() || !c->second.snapshot) {
            throw Error(ErrorCode::kCorpusNotReady, "corpus is not indexed");
        }
        snap = c->second.snapshot;
    }

    const json& gen = meta["generation_config"];
    const PipelineConfig pc = apply_pipeline_overrides(config_.pipeline, meta["retrieval_config"], gen,
                                                       gen.value("citation", json()));
    PipelineProviders pp;
    pp.generator = providers_.llm(gen.value("llm", config_.default_llm));
    pp.judger = providers_.llm(gen.value("judger", config_.default_judger));
    pp.rewriter = pp.generator;
    pp.embedder = providers_.embedder.get();

    const std::string started = now();
    TurnOutcome outcome = run_turn(query, history, *snap, pp, pc, hooks_.clock, sink);

    json events = json::array();
    for (const auto& e : outcome.events) events.push_back(e.to_json());
    json turn = {{"index", turn_index},
                 {"query", query},
                 {"status", outcome.ok ? "ok" : "error"},
                 {"created_at", started},
                 {"answer", outcome.ok ? outcome.answer : json(nullptr)},
                 {"error", outcome.ok ? json(nullptr)
                                      : json{{"code", outcome.error_code}, {"message", outcome.error_message}}},
                 {"events", events}};
    append_line(conversation_dir(conversation_id) / "turns.jsonl", turn.dump());
    std::lock_guard lock(mu_);
    conversations_.at(conversation_id).turns.push_back(std::move(turn));
    return outcome;
}

}  // namespace attrag
