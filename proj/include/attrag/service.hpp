// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "attrag/config.hpp"
#include "attrag/ingest.hpp"
#include "attrag/pipeline.hpp"

namespace attrag {

/// Injection points that make runs reproducible.
struct ServiceHooks {
    Clock clock;                                         // default: utc_now_iso
    std::function<std::string(std::string_view)> new_id;  // argument is a prefix such as "cor"
};

/// Corpus and conversation management over a directory of JSON files:
///
///   <data_dir>/corpora/<id>/corpus.json           metadata and index state
///   <data_dir>/corpora/<id>/documents/<doc>.json  parsed documents
///   <data_dir>/corpora/<id>/chunks.jsonl          enriched chunks
///   <data_dir>/corpora/<id>/index/                persisted indexes
///   <data_dir>/conversations/<id>/conversation.json
///   <data_dir>/conversations/<id>/turns.jsonl     one line per turn
///
/// Thread-safe. Index builds are exclusive per corpus; turns are serialized
/// per conversation and run in parallel across conversations.
class Service {
  public:
    Service(ServiceConfig config, ProviderRegistry providers, ServiceHooks hooks = {});

    nlohmann::json create_corpus(const std::string& name, const nlohmann::json& chunk_config = nullptr);
    nlohmann::json list_corpora() const;
    nlohmann::json get_corpus(const std::string& corpus_id) const;
    void delete_corpus(const std::string& corpus_id);

    /// Parses and stores a document; the format is taken from the filename
    /// when not given. Invalidates a built index. Throws kUnsupportedFormat.
    nlohmann::json upload_document(const std::string& corpus_id, const std::string& filename, std::string_view bytes,
                                   std::optional<Format> format = std::nullopt, const Metadata& metadata = {});

    /// Chunks, decontextualizes, indexes and persists; runs in the calling
    /// thread. Throws kCorpusBusy while another build of the corpus runs and
    /// kEmptyCorpus when there are no documents.
    nlohmann::json build_index(const std::string& corpus_id);

    nlohmann::json list_chunks(const std::string& corpus_id) const;

    /// The loaded index of a ready corpus; throws kCorpusNotReady otherwise.
    std::shared_ptr<const CorpusSnapshot> snapshot(const std::string& corpus_id) const;

    nlohmann::json create_conversation(const std::string& corpus_id, const nlohmann::json& retrieval_config = nullptr,
                                       const nlohmann::json& generation_config = nullptr);
    nlohmann::json get_conversation(const std::string& conversation_id) const;

    /// Throws kConversationNotFound, kCorpusNotReady or kEmptyQuery before
    /// any event; everything later is reported through events.
    TurnOutcome handle_message(const std::string& conversation_id, const std::string& query,
                               const EventSink& sink = {});

    /// Pre-flight checks of handle_message without running the turn.
    void validate_message(const std::string& conversation_id, const std::string& query) const;

    const ServiceConfig& config() const { return config_; }
    ProviderRegistry& providers() { return providers_; }

  private:
    struct CorpusRecord {
        nlohmann::json meta;  // the corpus.json document
        std::shared_ptr<const CorpusSnapshot> snapshot;
    };
    struct ConversationRecord {
        nlohmann::json meta;
        std::vector<nlohmann::json> turns;
        std::shared_ptr<std::mutex> turn_mutex = std::make_shared<std::mutex>();
    };

    std::filesystem::path corpus_dir(const std::string& id) const;
    std::filesystem::path conversation_dir(const std::string& id) const;
    void save_corpus_meta(const std::string& id, const nlohmann::json& meta) const;
    void load_all();
    std::shared_ptr<const CorpusSnapshot> load_snapshot(const std::string& id, const nlohmann::json& meta) const;
    std::vector<Document> load_documents(const std::string& id, const nlohmann::json& meta) const;
    std::string now() const;
    std::string new_id(std::string_view prefix) const;
    nlohmann::json public_corpus(const nlohmann::json& meta) const;

    ServiceConfig config_;
    ProviderRegistry providers_;
    ServiceHooks hooks_;

    mutable std::mutex mu_;
    std::map<std::string, CorpusRecord> corpora_;
    std::map<std::string, ConversationRecord> conversations_;
    std::set<std::string> building_;
};

/// HTTP status used for an error code.
int http_status_for(const std::string& error_code);

}  // namespace attrag
