// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "attrag/chunking.hpp"
#include "attrag/http_providers.hpp"
#include "attrag/pipeline.hpp"

namespace attrag {

/// "mock" selects ScriptedLlm; "http" the JSON-over-HTTP client.
struct LlmSpec {
    std::string kind = "mock";
    HttpProviderConfig http;
};

/// "hashing" (offline feature hashing), "http", or "none" for sparse only.
struct EmbedderSpec {
    std::string kind = "hashing";
    std::size_t dims = 256;
    HttpProviderConfig http;
};

struct ServerSpec {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string static_dir;  // served at "/" when set
};

struct ServiceConfig {
    std::filesystem::path data_dir = "attrag-data";
    std::map<std::string, LlmSpec> llms{{"mock", {}}};
    EmbedderSpec embedder;
    std::string default_llm = "mock";
    std::string default_judger = "mock";
    ChunkConfig chunking;
    PipelineConfig pipeline;
    ServerSpec server;
};

/// Replaces "${NAME}" with the value of environment variable NAME (empty
/// when unset).
std::string expand_env(std::string_view s);

/// Parses a configuration document. Every field is optional:
///
///   {"data_dir": "...",
///    "llms": {"<name>": {"kind": "mock"|"http", "base_url", "path", "model",
///                        "api_key": "${ENV_VAR}", "timeout_s"}},
///    "embedder": {"kind": "hashing"|"http"|"none", "dims", "base_url", ...},
///    "defaults": {"llm", "judger",
///                 "chunking": {"strategy", "target_size", "overlap", "breakpoint_percentile"},
///                 "retrieval": {"k_per_path", "k_final", "k_const", "use_dense", "judge",
///                               "rewrite_modes", "max_evidence_sentences", "evidence_scorer"},
///                 "generation": {"prompt_budget", "stream", "timeout_ms"},
///                 "citation": {"tau", "max_per_sentence", "cite_summary", "cite_headings"}},
///    "server": {"host", "port", "static_dir"}}
///
/// Throws kInvalidArgument for values of the wrong type.
ServiceConfig parse_config(const nlohmann::json& j);

/// Reads a JSON config file (or defaults when `path` is empty), then
/// applies environment overrides:
///
///   ATTRAG_DATA_DIR, ATTRAG_HOST, ATTRAG_PORT, ATTRAG_LLM (default llm name),
///   ATTRAG_LLM_BASE_URL / ATTRAG_LLM_MODEL / ATTRAG_LLM_API_KEY (defines an
///   "env" http llm and makes it the default), ATTRAG_EMBEDDER (kind),
///   ATTRAG_EMBEDDER_BASE_URL / ATTRAG_EMBEDDER_MODEL / ATTRAG_EMBEDDER_DIMS.
ServiceConfig load_config(const std::filesystem::path& path);

/// Overrides of the pipeline defaults accepted per conversation; the same
/// keys as the "retrieval", "generation" and "citation" config sections.
PipelineConfig apply_pipeline_overrides(PipelineConfig base, const nlohmann::json& retrieval,
                                        const nlohmann::json& generation, const nlohmann::json& citation);

struct ProviderRegistry {
    std::map<std::string, std::shared_ptr<LlmProvider>> llms;
    std::shared_ptr<Embedder> embedder;  // null disables the dense path

    LlmProvider* llm(const std::string& name) const;
};

ProviderRegistry make_providers(const ServiceConfig& config);

}  // namespace attrag
