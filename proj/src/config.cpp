// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/config.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>

#include "attrag/error.hpp"
#include "attrag/mock_providers.hpp"
#include "attrag/wire.hpp"

namespace attrag {

using nlohmann::json;

std::string expand_env(std::string_view s) {
    std::string out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const std::size_t open = s.find("${", pos);
        if (open == std::string_view::npos) break;
        const std::size_t close = s.find('}', open + 2);
        if (close == std::string_view::npos) break;
        out.append(s.substr(pos, open - pos));
        const std::string name(s.substr(open + 2, close - open - 2));
        if (const char* v = std::getenv(name.c_str())) out += v;
        pos = close + 1;
    }
    out.append(s.substr(pos));
    return out;
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& into) {
    if (!j.contains(key) || j[key].is_null()) return;
    try {
        into = j[key].get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::kInvalidArgument, std::string("config field '") + key + "' has the wrong type");
    }
}

HttpProviderConfig http_spec(const json& j) {
    HttpProviderConfig h;
    std::string s;
    read(j, "base_url", s);
    h.base_url = expand_env(s);
    s.clear();
    read(j, "path", s);
    h.path = expand_env(s);
    s.clear();
    read(j, "model", s);
    h.model = expand_env(s);
    s.clear();
    read(j, "api_key", s);
    h.api_key = expand_env(s);
    long secs = 60;
    read(j, "timeout_s", secs);
    h.timeout = std::chrono::seconds(secs);
    return h;
}

const char* env(const char* name) {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? v : nullptr;
}

}  // namespace

PipelineConfig apply_pipeline_overrides(PipelineConfig p, const json& r, const json& g, const json& c) {
    if (r.is_object()) {
        read(r, "k_per_path", p.retrieval.k_per_path);
        read(r, "k_final", p.retrieval.k_final);
        read(r, "k_const", p.retrieval.k_const);
        read(r, "use_dense", p.use_dense);
        read(r, "judge", p.judge);
        read(r, "max_evidence_sentences", p.max_evidence_sentences);
        std::string scorer;
        read(r, "evidence_scorer", scorer);
        if (!scorer.empty()) {
            if (scorer != "lexical" && scorer != "embedding") {
                throw Error(ErrorCode::kInvalidArgument, "evidence_scorer must be 'lexical' or 'embedding'");
            }
            p.embedding_evidence_scorer = scorer == "embedding";
        }
        if (r.contains("rewrite_modes")) {
            std::vector<std::string> modes;
            read(r, "rewrite_modes", modes);
            p.rewrite_modes.clear();
            for (const auto& m : modes) {
                const auto k = parse_rewrite_kind(m);
                if (!k) throw Error(ErrorCode::kInvalidArgument, "unknown rewrite mode '" + m + "'");
                p.rewrite_modes.insert(*k);
            }
        }
    }
    if (g.is_object()) {
        read(g, "prompt_budget", p.prompt_budget);
        read(g, "stream", p.stream);
        long ms = p.generation_timeout.count();
        read(g, "timeout_ms", ms);
        p.generation_timeout = std::chrono::milliseconds(ms);
    }
    if (c.is_object()) {
        read(c, "tau", p.citation.tau);
        read(c, "max_per_sentence", p.citation.max_per_sentence);
        read(c, "cite_summary", p.citation.cite_summary);
        read(c, "cite_headings", p.citation.cite_headings);
    }
    if (p.retrieval.k_per_path < 1 || p.retrieval.k_final < 1 || p.retrieval.k_const < 1) {
        throw Error(ErrorCode::kInvalidArgument, "k_per_path, k_final and k_const must be at least 1");
    }
    if (!(p.citation.tau > 0.0 && p.citation.tau <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "tau must lie in (0, 1]");
    }
    return p;
}

ServiceConfig parse_config(const json& j) {
    ServiceConfig cfg;
    if (j.is_null()) return cfg;
    if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
    std::string data_dir;
    read(j, "data_dir", data_dir);
    if (!data_dir.empty()) cfg.data_dir = expand_env(data_dir);

    if (j.contains("llms")) {
        if (!j["llms"].is_object()) throw Error(ErrorCode::kInvalidArgument, "llms must be an object");
        cfg.llms.clear();
        for (const auto& [name, spec] : j["llms"].items()) {
            LlmSpec s;
            read(spec, "kind", s.kind);
            if (s.kind != "mock" && s.kind != "http") {
                throw Error(ErrorCode::kInvalidArgument, "llm '" + name + "' has unknown kind '" + s.kind + "'");
            }
            s.http = http_spec(spec);
            cfg.llms[name] = s;
        }
    }
    if (j.contains("embedder")) {
        const json& e = j["embedder"];
        read(e, "kind", cfg.embedder.kind);
        read(e, "dims", cfg.embedder.dims);
        cfg.embedder.http = http_spec(e);
        if (cfg.embedder.kind != "hashing" && cfg.embedder.kind != "http" && cfg.embedder.kind != "none") {
            throw Error(ErrorCode::kInvalidArgument, "unknown embedder kind '" + cfg.embedder.kind + "'");
        }
    }
    const json d = j.value("defaults", json::object());
    read(d, "llm", cfg.default_llm);
    cfg.default_judger = cfg.default_llm;
    read(d, "judger", cfg.default_judger);
    if (d.contains("chunking")) cfg.chunking = chunk_config_from_json(d["chunking"], cfg.chunking);
    cfg.pipeline = apply_pipeline_overrides(cfg.pipeline, d.value("retrieval", json()), d.value("generation", json()),
                                            d.value("citation", json()));
    const json s = j.value("server", json::object());
    read(s, "host", cfg.server.host);
    read(s, "port", cfg.server.port);
    read(s, "static_dir", cfg.server.static_dir);
    return cfg;
}

ServiceConfig load_config(const std::filesystem::path& path) {
    json j;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::kIoFailure, "cannot read config " + path.string());
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::kMalformedJson, std::string("config is not valid JSON: ") + e.what());
        }
    }
    ServiceConfig cfg = parse_config(j);
    if (const char* v = env("ATTRAG_DATA_DIR")) cfg.data_dir = v;
    if (const char* v = env("ATTRAG_HOST")) cfg.server.host = v;
    if (const char* v = env("ATTRAG_PORT")) cfg.server.port = std::atoi(v);
    if (const char* base = env("ATTRAG_LLM_BASE_URL")) {
        LlmSpec s;
        s.kind = "http";
        s.http.base_url = base;
        if (const char* m = env("ATTRAG_LLM_MODEL")) s.http.model = m;
        if (const char* k = env("ATTRAG_LLM_API_KEY")) s.http.api_key = k;
        cfg.llms["env"] = s;
        cfg.default_llm = cfg.default_judger = "env";
    }
    if (const char* v = env("ATTRAG_LLM")) cfg.default_llm = cfg.default_judger = v;
    if (const char* v = env("ATTRAG_EMBEDDER")) cfg.embedder.kind = v;
    if (const char* v = env("ATTRAG_EMBEDDER_BASE_URL")) cfg.embedder.http.base_url = v;
    if (const char* v = env("ATTRAG_EMBEDDER_MODEL")) cfg.embedder.http.model = v;
    if (const char* v = env("ATTRAG_EMBEDDER_DIMS")) cfg.embedder.dims = static_cast<std::size_t>(std::atol(v));
    if (!cfg.llms.contains(cfg.default_llm)) {
        throw Error(ErrorCode::kInvalidArgument, "default llm '" + cfg.default_llm + "' is not configured");
    }
    if (!cfg.llms.contains(cfg.default_judger)) {
        throw Error(ErrorCode::kInvalidArgument, "default judger '" + cfg.default_judger + "' is not configured");
    }
    return cfg;
}

LlmProvider* ProviderRegistry::llm(const std::string& name) const {
    auto it = llms.find(name);
    return it == llms.end() ? nullptr : it->second.get();
}

ProviderRegistry make_providers(const ServiceConfig& config) {
    ProviderRegistry r;
    for (const auto& [name, spec] : config.llms) {
        if (spec.kind == "http") {
            r.llms[name] = std::make_shared<HttpLlm>(spec.http);
        } else {
            r.llms[name] = std::make_shared<ScriptedLlm>();
        }
    }
    if (config.embedder.kind == "hashing") {
        r.embedder = std::make_shared<HashingEmbedder>(config.embedder.dims);
    } else if (config.embedder.kind == "http") {
        r.embedder = std::make_shared<HttpEmbedder>(config.embedder.http, config.embedder.dims);
    }
    return r;
}

}  // namespace attrag
