// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/http_providers.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "attrag/error.hpp"

namespace attrag {

using nlohmann::json;

namespace {

httplib::Client make_client(const HttpProviderConfig& config) {
    httplib::Client cli(config.base_url);
    const auto secs = static_cast<time_t>(config.timeout.count());
    cli.set_connection_timeout(secs, 0);
    cli.set_read_timeout(secs, 0);
    cli.set_write_timeout(secs, 0);
    return cli;
}

httplib::Headers auth_headers(const HttpProviderConfig& config) {
    httplib::Headers h;
    if (!config.api_key.empty()) h.emplace("Authorization", "Bearer " + config.api_key);
    return h;
}

[[noreturn]] void throw_transport(httplib::Error err, ErrorCode unavailable) {
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
        throw Error(ErrorCode::kProviderTimeout, "provider request timed out or the connection dropped: " +
                                                     httplib::to_string(err));
    }
    throw Error(unavailable, "provider request failed: " + httplib::to_string(err));
}

json chat_body(const HttpProviderConfig& config, const std::vector<ChatMessage>& messages, bool stream) {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    return {{"model", config.model}, {"messages", std::move(msgs)}, {"stream", stream}};
}

std::string content_of(const json& j) {
    if (j.contains("content") && j["content"].is_string()) return j["content"].get<std::string>();
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& c = j["choices"][0];
        if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string()) {
            return c["message"]["content"].get<std::string>();
        }
    }
    throw Error(ErrorCode::kLlmUnavailable, "provider response has no content field");
}

std::string delta_of(const json& j) {
    if (j.contains("delta") && j["delta"].is_string()) return j["delta"].get<std::string>();
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
        const auto& c = j["choices"][0];
        if (c.contains("delta") && c["delta"].contains("content") && c["delta"]["content"].is_string()) {
            return c["delta"]["content"].get<std::string>();
        }
    }
    return {};
}

}  // namespace

HttpLlm::HttpLlm(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.path.empty()) config_.path = "/v1/chat/completions";
}

std::string HttpLlm::complete(const std::vector<ChatMessage>& messages) {
    auto cli = make_client(config_);
    auto res = cli.Post(config_.path, auth_headers(config_), chat_body(config_, messages, false).dump(),
                        "application/json");
    if (!res) throw_transport(res.error(), ErrorCode::kLlmUnavailable);
    if (res->status != 200) {
        throw Error(ErrorCode::kLlmUnavailable, "provider returned HTTP " + std::to_string(res->status));
    }
    try {
        return content_of(json::parse(res->body));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kLlmUnavailable, std::string("unparseable provider response: ") + e.what());
    }
}

std::string HttpLlm::stream(const std::vector<ChatMessage>& messages, const DeltaCallback& on_delta) {
    auto cli = make_client(config_);
    httplib::Request req;
    req.method = "POST";
    req.path = config_.path;
    req.headers = auth_headers(config_);
    req.headers.emplace("Accept", "text/event-stream");
    req.set_header("Content-Type", "application/json");
    req.body = chat_body(config_, messages, true).dump();

    std::string pending;
    std::string full;
    std::string parse_error;
    req.content_receiver = [&](const char* data, size_t len, uint64_t, uint64_t) {
        pending.append(data, len);
        std::size_t nl;
        while ((nl = pending.find('\n')) != std::string::npos) {
            std::string line = pending.substr(0, nl);
            pending.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.starts_with("data:")) continue;
            std::string payload = line.substr(5);
            if (!payload.empty() && payload.front() == ' ') payload.erase(0, 1);
            if (payload == "[DONE]") return true;
            try {
                const std::string delta = delta_of(json::parse(payload));
                if (!delta.empty()) {
                    full += delta;
                    if (on_delta) on_delta(delta);
                }
            } catch (const json::exception& e) {
                parse_error = e.what();
                return false;
            }
        }
        return true;
    };

    httplib::Response res;
    httplib::Error err = httplib::Error::Success;
    const bool ok = cli.send(req, res, err);
    if (!parse_error.empty()) throw Error(ErrorCode::kLlmUnavailable, "malformed stream event: " + parse_error);
    if (!ok) throw_transport(err, ErrorCode::kLlmUnavailable);
    if (res.status != 200) {
        throw Error(ErrorCode::kLlmUnavailable, "provider returned HTTP " + std::to_string(res.status));
    }
    return full;
}

HttpEmbedder::HttpEmbedder(HttpProviderConfig config, std::size_t dims)
    : config_(std::move(config)), dims_(dims) {
    if (config_.path.empty()) config_.path = "/v1/embeddings";
}

std::vector<std::vector<float>> HttpEmbedder::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    auto cli = make_client(config_);
    const json body = {{"model", config_.model}, {"input", texts}};
    auto res = cli.Post(config_.path, auth_headers(config_), body.dump(), "application/json");
    if (!res) throw_transport(res.error(), ErrorCode::kEmbedderUnavailable);
    if (res->status != 200) {
        throw Error(ErrorCode::kEmbedderUnavailable, "embedding provider returned HTTP " + std::to_string(res->status));
    }
    std::vector<std::vector<float>> out;
    try {
        const json j = json::parse(res->body);
        if (j.contains("vectors")) {
            out = j["vectors"].get<std::vector<std::vector<float>>>();
        } else if (j.contains("data")) {
            for (const auto& item : j["data"]) out.push_back(item.at("embedding").get<std::vector<float>>());
        } else {
            throw Error(ErrorCode::kEmbedderUnavailable, "embedding response has no vectors");
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kEmbedderUnavailable, std::string("unparseable embedding response: ") + e.what());
    }
    if (out.size() != texts.size()) {
        throw Error(ErrorCode::kEmbedderUnavailable, "embedding provider returned the wrong number of vectors");
    }
    for (const auto& v : out) {
        if (v.size() != dims_) {
            throw Error(ErrorCode::kDimensionMismatch, "embedding provider returned " + std::to_string(v.size()) +
                                                           " dims, expected " + std::to_string(dims_));
        }
    }
    return out;
}

}  // namespace attrag
