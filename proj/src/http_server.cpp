// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/http_server.hpp"

#include <httplib.h>

#include "attrag/error.hpp"

namespace attrag {

using nlohmann::json;

struct HttpServer::Impl {
    Service& service;
    httplib::Server server;

    explicit Impl(Service& s) : service(s) {}
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const std::string& code, const std::string& message) {
    send_json(res, http_status_for(code), {{"code", code}, {"message", message}});
}

json body_json(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::kMalformedJson, "request body must be a JSON object");
    return j;
}

std::string str_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
        throw Error(ErrorCode::kInvalidArgument, std::string("missing string field '") + key + "'");
    }
    return j[key].get<std::string>();
}

Metadata metadata_from_json(const json& j) {
    Metadata md;
    if (j.is_null()) return md;
    if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "metadata must be an object");
    for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) throw Error(ErrorCode::kInvalidArgument, "metadata values must be strings");
        md[k] = v.get<std::string>();
    }
    return md;
}

std::optional<Format> format_field(const std::string& name) {
    if (name.empty()) return std::nullopt;
    auto f = parse_format(name);
    if (!f) throw Error(ErrorCode::kUnsupportedFormat, "unknown format '" + name + "'");
    return f;
}

/// Runs a handler and converts thrown errors into JSON error responses.
template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send_error(res, std::string(error_code_name(e.code())), e.what());
        } catch (const std::exception& e) {
            send_error(res, "Internal", e.what());
        }
    };
}

}  // namespace

HttpServer::HttpServer(Service& service, std::string static_dir) : impl_(std::make_unique<Impl>(service)) {
    auto& srv = impl_->server;
    Service& svc = service;

    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Headers", "Content-Type, Accept"},
                             {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
    srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}});
    });

    srv.Post("/corpora", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 const json body = body_json(req);
                 send_json(res, 201, svc.create_corpus(str_field(body, "name"), body.value("chunk_config", json())));
             }));
    srv.Get("/corpora", guarded([&svc](const httplib::Request&, httplib::Response& res) {
                send_json(res, 200, svc.list_corpora());
            }));
    srv.Get(R"(/corpora/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, svc.get_corpus(req.matches[1]));
            }));
    srv.Delete(R"(/corpora/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                   svc.delete_corpus(req.matches[1]);
                   res.status = 204;
               }));
    srv.Post(R"(/corpora/([^/]+)/documents)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 const std::string corpus_id = req.matches[1];
                 json uploaded = json::array();
                 if (req.is_multipart_form_data()) {
                     Metadata md;
                     if (req.has_file("metadata")) {
                         const json j = json::parse(req.get_file_value("metadata").content, nullptr, false);
                         if (j.is_discarded()) throw Error(ErrorCode::kMalformedJson, "metadata is not JSON");
                         md = metadata_from_json(j);
                     }
                     for (const char* key : {"publish_date", "source_uri"}) {
                         if (req.has_file(key)) md[key] = req.get_file_value(key).content;
                     }
                     const auto format =
                         format_field(req.has_file("format") ? req.get_file_value("format").content : "");
                     const auto files = req.get_file_values("file");
                     if (files.empty()) throw Error(ErrorCode::kInvalidArgument, "no 'file' part in upload");
                     for (const auto& f : files) {
                         uploaded.push_back(svc.upload_document(corpus_id, f.filename, f.content, format, md));
                     }
                 } else {
                     const json body = body_json(req);
                     uploaded.push_back(svc.upload_document(corpus_id, str_field(body, "filename"),
                                                            str_field(body, "content"),
                                                            format_field(body.value("format", "")),
                                                            metadata_from_json(body.value("metadata", json()))));
                 }
                 send_json(res, 201, {{"documents", uploaded}});
             }));
    srv.Post(R"(/corpora/([^/]+)/index)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, svc.build_index(req.matches[1]));
             }));
    srv.Get(R"(/corpora/([^/]+)/chunks)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, svc.list_chunks(req.matches[1]));
            }));

    srv.Post("/conversations", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 const json body = body_json(req);
                 send_json(res, 201,
                           svc.create_conversation(str_field(body, "corpus_id"), body.value("retrieval_config", json()),
                                                   body.value("generation_config", json())));
             }));
    srv.Get(R"(/conversations/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, svc.get_conversation(req.matches[1]));
            }));
    srv.Post(R"(/conversations/([^/]+)/messages)",
             guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                 const std::string conv_id = req.matches[1];
                 const json body = body_json(req);
                 if (!body.contains("query") || !body["query"].is_string()) {
                     throw Error(ErrorCode::kEmptyQuery, "missing string field 'query'");
                 }
                 const std::string query = body["query"].get<std::string>();
                 bool stream = body.value("stream", true);
                 if (req.has_param("stream")) stream = req.get_param_value("stream") != "false";
                 svc.validate_message(conv_id, query);

                 if (!stream) {
                     const TurnOutcome out = svc.handle_message(conv_id, query);
                     if (out.ok) {
                         send_json(res, 200, {{"status", "ok"}, {"answer", out.answer}});
                     } else {
                         send_error(res, out.error_code, out.error_message);
                     }
                     return;
                 }
                 res.set_header("Cache-Control", "no-cache");
                 res.set_chunked_content_provider(
                     "text/event-stream", [&svc, conv_id, query](size_t, httplib::DataSink& sink) {
                         bool open = true;
                         auto write = [&](const std::string& s) {
                             if (open) open = sink.write(s.data(), s.size());
                         };
                         try {
                             svc.handle_message(conv_id, query, [&](const TraceEvent& e) { write(e.to_sse()); });
                         } catch (const Error& e) {
                             TraceEvent err{1, Stage::kError, utc_now_iso(),
                                            {{"code", error_code_name(e.code())}, {"message", e.what()}}};
                             write(err.to_sse());
                         }
                         sink.done();
                         return true;
                     });
             }));

    if (!static_dir.empty()) srv.set_mount_point("/", static_dir);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace attrag
