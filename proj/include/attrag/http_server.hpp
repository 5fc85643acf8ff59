// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include "attrag/service.hpp"

namespace attrag {

/// REST and server-sent-event front end for a Service.
///
///   POST   /corpora                         {"name", "chunk_config"?}
///   GET    /corpora
///   GET    /corpora/{id}
///   DELETE /corpora/{id}
///   POST   /corpora/{id}/documents          multipart "file" parts (plus optional
///                                           "format", "publish_date", "source_uri",
///                                           "metadata" fields) or JSON
///                                           {"filename", "content", "format"?, "metadata"?}
///   POST   /corpora/{id}/index
///   GET    /corpora/{id}/chunks
///   POST   /conversations                   {"corpus_id", "retrieval_config"?, "generation_config"?}
///   GET    /conversations/{id}
///   POST   /conversations/{id}/messages     {"query", "stream"?}; an SSE stream of
///                                           trace events unless "stream" is false,
///                                           in which case only the terminal payload
///                                           is returned
///
/// Errors are {"code", "message"} with a 4xx/5xx status.
class HttpServer {
  public:
    explicit HttpServer(Service& service, std::string static_dir = {});
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    bool serve();
    void stop();
    void wait_until_ready() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace attrag
