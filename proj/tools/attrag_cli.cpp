// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: corpus management, one-shot questions through the
// full pipeline, index maintenance and the HTTP server.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "attrag/error.hpp"
#include "attrag/http_server.hpp"
#include "attrag/indexing.hpp"
#include "attrag/service.hpp"
#include "attrag/wire.hpp"

namespace {

using nlohmann::json;
using attrag::Error;
using attrag::ErrorCode;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void print_answer(const json& answer) {
    std::cout << answer["annotated_text"].get<std::string>() << "\n";
    const auto& groups = answer["groups"];
    if (!groups.empty()) {
        std::cout << "\nSources\n";
        for (const auto& g : groups) {
            std::cout << g["label"].get<std::string>() << " " << g.value("title", json("")).get<std::string>();
            if (g["publish_date"].is_string()) std::cout << " (" << g["publish_date"].get<std::string>() << ")";
            if (g["source_uri"].is_string()) std::cout << "  " << g["source_uri"].get<std::string>();
            std::cout << "\n";
            std::set<std::pair<std::size_t, std::size_t>> shown;
            for (const auto& s : g["spans"]) {
                if (!shown.insert({s["span"][0].get<std::size_t>(), s["span"][1].get<std::size_t>()}).second) continue;
                std::cout << "    " << s["span"][0] << "-" << s["span"][1] << "  " << s["text"].get<std::string>()
                          << "\n";
            }
        }
    }
    std::vector<std::size_t> unsupported;
    auto collect = [&](const json& sentences) {
        for (const auto& s : sentences) {
            if (s["unsupported"].get<bool>()) unsupported.push_back(s["index"].get<std::size_t>());
        }
    };
    collect(answer["summary"]["sentences"]);
    for (const auto& sec : answer["sections"]) collect(sec["sentences"]);
    if (!unsupported.empty()) {
        std::cout << "\nUnsupported sentences:";
        for (auto i : unsupported) std::cout << " " << i;
        std::cout << "\n";
    }
}

attrag::HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attribution-first retrieval-augmented question answering"};
    app.require_subcommand(1);
    std::string config_path;
    std::string data_dir;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--data-dir", data_dir, "Storage directory (overrides the config)");

    auto* corpus = app.add_subcommand("corpus", "Manage corpora");
    corpus->require_subcommand(1);

    auto* create = corpus->add_subcommand("create", "Create an empty corpus");
    std::string name, strategy;
    std::size_t target_size = 0, overlap = 0;
    double percentile = -1;
    create->add_option("name", name)->required();
    create->add_option("--strategy", strategy, "semantic or fixed");
    create->add_option("--target-size", target_size, "Sentences per chunk (fixed)");
    create->add_option("--overlap", overlap, "Shared sentences between chunks (fixed)");
    create->add_option("--percentile", percentile, "Breakpoint percentile (semantic)");

    auto* add = corpus->add_subcommand("add", "Upload documents");
    std::string corpus_id, format, publish_date, source_uri;
    std::vector<std::string> files;
    add->add_option("corpus", corpus_id)->required();
    add->add_option("files", files)->required()->check(CLI::ExistingFile);
    add->add_option("--format", format, "text, markdown, html or json");
    add->add_option("--publish-date", publish_date, "YYYY-MM-DD");
    add->add_option("--source-uri", source_uri);

    auto* build = corpus->add_subcommand("build", "Chunk and index a corpus");
    build->add_option("corpus", corpus_id)->required();

    auto* list = corpus->add_subcommand("list", "List corpora");

    auto* chunks = corpus->add_subcommand("chunks", "Print the chunks of a built corpus");
    chunks->add_option("corpus", corpus_id)->required();

    auto* ask = app.add_subcommand("ask", "Answer a question with citations");
    std::string query, conversation_id;
    bool as_json = false, trace = false;
    std::vector<std::string> modes;
    ask->add_option("--corpus", corpus_id, "Corpus to search");
    ask->add_option("--conversation", conversation_id, "Continue an existing conversation");
    ask->add_option("query", query)->required();
    ask->add_flag("--json", as_json, "Print the annotated answer as JSON");
    ask->add_flag("--trace", trace, "Print every trace event");
    ask->add_option("--rewrite", modes, "Query rewrites: expansion, decomposition, disambiguation, abstraction");

    auto* index = app.add_subcommand("index", "Index maintenance");
    index->require_subcommand(1);
    auto* index_build = index->add_subcommand("build", "Build the index of a corpus");
    index_build->add_option("--corpus", corpus_id)->required();
    auto* index_inspect = index->add_subcommand("inspect", "Verify and describe an index directory");
    std::string index_dir;
    index_inspect->add_option("--corpus", corpus_id);
    index_inspect->add_option("dir", index_dir);

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    std::string host, static_dir;
    int port = -1;
    serve->add_option("--host", host);
    serve->add_option("--port", port);
    serve->add_option("--static-dir", static_dir, "Directory served at /");

    CLI11_PARSE(app, argc, argv);

    try {
        attrag::ServiceConfig cfg = attrag::load_config(config_path);
        if (!data_dir.empty()) cfg.data_dir = data_dir;

        if (index_inspect->parsed()) {
            std::filesystem::path dir = index_dir;
            if (dir.empty()) {
                if (corpus_id.empty()) throw Error(ErrorCode::kInvalidArgument, "give an index directory or --corpus");
                dir = cfg.data_dir / "corpora" / corpus_id / "index";
            }
            std::cout << attrag::inspect_indexes(dir).dump(2) << "\n";
            return 0;
        }

        auto providers = attrag::make_providers(cfg);
        attrag::Service service(cfg, providers);

        if (create->parsed()) {
            json cc = json::object();
            if (!strategy.empty()) cc["strategy"] = strategy;
            if (target_size > 0) cc["target_size"] = target_size;
            if (overlap > 0) cc["overlap"] = overlap;
            if (percentile >= 0) cc["breakpoint_percentile"] = percentile;
            const json c = service.create_corpus(name, cc);
            std::cout << c["id"].get<std::string>() << "\n";
        } else if (add->parsed()) {
            attrag::Metadata md;
            if (!publish_date.empty()) md["publish_date"] = publish_date;
            if (!source_uri.empty()) md["source_uri"] = source_uri;
            std::optional<attrag::Format> fmt;
            if (!format.empty()) {
                fmt = attrag::parse_format(format);
                if (!fmt) throw Error(ErrorCode::kUnsupportedFormat, "unknown format '" + format + "'");
            }
            for (const auto& f : files) {
                const json d = service.upload_document(corpus_id, f, read_file(f), fmt, md);
                std::cout << d["id"].get<std::string>() << "  " << d["title"].get<std::string>() << "\n";
            }
        } else if (build->parsed() || index_build->parsed()) {
            const json c = service.build_index(corpus_id);
            std::cout << c["id"].get<std::string>() << ": " << c["chunk_count"] << " chunks, index "
                      << c["index_state"].get<std::string>() << "\n";
        } else if (list->parsed()) {
            for (const auto& c : service.list_corpora()) {
                std::cout << c["id"].get<std::string>() << "  " << c["name"].get<std::string>() << "  "
                          << c["index_state"].get<std::string>() << "  " << c["documents"].size() << " documents\n";
            }
        } else if (chunks->parsed()) {
            const json listing = service.list_chunks(corpus_id);
            for (const auto& c : listing["chunks"]) {
                std::cout << c["id"].get<std::string>() << "  [" << c["context_header"].get<std::string>() << "]\n  "
                          << c["enriched_text"].get<std::string>() << "\n";
            }
        } else if (ask->parsed()) {
            if (conversation_id.empty()) {
                if (corpus_id.empty()) throw Error(ErrorCode::kInvalidArgument, "give --corpus or --conversation");
                const json retrieval = modes.empty() ? json::object() : json{{"rewrite_modes", modes}};
                conversation_id = service.create_conversation(corpus_id, retrieval)["id"].get<std::string>();
            }
            const auto outcome = service.handle_message(conversation_id, query, [&](const attrag::TraceEvent& e) {
                if (trace) std::cerr << e.to_json().dump() << "\n";
            });
            if (!outcome.ok) {
                std::cerr << "error: " << outcome.error_code << ": " << outcome.error_message << "\n";
                return 1;
            }
            if (as_json) {
                std::cout << outcome.answer.dump(2) << "\n";
            } else {
                print_answer(outcome.answer);
            }
        } else if (serve->parsed()) {
            attrag::HttpServer server(service, static_dir.empty() ? cfg.server.static_dir : static_dir);
            const std::string h = host.empty() ? cfg.server.host : host;
            const int bound = server.bind(h, port >= 0 ? port : cfg.server.port);
            if (bound < 0) throw Error(ErrorCode::kIoFailure, "cannot bind " + h);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << "listening on http://" << h << ":" << bound << std::endl;
            server.serve();
            g_server = nullptr;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << attrag::error_code_name(e.code()) << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
