// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <atomic>
#include <future>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "attrag/error.hpp"
#include "attrag/http_server.hpp"
#include "attrag/service.hpp"
#include "support.hpp"

namespace attrag {
namespace {

using nlohmann::json;
using testing::ClimateService;
using testing::make_climate_service;

std::string sse_of(const TurnOutcome& out) {
    std::string s;
    for (const auto& e : out.events) s += e.to_sse();
    return s;
}

std::vector<std::string> stages_of(const TurnOutcome& out) {
    std::vector<std::string> s;
    for (const auto& e : out.events) s.emplace_back(stage_name(e.stage));
    return s;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::kInvalidArgument;
}

TEST(ServiceLifecycle, CreateUploadBuild) {
    auto cs = make_climate_service(false);
    Service& svc = *cs->service;
    EXPECT_EQ(svc.get_corpus(cs->corpus_id)["index_state"], "empty");
    EXPECT_EQ(code_of([&] { svc.snapshot(cs->corpus_id); }), ErrorCode::kCorpusNotReady);
    const json built = svc.build_index(cs->corpus_id);
    EXPECT_EQ(built["index_state"], "ready");
    const json chunks = svc.list_chunks(cs->corpus_id);
    ASSERT_FALSE(chunks["chunks"].empty());
    bool saw_yesterday = false;
    for (const auto& c : chunks["chunks"]) {
        EXPECT_TRUE(c.contains("context_header"));
        if (c["enriched_text"].get<std::string>().find("2025-02-17") != std::string::npos) saw_yesterday = true;
    }
    EXPECT_TRUE(saw_yesterday);
    EXPECT_EQ(svc.list_corpora().size(), 1u);

    // Re-upload invalidates the index.
    svc.upload_document(cs->corpus_id, "extra.txt", "Another note about reefs.");
    EXPECT_EQ(svc.get_corpus(cs->corpus_id)["index_state"], "empty");
}

TEST(ServiceLifecycle, EmptyBuildLeavesStateUnchanged) {
    testing::TempDir tmp;
    ServiceConfig cfg;
    cfg.data_dir = tmp.path();
    Service svc(cfg, make_providers(cfg), testing::deterministic_hooks());
    const std::string id = svc.create_corpus("empty")["id"];
    EXPECT_EQ(code_of([&] { svc.build_index(id); }), ErrorCode::kEmptyCorpus);
    EXPECT_EQ(svc.get_corpus(id)["index_state"], "empty");
    EXPECT_EQ(code_of([&] { svc.get_corpus("nope"); }), ErrorCode::kCorpusNotFound);
    EXPECT_EQ(code_of([&] { svc.upload_document(id, "scan.pdf", "%PDF"); }), ErrorCode::kUnsupportedFormat);
}

TEST(ServiceLifecycle, ConcurrentBuildIsBusy) {
    testing::TempDir tmp;
    ServiceConfig cfg;
    cfg.data_dir = tmp.path();
    ProviderRegistry reg = make_providers(cfg);
    HashingEmbedder base(64);
    auto slow = std::make_shared<InstrumentedEmbedder>(base);
    slow->set_delay(std::chrono::milliseconds(300));
    // Keep `base` alive through the registry's lifetime by owning both here.
    reg.embedder = slow;
    Service svc(cfg, reg, testing::deterministic_hooks());
    const std::string id = svc.create_corpus("slow")["id"];
    svc.upload_document(id, "a.md", "# A\n\nCorals bleach. Reefs die. Fish leave.");
    auto first = std::async(std::launch::async, [&] { return svc.build_index(id); });
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    EXPECT_EQ(code_of([&] { svc.build_index(id); }), ErrorCode::kCorpusBusy);
    EXPECT_EQ(first.get()["index_state"], "ready");
}

TEST(ServiceTurn, GoldenEventsAndAnswer) {
    auto cs = make_climate_service();
    const TurnOutcome out = cs->service->handle_message(cs->conversation_id, testing::kClimateQuery);
    ASSERT_TRUE(out.ok) << out.error_code << ": " << out.error_message;
    EXPECT_EQ(stages_of(out), (std::vector<std::string>{"query_understanding", "retrieval", "utility", "generation",
                                                         "generation", "generation", "generation", "generation",
                                                         "generation", "generation", "generation", "generation",
                                                         "citation"}));
    const std::string sse_diff = testing::check_golden("climate_events.sse", sse_of(out));
    EXPECT_TRUE(sse_diff.empty()) << sse_diff;
    const std::string json_diff = testing::check_golden("climate_answer.json", out.answer.dump(2) + "\n");
    EXPECT_TRUE(json_diff.empty()) << json_diff;

    // The off-topic article is judged useless and never cited.
    for (const auto& g : out.answer["groups"]) EXPECT_NE(g["source_uri"], "markets.json");
    // Every content sentence carries at least one citation.
    for (const auto& sec : out.answer["sections"]) {
        for (const auto& s : sec["sentences"]) {
            if (s["kind"] == "content") EXPECT_FALSE(s["citations"].empty()) << s["text"];
        }
    }
}

TEST(ServiceTurn, ValidationBeforeEvents) {
    auto cs = make_climate_service();
    std::size_t events = 0;
    EXPECT_EQ(code_of([&] { cs->service->handle_message(cs->conversation_id, "  ", [&](auto&) { ++events; }); }),
              ErrorCode::kEmptyQuery);
    EXPECT_EQ(events, 0u);
    EXPECT_EQ(code_of([&] { cs->service->handle_message("conv_missing", "q"); }), ErrorCode::kConversationNotFound);
}

TEST(ServiceTurn, GeneratorOutageThenRecovery) {
    auto cs = make_climate_service();
    cs->generator->set_down("answer");
    const TurnOutcome bad = cs->service->handle_message(cs->conversation_id, testing::kClimateQuery);
    EXPECT_FALSE(bad.ok);
    EXPECT_EQ(bad.error_code, "LlmUnavailable");
    ASSERT_FALSE(bad.events.empty());
    EXPECT_EQ(stage_name(bad.events.back().stage), "error");
    for (const auto& e : bad.events) EXPECT_NE(e.stage, Stage::kCitation);

    cs->generator->set_down("answer", false);
    const TurnOutcome good = cs->service->handle_message(cs->conversation_id, testing::kClimateQuery);
    EXPECT_TRUE(good.ok);
    const json conv = cs->service->get_conversation(cs->conversation_id);
    EXPECT_EQ(conv["turns"].size(), 2u);
}

TEST(ServiceTurn, JudgerOutageDegrades) {
    auto cs = make_climate_service();
    cs->judger->set_down("*");
    const TurnOutcome out = cs->service->handle_message(cs->conversation_id, testing::kClimateQuery);
    EXPECT_TRUE(out.ok);
    bool flagged = false;
    for (const auto& e : out.events) {
        if (e.stage == Stage::kUtility) flagged = e.payload.value("judger_degraded", false);
    }
    EXPECT_TRUE(flagged);
}

TEST(ServiceRestart, ReloadsReadyCorpus) {
    auto cs = make_climate_service();
    const auto before = cs->service->handle_message(cs->conversation_id, testing::kClimateQuery);
    cs->restart();
    EXPECT_EQ(cs->service->get_corpus(cs->corpus_id)["index_state"], "ready");
    const auto after = cs->service->handle_message(cs->conversation_id, testing::kClimateQuery);
    EXPECT_EQ(before.hits, after.hits);
    EXPECT_EQ(before.answer, after.answer);
}

TEST(ServiceErrors, HttpStatusMapping) {
    EXPECT_EQ(http_status_for("CorpusNotFound"), 404);
    EXPECT_EQ(http_status_for("CorpusBusy"), 409);
    EXPECT_EQ(http_status_for("UnsupportedFormat"), 415);
    EXPECT_EQ(http_status_for("EmptyQuery"), 400);
    EXPECT_EQ(http_status_for("LlmUnavailable"), 502);
    EXPECT_EQ(http_status_for("ProviderTimeout"), 504);
    EXPECT_EQ(http_status_for("CorruptIndex"), 500);
}

class HttpFixture : public ::testing::Test {
  protected:
    void SetUp() override {
        cs_ = make_climate_service(false);
        server_ = std::make_unique<HttpServer>(*cs_->service);
        port_ = server_->bind("127.0.0.1", 0);
        ASSERT_GT(port_, 0);
        thread_ = std::thread([this] { server_->serve(); });
        server_->wait_until_ready();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        client_->set_read_timeout(30, 0);
    }
    void TearDown() override {
        server_->stop();
        if (thread_.joinable()) thread_.join();
    }

    std::unique_ptr<ClimateService> cs_;
    std::unique_ptr<HttpServer> server_;
    std::unique_ptr<httplib::Client> client_;
    std::thread thread_;
    int port_ = 0;
};

TEST_F(HttpFixture, RestLifecycleAndSse) {
    auto r = client_->Post("/corpora", R"({"name": "via http"})", "application/json");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 201);
    const std::string id = json::parse(r->body)["id"];

    httplib::MultipartFormDataItems items{
        {"file", testing::read_file(testing::fixture_dir() / "climate" / "heat_stress.md"), "heat_stress.md", "text/markdown"},
        {"publish_date", "2025-02-18", "", ""}};
    r = client_->Post("/corpora/" + id + "/documents", items);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 201) << r->body;

    r = client_->Post("/corpora/" + id + "/documents", R"({"filename": "x.pdf", "content": "zz"})", "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 415);
    EXPECT_EQ(json::parse(r->body)["code"], "UnsupportedFormat");

    r = client_->Post("/corpora/" + id + "/index", "", "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200) << r->body;
    r = client_->Get("/corpora/" + id + "/chunks");
    ASSERT_TRUE(r);
    EXPECT_FALSE(json::parse(r->body)["chunks"].empty());

    r = client_->Post("/conversations", json{{"corpus_id", id}}.dump(), "application/json");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 201);
    const std::string conv = json::parse(r->body)["id"];

    r = client_->Post("/conversations/" + conv + "/messages", R"({"query": "   "})", "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 400);

    r = client_->Post("/conversations/" + conv + "/messages", R"({"query": "Why do corals die?"})", "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_NE(r->get_header_value("Content-Type").find("text/event-stream"), std::string::npos);
    EXPECT_EQ(r->body.rfind("event: query_understanding\n", 0), 0u);
    EXPECT_NE(r->body.find("event: citation\n"), std::string::npos);

    r = client_->Post("/conversations/" + conv + "/messages?stream=false", R"({"query": "Why do corals die?"})",
                      "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(json::parse(r->body)["status"], "ok");

    r = client_->Get("/corpora/nope");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 404);
    r = client_->Delete("/corpora/" + id);
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 204);
}

}  // namespace
}  // namespace attrag
