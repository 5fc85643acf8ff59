// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "attrag/error.hpp"
#include "attrag/query.hpp"
#include "attrag/retrieval.hpp"
#include "support.hpp"

namespace attrag {
namespace {

Chunk chunk_of(const Document& d, const std::string& id) {
    Chunk c;
    c.id = id;
    c.doc_id = d.id;
    c.start = 0;
    c.end = d.body.size();
    c.sentence_count = d.sentences.size();
    c.text = c.enriched_text = d.body;
    return c;
}

TEST(Rewrite, NoModesKeepsOriginalOnly) {
    const auto b = rewrite_query("How does climate change affect corals?", {}, nullptr);
    EXPECT_EQ(b.original, "How does climate change affect corals?");
    EXPECT_TRUE(b.variants.empty());
    EXPECT_EQ(b.weighted_texts().size(), 1u);
    EXPECT_EQ(b.weighted_texts()[0].second, 1.0);
}

TEST(Rewrite, ExpansionVariants) {
    ScriptedLlm llm;
    llm.add_rule({"query_expansion", "", R"(["coral bleaching causes", "ocean temperature rise corals"])"});
    const auto b = rewrite_query("How does climate change affect corals?", {RewriteKind::kExpansion}, &llm);
    ASSERT_EQ(b.variants.size(), 2u);
    for (const auto& v : b.variants) {
        EXPECT_EQ(v.kind, RewriteKind::kExpansion);
        EXPECT_EQ(v.weight, 0.5);
    }
    EXPECT_EQ(b.variants[0].text, "coral bleaching causes");
}

TEST(Rewrite, MalformedOutputBecomesWarning) {
    ScriptedLlm llm;
    llm.add_rule({"query_expansion", "", "```json\n[\"warming seas\", \"WARMING  seas\"]\n```"});
    llm.add_rule({"query_decomposition", "", "not a list at all"});
    const auto b =
        rewrite_query("q corals", {RewriteKind::kExpansion, RewriteKind::kDecomposition}, &llm);
    ASSERT_EQ(b.variants.size(), 1u);  // case and spacing duplicates collapse
    EXPECT_EQ(b.variants[0].text, "warming seas");
    ASSERT_EQ(b.warnings.size(), 1u);
    EXPECT_NE(b.warnings[0].find("decomposition"), std::string::npos);
}

TEST(Rewrite, EmptyQueryAndOutage) {
    EXPECT_THROW(rewrite_query("   ", {}, nullptr), Error);
    ScriptedLlm llm;
    llm.set_down("*");
    const auto b = rewrite_query("corals", {RewriteKind::kAbstraction}, &llm);
    EXPECT_TRUE(b.variants.empty());
    EXPECT_EQ(b.warnings.size(), 1u);
}

TEST(Rewrite, HistoryRenderedIntoPrompt) {
    ScriptedLlm llm;
    rewrite_query("and reefs?", {RewriteKind::kDisambiguation}, &llm, {{"user", "Tell me about corals"}});
    ASSERT_EQ(llm.calls().size(), 1u);
    EXPECT_NE(llm.calls()[0].find("Tell me about corals"), std::string::npos);
}

TEST(Rrf, HandValues) {
    const auto both = rrf_fuse({{{"a", "b"}, 1.0, ""}, {{"a", "c"}, 1.0, ""}});
    ASSERT_EQ(both[0].chunk_id, "a");
    EXPECT_NEAR(both[0].score, 2.0 / 61, 1e-12);
    const auto one = rrf_fuse({{{"x"}, 1.0, ""}});
    EXPECT_NEAR(one[0].score, 1.0 / 61, 1e-12);
}

TEST(Rrf, SingleRankingKeepsOrder) {
    const std::vector<std::string> ids{"q", "b", "z", "a"};
    const auto fused = rrf_fuse({{ids, 1.0, ""}});
    ASSERT_EQ(fused.size(), ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) EXPECT_EQ(fused[i].chunk_id, ids[i]);
}

TEST(Rrf, DisjointVariantsInterleave) {
    // Original (w=1) finds a, b; a variant (w=0.5) finds c, d.
    // a=1/61, b=1/62, c=0.5/61, d=0.5/62: order a b c d.
    const auto fused = rrf_fuse({{{"a", "b"}, 1.0, "orig"}, {{"c", "d"}, 0.5, "var"}});
    std::vector<std::string> order;
    for (const auto& h : fused) order.push_back(h.chunk_id);
    EXPECT_EQ(order, (std::vector<std::string>{"a", "b", "c", "d"}));
    EXPECT_EQ(fused[2].variant_text, "var");
    // With equal weights the ranks interleave: a c b d, ties by id.
    const auto eq = rrf_fuse({{{"a", "b"}, 1.0, ""}, {{"c", "d"}, 1.0, ""}});
    order.clear();
    for (const auto& h : eq) order.push_back(h.chunk_id);
    EXPECT_EQ(order, (std::vector<std::string>{"a", "c", "b", "d"}));
}

TEST(Multipath, SparseOnlyAndTruncation) {
    std::vector<Chunk> chunks;
    for (int i = 0; i < 10; ++i) {
        Chunk c;
        c.id = "c" + std::to_string(i);
        c.enriched_text = "reef " + std::string(i + 1, 'x') + " coral";
        chunks.push_back(c);
    }
    const auto sparse = SparseIndex::build(chunks);
    QueryBundle b{"coral reef", {}, {}};
    const auto direct = sparse.search("coral reef", 20);
    const auto hits = retrieve_multipath(b, sparse, nullptr, nullptr, {20, 20, 60});
    ASSERT_EQ(hits.size(), direct.size());
    for (std::size_t i = 0; i < hits.size(); ++i) EXPECT_EQ(hits[i].chunk_id, direct[i].chunk_id);
    const auto top3 = retrieve_multipath(b, sparse, nullptr, nullptr, {20, 3, 60});
    ASSERT_EQ(top3.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(top3[i].rank, i + 1);
}

TEST(Multipath, MismatchedIndexesRejected) {
    Chunk a;
    a.id = "a";
    a.enriched_text = "alpha";
    Chunk b = a;
    b.enriched_text = "beta";
    HashingEmbedder emb(8);
    const auto sparse = SparseIndex::build({a});
    const auto dense = DenseIndex::build({b}, emb);
    try {
        retrieve_multipath({"alpha", {}, {}}, sparse, &dense, &emb);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kIndexMismatch);
    }
}

TEST(Judge, VerdictsAndFallbacks) {
    const Document d = parse_document("Corals bleach in heat.", Format::kText);
    const Chunk c = chunk_of(d, "c1");
    ScriptedLlm llm;
    EXPECT_TRUE(judge_usefulness("why do corals bleach", c, d.title, llm).useful);

    llm.add_rule({"usefulness", "Stocks", R"({"useful": false, "rationale": "off topic"})"});
    const Document off = parse_document("Stocks fell.", Format::kText);
    const auto v = judge_usefulness("why do corals bleach", chunk_of(off, "c2"), off.title, llm);
    EXPECT_FALSE(v.useful);
    EXPECT_EQ(v.rationale, "off topic");

    ScriptedLlm garbled;
    garbled.add_rule({"usefulness", "", "yes, useful"});
    const auto g = judge_usefulness("q", c, d.title, garbled);
    EXPECT_TRUE(g.useful);
    EXPECT_EQ(g.rationale, "parse_failure");
    EXPECT_FALSE(g.degraded);

    ScriptedLlm down;
    down.set_down("usefulness");
    const auto dv = judge_usefulness("q", c, d.title, down);
    EXPECT_TRUE(dv.useful);
    EXPECT_TRUE(dv.degraded);
}

TEST(Evidence, LexicalExactTokens) {
    const Document d = parse_document("Corals bleach in heat. Stocks fell.", Format::kText);
    const Chunk c = chunk_of(d, "c1");
    EXPECT_DOUBLE_EQ(token_overlap("corals bleach", "Corals bleach in heat."), 1.0);
    EXPECT_DOUBLE_EQ(token_overlap("coral bleaching", "Corals bleach in heat."), 0.0);
    const auto ev = extract_evidence("corals bleach", c, d, nullptr, 1);
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_EQ(ev[0].text, "Corals bleach in heat.");
    EXPECT_EQ(ev[0].start, 0u);
    EXPECT_EQ(ev[0].end, 22u);
    const auto all = extract_evidence("stocks", c, d, nullptr, 10);
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[0].sentence_index, 0u);  // document order, not score order
    EXPECT_DOUBLE_EQ(all[1].score, 1.0);
}

TEST(Evidence, SingleSentenceWithEmbedder) {
    const Document d = parse_document("Corals bleach in heat.", Format::kText);
    HashingEmbedder emb(64);
    const auto ev = extract_evidence("corals heat", chunk_of(d, "c1"), d, &emb, 4);
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_GT(ev[0].score, 0.0);
    EXPECT_LE(ev[0].score, 1.0);
}

}  // namespace
}  // namespace attrag
