// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "attrag/chunking.hpp"
#include "attrag/error.hpp"
#include "attrag/text.hpp"
#include "support.hpp"

namespace attrag {
namespace {

Document numbered_doc(std::size_t n) {
    std::string body;
    for (std::size_t i = 1; i <= n; ++i) body += "Sentence number " + std::to_string(i) + " ends here. ";
    return parse_document(body, Format::kText, {{"source_uri", "n.txt"}});
}

std::vector<std::pair<std::size_t, std::size_t>> windows(const std::vector<Chunk>& chunks) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& c : chunks) out.emplace_back(c.first_sentence + 1, c.first_sentence + c.sentence_count);
    return out;
}

// One-hot on whichever of "alpha"/"beta" occurs more often in the text.
class MajorityEmbedder : public Embedder {
  public:
    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override {
        ++calls;
        std::vector<std::vector<float>> out;
        for (const auto& t : texts) {
            int a = 0, b = 0;
            for (const auto& tok : text::tokenize(t)) {
                a += tok == "alpha";
                b += tok == "beta";
            }
            out.push_back(a >= b ? std::vector<float>{1, 0} : std::vector<float>{0, 1});
        }
        return out;
    }
    std::size_t dims() const override { return 2; }
    std::string name() const override { return "majority"; }
    int calls = 0;
};

TEST(FixedChunks, HandWindows) {
    using W = std::vector<std::pair<std::size_t, std::size_t>>;
    EXPECT_EQ(windows(chunk_fixed(numbered_doc(5), 2, 0)), (W{{1, 2}, {3, 4}, {5, 5}}));
    EXPECT_EQ(windows(chunk_fixed(numbered_doc(3), 5, 0)), (W{{1, 3}}));
    EXPECT_EQ(windows(chunk_fixed(numbered_doc(4), 2, 1)), (W{{1, 2}, {2, 3}, {3, 4}}));
}

TEST(FixedChunks, TextIsOriginalSpanAndIdsAreStable) {
    const Document d = numbered_doc(5);
    const auto chunks = chunk_fixed(d, 2, 0);
    for (const auto& c : chunks) {
        EXPECT_EQ(c.text, d.body.substr(c.start, c.end - c.start));
        EXPECT_EQ(c.id, chunk_id(d.id, c.seq));
        EXPECT_EQ(c.doc_id, d.id);
    }
    EXPECT_EQ(chunks, chunk_fixed(d, 2, 0));
}

TEST(FixedChunks, InvalidParams) {
    const Document d = numbered_doc(3);
    for (auto [size, overlap] : std::vector<std::pair<int, int>>{{0, 0}, {2, 2}, {2, 3}}) {
        try {
            chunk_fixed(d, size, overlap);
            ADD_FAILURE() << size << "/" << overlap;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::kInvalidChunkParams);
        }
    }
}

TEST(Percentile, LinearInterpolation) {
    EXPECT_DOUBLE_EQ(percentile({0, 1, 0}, 90), 0.8);
    EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4}, 50), 2.5);
    EXPECT_DOUBLE_EQ(percentile({5}, 99), 5);
}

TEST(SemanticChunks, OneHotBoundary) {
    const Document d = parse_document("Alpha one alpha. Alpha two alpha. Beta three beta. Beta four beta.", Format::kText);
    MajorityEmbedder emb;
    const auto dist = adjacent_window_distances(d, emb);
    ASSERT_EQ(dist.size(), 3u);
    EXPECT_DOUBLE_EQ(dist[0], 0.0);
    EXPECT_NEAR(dist[1], 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(dist[2], 0.0);
    using W = std::vector<std::pair<std::size_t, std::size_t>>;
    EXPECT_EQ(windows(chunk_semantic(d, emb, 90)), (W{{1, 2}, {3, 4}}));
}

TEST(SemanticChunks, IdenticalEmbeddingsNeverSplit) {
    const Document d = parse_document("Alpha. Alpha again. Alpha thrice. Alpha four.", Format::kText);
    MajorityEmbedder emb;
    for (double p : {0.0, 50.0, 100.0}) EXPECT_EQ(chunk_semantic(d, emb, p).size(), 1u);
}

TEST(SemanticChunks, SingleSentenceUsesAtMostOneCall) {
    const Document d = parse_document("Only one sentence here.", Format::kText);
    MajorityEmbedder emb;
    EXPECT_EQ(chunk_semantic(d, emb, 90).size(), 1u);
    EXPECT_LE(emb.calls, 1);
}

TEST(SemanticChunks, LowerPercentileNeverYieldsFewerChunks) {
    std::mt19937_64 rng(11);
    HashingEmbedder emb(64);
    for (int iter = 0; iter < 20; ++iter) {
        const Document d = parse_document(testing::random_markdown(rng, 12, false), Format::kText);
        std::size_t prev = 0;
        for (double p : {100.0, 90.0, 75.0, 50.0, 25.0, 0.0}) {
            const std::size_t n = chunk_semantic(d, emb, p).size();
            EXPECT_GE(n, prev) << "p=" << p;
            prev = n;
        }
    }
}

TEST(SemanticChunks, EmbedderOutageIsReported) {
    HashingEmbedder base;
    InstrumentedEmbedder emb(base);
    emb.set_down(true);
    try {
        chunk_semantic(numbered_doc(3), emb, 90);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kEmbedderUnavailable);
    }
}

TEST(ContextHeader, TitleAndHeadingChain) {
    const Document md = parse_document("# Coral Report\n\n## Bleaching\n\nCorals bleach.", Format::kMarkdown);
    EXPECT_EQ(attach_context_header(chunk_fixed(md, 4, 0)[0], md).context_header, "Coral Report > Bleaching");

    const Document txt = parse_document("Notes\n\nSomething happened.", Format::kText);
    EXPECT_EQ(context_header_at(txt, txt.sentences.back().start), "Notes");

    const Document nested = parse_document("# T\n\n## A\n\nFirst.\n\n### B\n\nSecond.", Format::kMarkdown);
    EXPECT_EQ(context_header_at(nested, nested.sentences.back().start), "T > A > B");
    EXPECT_EQ(context_header_at(nested, nested.sentences.front().start), "T > A");
}

TEST(Decontextualize, WorkedExampleResolvesPronoun) {
    const Document d = parse_document("# Reef\n\nThe reef sits off the coast of Queensland. It bleached rapidly.",
                                      Format::kMarkdown);
    const auto chunks = chunk_fixed(d, 1, 0);
    ASSERT_EQ(chunks.size(), 2u);
    ScriptedLlm llm;
    Chunk c = chunks[1];
    enrich_chunk(c, d, &llm);
    EXPECT_EQ(c.enriched_text, "Reef\nThe reef bleached rapidly.");
    EXPECT_EQ(c.metadata.at("coref"), "applied");
    EXPECT_EQ(c.text, "It bleached rapidly.");
}

TEST(Decontextualize, EchoIsFixpoint) {
    const Document d = parse_document("# Reef\n\nCorals bleach in heat.", Format::kMarkdown);
    ScriptedLlm llm;
    Chunk c = chunk_fixed(d, 4, 0)[0];
    enrich_chunk(c, d, &llm);
    EXPECT_EQ(c.enriched_text, "Reef\nCorals bleach in heat.");
}

TEST(Decontextualize, OutageFallsBackToDatesAndHeader) {
    const Document d = parse_document("# Storm\n\nIt hit yesterday.", Format::kMarkdown, {{"publish_date", "2025-02-18"}});
    ScriptedLlm llm;
    llm.set_down("*");
    Chunk c = chunk_fixed(d, 4, 0)[0];
    enrich_chunk(c, d, &llm);
    EXPECT_EQ(c.enriched_text, "Storm\nIt hit 2025-02-17.");
    EXPECT_EQ(c.metadata.at("coref"), "skipped");
    EXPECT_EQ(c.metadata.at("dates"), "normalized");
}

// Property: chunks of every strategy cover the sentences in order; without
// overlap they partition them, with overlap consecutive windows share exactly
// `overlap` sentences.
TEST(ChunkProperty, PartitionAndOverlap) {
    std::mt19937_64 rng(3);
    HashingEmbedder emb(64);
    for (int iter = 0; iter < 40; ++iter) {
        const Document d = parse_document(testing::random_markdown(rng, 1 + iter, true), Format::kMarkdown);
        const std::size_t n = d.sentences.size();
        for (const auto& chunks : {chunk_semantic(d, emb, 80), chunk_fixed(d, 3, 0)}) {
            std::size_t next = 0;
            for (const auto& c : chunks) {
                ASSERT_EQ(c.first_sentence, next);
                next += c.sentence_count;
            }
            ASSERT_EQ(next, n);
        }
        const auto ov = chunk_fixed(d, 4, 2);
        for (std::size_t i = 1; i < ov.size(); ++i) ASSERT_EQ(ov[i].first_sentence, ov[i - 1].first_sentence + 2);
        ASSERT_EQ(ov.back().first_sentence + ov.back().sentence_count, n);
    }
}

}  // namespace
}  // namespace attrag
