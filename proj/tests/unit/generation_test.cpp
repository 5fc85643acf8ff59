// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <thread>

#include "attrag/error.hpp"
#include "attrag/generation.hpp"
#include "support.hpp"

namespace attrag {
namespace {

struct TwoDocs {
    Document a = parse_document("# Alpha\n\nFirst alpha fact. Second alpha fact.", Format::kMarkdown, {{"source_uri", "a"}});
    Document b = parse_document("# Beta\n\nFirst beta fact. Second beta fact.", Format::kMarkdown, {{"source_uri", "b"}});

    std::vector<EvidenceSpan> evidence() const {
        std::vector<EvidenceSpan> out;
        for (const Document* d : {&a, &b}) {
            for (std::size_t i = 0; i < d->sentences.size(); ++i) {
                out.push_back({"ch_" + d->title, d->id, i, d->sentences[i].start, d->sentences[i].end, 0.5,
                               std::string(d->sentence_text(i))});
            }
        }
        return out;
    }

    DocumentLookup lookup() const {
        return [this](std::string_view id) -> const Document* {
            if (id == a.id) return &a;
            if (id == b.id) return &b;
            return nullptr;
        };
    }
};

std::string fixture_answer() { return testing::read_file(testing::fixture_dir() / "climate" / "answer.md"); }

TEST(Prompt, OneBlockPerDocument) {
    TwoDocs t;
    const Prompt p = assemble_prompt("facts?", t.evidence(), t.lookup(), {});
    ASSERT_EQ(p.blocks.size(), 2u);
    EXPECT_EQ(p.blocks[0].id, 1u);
    EXPECT_EQ(p.blocks[1].id, 2u);
    EXPECT_EQ(p.blocks[0].render(), "[1] Alpha\n- First alpha fact.\n- Second alpha fact.");
    const auto msgs = p.messages();
    EXPECT_EQ(msgs.front().role, "system");
    EXPECT_EQ(msgs.back().role, "user");
    EXPECT_NE(msgs.back().content.find("facts?"), std::string::npos);
}

TEST(Prompt, BudgetTrimsWholeSentences) {
    TwoDocs t;
    const auto full = assemble_prompt("q", t.evidence(), t.lookup(), {});
    const std::size_t first_block = full.blocks[0].render().size();
    const auto one_block = assemble_prompt("q", t.evidence(), t.lookup(), {}, first_block + 5);
    ASSERT_EQ(one_block.blocks.size(), 1u);
    EXPECT_LE(one_block.rendered_context().size(), first_block + 5);

    const auto tiny = assemble_prompt("q", t.evidence(), t.lookup(), {}, 10);
    ASSERT_EQ(tiny.blocks.size(), 1u);
    ASSERT_EQ(tiny.blocks[0].sentences.size(), 1u);
    EXPECT_EQ(tiny.blocks[0].sentences[0].text, "First alpha fact.");

    EXPECT_THROW(assemble_prompt("q", {}, t.lookup(), {}), Error);
}

TEST(Generate, EchoesFixture) {
    ScriptedLlm llm;
    llm.add_rule({"answer", "", fixture_answer()});
    TwoDocs t;
    const Prompt p = assemble_prompt("q", t.evidence(), t.lookup(), {});
    EXPECT_EQ(generate(p, llm), fixture_answer());
}

TEST(Generate, ArbitraryStreamSplitsConcatenate) {
    TwoDocs t;
    const Prompt p = assemble_prompt("q", t.evidence(), t.lookup(), {});
    const std::string want = fixture_answer() + " caf\xC3\xA9 \xE2\x82\xAC";
    for (std::size_t piece = 1; piece <= 17; ++piece) {
        ScriptedLlm llm;
        llm.add_rule({"answer", "", want});
        llm.set_stream_piece_size(piece);
        std::string joined;
        const std::string out = generate(p, llm, {true, [&](std::string_view d) { joined += d; }, {}});
        EXPECT_EQ(joined, want) << piece;
        EXPECT_EQ(out, want) << piece;
    }
}

TEST(Generate, TimeoutDiscardsPartialText) {
    ScriptedLlm llm;
    llm.add_rule({"answer", "", fixture_answer()});
    llm.set_stream_piece_size(8);
    llm.set_delay_per_delta(std::chrono::milliseconds(5));
    TwoDocs t;
    const Prompt p = assemble_prompt("q", t.evidence(), t.lookup(), {});
    std::size_t deltas = 0;
    try {
        generate(p, llm, {true, [&](std::string_view) { ++deltas; }, std::chrono::milliseconds(30)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kProviderTimeout);
    }
    EXPECT_LT(deltas * 8, fixture_answer().size());
}

TEST(Generate, OutageSurfaces) {
    ScriptedLlm llm;
    llm.set_down("answer");
    TwoDocs t;
    const Prompt p = assemble_prompt("q", t.evidence(), t.lookup(), {});
    try {
        generate(p, llm);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kLlmUnavailable);
    }
}

TEST(Structure, FixtureSections) {
    const auto a = parse_structured_answer(fixture_answer());
    ASSERT_EQ(a.sections.size(), 3u);
    EXPECT_EQ(a.heading_text(a.sections[0]), "1. Rising Ocean Temperatures and Coral Bleaching");
    EXPECT_EQ(a.heading_text(a.sections[1]), "2. Prolonged Heat Stress and Coral Death");
    EXPECT_EQ(a.heading_text(a.sections[2]), "3. Impact on Iconic Coral Reefs");
    for (const auto& s : a.sections) EXPECT_EQ(s.body.size(), 2u);
    EXPECT_EQ(a.summary_text(),
              "Rising ocean temperatures are the main driver of mass coral bleaching, and prolonged heat stress kills corals.");
    for (const auto& s : a.sentences) {
        EXPECT_NE(a.raw.substr(s.raw_start, s.raw_end - s.raw_start).find(s.text), std::string::npos) << s.text;
    }
}

TEST(Structure, PlainSentenceAndHeadingOnly) {
    const auto plain = parse_structured_answer("Corals bleach in heat.");
    EXPECT_TRUE(plain.summary.empty());
    ASSERT_EQ(plain.sections.size(), 1u);
    EXPECT_FALSE(plain.sections[0].heading);
    ASSERT_EQ(plain.sentences.size(), 1u);
    EXPECT_EQ(plain.sentences[0].kind, SentenceKind::kContent);

    const auto heads = parse_structured_answer("## One\n\n## Two\n");
    ASSERT_EQ(heads.sections.size(), 2u);
    for (const auto& s : heads.sections) EXPECT_TRUE(s.body.empty());
    for (const auto& s : heads.sentences) EXPECT_EQ(s.kind, SentenceKind::kHeading);
}

TEST(Structure, RenderRoundTrip) {
    const auto a = parse_structured_answer(fixture_answer());
    const auto b = parse_structured_answer(render_markdown(a));
    ASSERT_EQ(a.sentences.size(), b.sentences.size());
    for (std::size_t i = 0; i < a.sentences.size(); ++i) {
        EXPECT_EQ(a.sentences[i].text, b.sentences[i].text);
        EXPECT_EQ(a.sentences[i].kind, b.sentences[i].kind);
    }
    EXPECT_EQ(a.sections.size(), b.sections.size());
}

TEST(Opinion, StructuralPhrasesAreNotClaims) {
    EXPECT_TRUE(is_opinion_bearing("Corals bleach when water is too warm."));
    EXPECT_FALSE(is_opinion_bearing("In summary:"));
    EXPECT_FALSE(is_opinion_bearing("Here are the key points:"));
}

}  // namespace
}  // namespace attrag
