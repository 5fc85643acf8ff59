// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "attrag/error.hpp"
#include "attrag/indexing.hpp"
#include "support.hpp"

namespace attrag {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::vector<Chunk> make_chunks(const std::vector<std::string>& texts) {
    std::vector<Chunk> out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        Chunk c;
        char id[16];
        std::snprintf(id, sizeof id, "c%03zu", i);
        c.id = id;
        c.doc_id = "d";
        c.text = c.enriched_text = texts[i];
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> random_texts(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < vocab; ++i) words.push_back(testing::random_word(rng, 2, 6));
    std::uniform_int_distribution<std::size_t> pick(0, vocab - 1), len(1, 30);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string t;
        for (std::size_t k = len(rng); k > 0; --k) t += words[pick(rng)] + (k % 5 == 0 ? ". " : " ");
        out.push_back(t);
    }
    return out;
}

TEST(Sparse, PostingsByHand) {
    const auto idx = SparseIndex::build(make_chunks({"a b a"}));
    EXPECT_EQ(idx.postings("a"), (std::vector<SparseIndex::Posting>{{0, 2}}));
    EXPECT_EQ(idx.postings("b"), (std::vector<SparseIndex::Posting>{{0, 1}}));
    EXPECT_DOUBLE_EQ(idx.avg_doc_length(), 3.0);
    EXPECT_TRUE(idx.postings("zzz").empty());
}

TEST(Sparse, IdenticalChunksShareEveryPosting) {
    const auto idx = SparseIndex::build(make_chunks({"x y", "x y"}));
    EXPECT_EQ(idx.postings("x").size(), 2u);
    EXPECT_EQ(idx.postings("y").size(), 2u);
}

TEST(Sparse, TermFrequenciesMatchCounter) {
    std::mt19937_64 rng(5);
    const auto texts = random_texts(rng, 20, 15);
    const auto idx = SparseIndex::build(make_chunks(texts));
    std::map<std::string, std::map<uint32_t, uint32_t>> oracle;
    for (uint32_t i = 0; i < texts.size(); ++i) {
        for (const auto& t : testing::ascii_tokens(texts[i])) ++oracle[t][i];
    }
    EXPECT_EQ(idx.vocabulary_size(), oracle.size());
    for (const auto& [term, per_doc] : oracle) {
        std::vector<SparseIndex::Posting> want;
        for (auto [d, tf] : per_doc) want.push_back({d, tf});
        EXPECT_EQ(idx.postings(term), want) << term;
    }
}

TEST(Sparse, SingleChunkScoreByHand) {
    const auto idx = SparseIndex::build(make_chunks({"a b a"}));
    const auto hits = idx.search("a", 5);
    ASSERT_EQ(hits.size(), 1u);
    const double idf = std::log(1 + 0.5 / 1.5);
    const double want = idf * (2 * (1.2 + 1)) / (2 + 1.2 * (1 - 0.75 + 0.75 * 3.0 / 3.0));
    EXPECT_NEAR(hits[0].score, want, 1e-9);
    EXPECT_TRUE(idx.search("absent", 5).empty());
}

TEST(Sparse, MatchesBruteForce) {
    std::mt19937_64 rng(9);
    for (int iter = 0; iter < 30; ++iter) {
        const auto texts = random_texts(rng, 1 + iter, 12);
        const auto chunks = make_chunks(texts);
        const auto idx = SparseIndex::build(chunks);
        const std::string q = testing::random_word(rng, 2, 6) + " " + texts[iter % texts.size()].substr(0, 12);
        const auto scores = testing::bm25_bruteforce(texts, q);
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] != 0.0) order.push_back(i);
        }
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
        const auto hits = idx.search(q, 100);
        ASSERT_EQ(hits.size(), order.size());
        for (std::size_t r = 0; r < hits.size(); ++r) {
            EXPECT_NEAR(hits[r].score, scores[order[r]], 1e-9);
            if (r > 0 && std::abs(hits[r].score - hits[r - 1].score) > 1e-12) {
                EXPECT_EQ(hits[r].chunk_id, chunks[order[r]].id);
            }
            EXPECT_EQ(hits[r].rank, r + 1);
        }
    }
}

TEST(Sparse, BuildErrors) {
    EXPECT_THROW(SparseIndex::build({}), Error);
    auto dup = make_chunks({"a", "b"});
    dup[1].id = dup[0].id;
    EXPECT_THROW(SparseIndex::build(dup), Error);
}

TEST(Dense, IdenticalAndOrthogonalQueries) {
    auto idx = DenseIndex::from_vectors({"a", "b"}, {{3, 0, 0}, {0, 2, 0}});
    auto hits = idx.search({1.5, 0, 0}, 2);
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(hits[0].chunk_id, "a");
    EXPECT_NEAR(hits[0].score, 1.0, 1e-6);
    EXPECT_NEAR(hits[1].score, 0.0, 1e-12);
    EXPECT_THROW(idx.search({1, 0}, 1), Error);
}

TEST(Dense, ExhaustiveScanOracle) {
    std::mt19937_64 rng(13);
    std::normal_distribution<float> nd;
    std::vector<std::string> ids;
    std::vector<std::vector<float>> vecs;
    for (int i = 0; i < 300; ++i) {
        ids.push_back("v" + std::to_string(i));
        std::vector<float> v(16);
        for (auto& x : v) x = nd(rng);
        vecs.push_back(v);
    }
    const auto idx = DenseIndex::from_vectors(ids, vecs);
    for (int q = 0; q < 20; ++q) {
        std::vector<float> qv(16);
        for (auto& x : qv) x = nd(rng);
        std::vector<std::pair<double, std::string>> scan;
        for (std::size_t i = 0; i < vecs.size(); ++i) {
            double dot = 0, na = 0, nb = 0;
            for (std::size_t k = 0; k < 16; ++k) {
                dot += double(vecs[i][k]) * qv[k];
                na += double(vecs[i][k]) * vecs[i][k];
                nb += double(qv[k]) * qv[k];
            }
            scan.emplace_back(-dot / std::sqrt(na * nb), ids[i]);
        }
        std::sort(scan.begin(), scan.end());
        const auto hits = idx.search(qv, 10);
        ASSERT_EQ(hits.size(), 10u);
        for (std::size_t r = 0; r < 10; ++r) {
            EXPECT_EQ(hits[r].chunk_id, scan[r].second);
            EXPECT_NEAR(hits[r].score, -scan[r].first, 1e-5);
        }
    }
}

TEST(Persist, RoundTripKeepsResults) {
    std::mt19937_64 rng(17);
    const auto texts = random_texts(rng, 40, 25);
    const auto chunks = make_chunks(texts);
    HashingEmbedder emb(32);
    const auto sparse = SparseIndex::build(chunks);
    const auto dense = DenseIndex::build(chunks, emb, 7);
    TempDir tmp;
    persist_indexes(tmp.path() / "index", sparse, &dense);
    const auto loaded = load_indexes(tmp.path() / "index");
    ASSERT_TRUE(loaded.dense);
    EXPECT_EQ(loaded.sparse.corpus_id(), corpus_digest(chunks));
    for (int q = 0; q < 100; ++q) {
        const std::string query = texts[q % texts.size()].substr(0, 10) + " " + testing::random_word(rng);
        EXPECT_EQ(sparse.search(query, 10), loaded.sparse.search(query, 10));
        const auto qv = emb.embed_one(query);
        EXPECT_EQ(dense.search(qv, 10), loaded.dense->search(qv, 10));
    }
    const auto manifest = inspect_indexes(tmp.path() / "index");
    EXPECT_EQ(manifest["format"], "attrag-index");
    EXPECT_EQ(manifest["files"]["sparse"]["verified"], true);
    EXPECT_EQ(manifest["files"]["dense"]["dims"], 32);
}

TEST(Persist, TruncationAndMissingFiles) {
    const auto chunks = make_chunks({"alpha beta", "beta gamma"});
    TempDir tmp;
    const fs::path dir = tmp.path() / "index";
    persist_indexes(dir, SparseIndex::build(chunks), nullptr);
    fs::resize_file(dir / "sparse.bin", fs::file_size(dir / "sparse.bin") - 3);
    try {
        load_indexes(dir);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kCorruptIndex);
    }

    fs::create_directories(tmp.path() / "empty");
    try {
        load_indexes(tmp.path() / "empty");
        FAIL();
    } catch (const Error& e) {
        EXPECT_TRUE(e.code() == ErrorCode::kIoFailure || e.code() == ErrorCode::kVersionMismatch);
    }
}

TEST(Persist, VersionAndRawCorruption) {
    const auto chunks = make_chunks({"alpha beta"});
    TempDir tmp;
    const fs::path dir = tmp.path() / "index";
    persist_indexes(dir, SparseIndex::build(chunks), nullptr);
    const std::string bytes = SparseIndex::build(chunks).serialize();
    EXPECT_THROW(SparseIndex::deserialize(bytes.substr(0, bytes.size() / 2)), Error);

    auto manifest = nlohmann::json::parse(testing::read_file(dir / "manifest.json"));
    manifest["format_version"] = kIndexFormatVersion + 1;
    testing::write_file(dir / "manifest.json", manifest.dump());
    try {
        load_indexes(dir);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
    }
}

}  // namespace
}  // namespace attrag
