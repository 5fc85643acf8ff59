// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "attrag/chunking.hpp"
#include "attrag/providers.hpp"

namespace attrag {

enum class HitPath { kSparse, kDense, kFused };

std::string_view hit_path_name(HitPath p);

struct RetrievalHit {
    std::string chunk_id;
    double score = 0.0;
    HitPath path = HitPath::kSparse;
    std::size_t rank = 1;  // 1-based
    std::string variant_text;

    bool operator==(const RetrievalHit&) const = default;
};

/// Digest over the (chunk id, enriched text) pairs an index was built from.
std::string corpus_digest(const std::vector<Chunk>& chunks);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Inverted index with BM25 scoring over Chunk::enriched_text.
///
/// Chunks are addressed internally by their ordinal in ascending chunk id
/// order, so postings sorted by ordinal are also sorted by chunk id.
class SparseIndex {
  public:
    struct Posting {
        uint32_t doc;  // ordinal into chunk_ids()
        uint32_t tf;

        bool operator==(const Posting&) const = default;
    };

    SparseIndex() = default;

    /// Throws kEmptyCorpus for no chunks, kInvalidArgument for duplicate ids.
    static SparseIndex build(const std::vector<Chunk>& chunks, Bm25Params params = {});

    /// Top-k by BM25 with IDF = ln(1 + (N - df + 0.5) / (df + 0.5)); ties by
    /// ascending chunk id. Only chunks sharing a query term are returned.
    std::vector<RetrievalHit> search(std::string_view query, std::size_t k) const;

    double idf(std::string_view term) const;

    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& chunk_ids() const { return ids_; }
    uint32_t doc_length(std::size_t ordinal) const { return lengths_.at(ordinal); }
    double avg_doc_length() const { return avg_length_; }
    const Bm25Params& params() const { return params_; }
    const std::string& corpus_id() const { return corpus_id_; }
    std::size_t vocabulary_size() const { return postings_.size(); }
    /// Empty when the term is absent.
    const std::vector<Posting>& postings(std::string_view term) const;

    std::string serialize() const;
    /// Throws kCorruptIndex or kVersionMismatch.
    static SparseIndex deserialize(std::string_view bytes);

  private:
    std::vector<std::string> ids_;
    std::vector<uint32_t> lengths_;
    std::unordered_map<std::string, std::vector<Posting>> postings_;
    double avg_length_ = 0.0;
    Bm25Params params_;
    std::string corpus_id_;
};

/// Flat exhaustive cosine index over L2-normalized vectors.
class DenseIndex {
  public:
    DenseIndex() = default;

    /// Embeds each chunk's enriched text. Throws kEmptyCorpus,
    /// kEmbedderUnavailable or kDimensionMismatch.
    static DenseIndex build(const std::vector<Chunk>& chunks, Embedder& embedder, std::size_t batch_size = 64);

    /// Vectors are normalized on insertion. Throws kDimensionMismatch.
    static DenseIndex from_vectors(std::vector<std::string> ids, std::vector<std::vector<float>> vectors,
                                   std::string corpus_id = {});

    /// Top-k by cosine similarity; ties by ascending chunk id.
    std::vector<RetrievalHit> search(const std::vector<float>& query, std::size_t k) const;

    std::size_t size() const { return ids_.size(); }
    std::size_t dims() const { return dims_; }
    const std::vector<std::string>& chunk_ids() const { return ids_; }
    std::vector<float> vector(std::size_t ordinal) const;
    const std::string& corpus_id() const { return corpus_id_; }

    std::string serialize() const;
    static DenseIndex deserialize(std::string_view bytes);

  private:
    std::vector<std::string> ids_;  // ascending
    std::vector<float> matrix_;     // row-major, size() x dims()
    std::size_t dims_ = 0;
    std::string corpus_id_;
};

inline constexpr int kIndexFormatVersion = 1;

/// On-disk layout of an index directory:
///
///   manifest.json   {"format": "attrag-index", "format_version", "corpus_id",
///                    "files": {"sparse": {...}, "dense": {...}}}
///   sparse.bin      little-endian BM25 postings
///   dense.bin       little-endian float32 matrix (optional)
///
/// Each file entry records its name, byte size, item count and SHA-256.
/// The directory is written beside the target and renamed into place.
void persist_indexes(const std::filesystem::path& dir, const SparseIndex& sparse, const DenseIndex* dense);

struct LoadedIndexes {
    SparseIndex sparse;
    std::optional<DenseIndex> dense;
};

/// Throws kIoFailure, kCorruptIndex or kVersionMismatch.
LoadedIndexes load_indexes(const std::filesystem::path& dir);

/// Manifest contents after checksum verification.
nlohmann::json inspect_indexes(const std::filesystem::path& dir);

}  // namespace attrag
