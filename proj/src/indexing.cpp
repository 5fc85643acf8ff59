// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/indexing.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "attrag/error.hpp"
#include "attrag/text.hpp"
#include "binary_io.hpp"

namespace attrag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kSparseMagic = "ATSP";
constexpr std::string_view kDenseMagic = "ATDN";

/// Orders (score desc, ordinal asc) and keeps the best k.
std::vector<std::pair<double, uint32_t>> top_k(std::vector<std::pair<double, uint32_t>> scored, std::size_t k) {
    auto better = [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    if (scored.size() > k) {
        std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), better);
        scored.resize(k);
    } else {
        std::sort(scored.begin(), scored.end(), better);
    }
    return scored;
}

std::vector<std::size_t> order_by_id(const std::vector<Chunk>& chunks) {
    std::vector<std::size_t> order(chunks.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return chunks[a].id < chunks[b].id; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (chunks[order[i]].id == chunks[order[i - 1]].id) {
            throw Error(ErrorCode::kInvalidArgument, "duplicate chunk id " + chunks[order[i]].id);
        }
    }
    return order;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + p.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorCode::kIoFailure, "error reading " + p.string());
    return data;
}

void write_file(const fs::path& p, std::string_view data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + p.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIoFailure, "error writing " + p.string());
}

}  // namespace

std::string_view hit_path_name(HitPath p) {
    switch (p) {
        case HitPath::kSparse: return "sparse";
        case HitPath::kDense: return "dense";
        case HitPath::kFused: return "fused";
    }
    return "sparse";
}

std::string corpus_digest(const std::vector<Chunk>& chunks) {
    std::vector<std::pair<std::string_view, std::string_view>> pairs;
    pairs.reserve(chunks.size());
    for (const auto& c : chunks) pairs.emplace_back(c.id, c.enriched_text);
    std::sort(pairs.begin(), pairs.end());
    std::string material;
    for (const auto& [id, txt] : pairs) {
        material.append(id);
        material.push_back('\0');
        material.append(txt);
        material.push_back('\n');
    }
    return text::sha256_hex(material);
}

// ---------------------------------------------------------------------------
// SparseIndex

SparseIndex SparseIndex::build(const std::vector<Chunk>& chunks, Bm25Params params) {
    if (chunks.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot build an index over zero chunks");
    const auto order = order_by_id(chunks);

    SparseIndex idx;
    idx.params_ = params;
    idx.corpus_id_ = corpus_digest(chunks);
    idx.ids_.reserve(chunks.size());
    idx.lengths_.reserve(chunks.size());
    uint64_t total = 0;
    for (std::size_t ord = 0; ord < order.size(); ++ord) {
        const Chunk& c = chunks[order[ord]];
        idx.ids_.push_back(c.id);
        const auto tokens = text::tokenize(c.enriched_text);
        idx.lengths_.push_back(static_cast<uint32_t>(tokens.size()));
        total += tokens.size();
        std::map<std::string_view, uint32_t> tf;
        for (const auto& t : tokens) ++tf[t];
        for (const auto& [term, count] : tf) {
            idx.postings_[std::string(term)].push_back({static_cast<uint32_t>(ord), count});
        }
    }
    idx.avg_length_ = static_cast<double>(total) / static_cast<double>(chunks.size());
    return idx;
}

const std::vector<SparseIndex::Posting>& SparseIndex::postings(std::string_view term) const {
    static const std::vector<Posting> kEmpty;
    auto it = postings_.find(std::string(term));
    return it == postings_.end() ? kEmpty : it->second;
}

double SparseIndex::idf(std::string_view term) const {
    const double n = static_cast<double>(ids_.size());
    const double df = static_cast<double>(postings(term).size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<RetrievalHit> SparseIndex::search(std::string_view query, std::size_t k) const {
    if (k == 0 || ids_.empty()) return {};
    const auto tokens = text::tokenize(query);
    const std::set<std::string> terms(tokens.begin(), tokens.end());

    std::vector<double> scores(ids_.size(), 0.0);
    std::vector<char> matched(ids_.size(), 0);
    const double k1 = params_.k1;
    const double b = params_.b;
    for (const auto& term : terms) {
        const auto& list = postings(term);
        if (list.empty()) continue;
        const double w = idf(term);
        for (const auto& p : list) {
            const double tf = p.tf;
            const double norm = 1.0 - b + b * static_cast<double>(lengths_[p.doc]) / avg_length_;
            scores[p.doc] += w * (tf * (k1 + 1.0)) / (tf + k1 * norm);
            matched[p.doc] = 1;
        }
    }
    std::vector<std::pair<double, uint32_t>> scored;
    for (uint32_t i = 0; i < scores.size(); ++i) {
        if (matched[i]) scored.emplace_back(scores[i], i);
    }
    std::vector<RetrievalHit> hits;
    std::size_t rank = 1;
    for (const auto& [score, ord] : top_k(std::move(scored), k)) {
        hits.push_back({ids_[ord], score, HitPath::kSparse, rank++, std::string(query)});
    }
    return hits;
}

std::string SparseIndex::serialize() const {
    detail::ByteWriter w;
    w.raw(kSparseMagic);
    w.u32(kIndexFormatVersion);
    w.u64(ids_.size());
    w.f64(params_.k1);
    w.f64(params_.b);
    w.f64(avg_length_);
    w.str(corpus_id_);
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        w.str(ids_[i]);
        w.u32(lengths_[i]);
    }
    std::vector<const std::string*> terms;
    terms.reserve(postings_.size());
    for (const auto& [term, list] : postings_) terms.push_back(&term);
    std::sort(terms.begin(), terms.end(), [](const auto* a, const auto* b) { return *a < *b; });
    w.u64(terms.size());
    for (const auto* term : terms) {
        const auto& list = postings_.at(*term);
        w.str(*term);
        w.u32(static_cast<uint32_t>(list.size()));
        for (const auto& p : list) {
            w.u32(p.doc);
            w.u32(p.tf);
        }
    }
    return w.take();
}

SparseIndex SparseIndex::deserialize(std::string_view bytes) {
    detail::ByteReader r(bytes);
    if (r.raw(4) != kSparseMagic) throw Error(ErrorCode::kCorruptIndex, "not a sparse index file");
    if (const uint32_t v = r.u32(); v != kIndexFormatVersion) {
        throw Error(ErrorCode::kVersionMismatch, "sparse index format version " + std::to_string(v));
    }
    SparseIndex idx;
    const uint64_t n = r.u64();
    if (n > r.remaining()) throw Error(ErrorCode::kCorruptIndex, "sparse index count out of range");
    idx.params_.k1 = r.f64();
    idx.params_.b = r.f64();
    idx.avg_length_ = r.f64();
    idx.corpus_id_ = r.str();
    for (uint64_t i = 0; i < n; ++i) {
        idx.ids_.push_back(r.str());
        idx.lengths_.push_back(r.u32());
    }
    const uint64_t terms = r.u64();
    if (terms > r.remaining()) throw Error(ErrorCode::kCorruptIndex, "sparse vocabulary size out of range");
    for (uint64_t t = 0; t < terms; ++t) {
        std::string term = r.str();
        const uint32_t count = r.u32();
        if (count > r.remaining() / 8) throw Error(ErrorCode::kCorruptIndex, "posting list out of range");
        std::vector<Posting> list(count);
        for (auto& p : list) {
            p.doc = r.u32();
            p.tf = r.u32();
            if (p.doc >= n) throw Error(ErrorCode::kCorruptIndex, "posting references unknown chunk");
        }
        idx.postings_.emplace(std::move(term), std::move(list));
    }
    if (!r.done()) throw Error(ErrorCode::kCorruptIndex, "trailing bytes in sparse index");
    return idx;
}

// ---------------------------------------------------------------------------
// DenseIndex

DenseIndex DenseIndex::build(const std::vector<Chunk>& chunks, Embedder& embedder, std::size_t batch_size) {
    if (chunks.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot build an index over zero chunks");
    const auto order = order_by_id(chunks);
    std::vector<std::string> ids;
    std::vector<std::vector<float>> vectors;
    ids.reserve(chunks.size());
    vectors.reserve(chunks.size());
    batch_size = std::max<std::size_t>(batch_size, 1);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        std::vector<std::string> texts;
        for (std::size_t i = start; i < end; ++i) {
            ids.push_back(chunks[order[i]].id);
            texts.push_back(chunks[order[i]].enriched_text);
        }
        std::vector<std::vector<float>> batch;
        try {
            batch = embedder.embed(texts);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw Error(ErrorCode::kEmbedderUnavailable, e.what());
        }
        if (batch.size() != texts.size()) {
            throw Error(ErrorCode::kEmbedderUnavailable, "embedder returned the wrong number of vectors");
        }
        for (auto& v : batch) vectors.push_back(std::move(v));
    }
    return from_vectors(std::move(ids), std::move(vectors), corpus_digest(chunks));
}

DenseIndex DenseIndex::from_vectors(std::vector<std::string> ids, std::vector<std::vector<float>> vectors,
                                    std::string corpus_id) {
    if (ids.size() != vectors.size()) throw Error(ErrorCode::kInvalidArgument, "ids and vectors differ in length");
    if (ids.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot build an index over zero vectors");
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });

    DenseIndex idx;
    idx.dims_ = vectors.front().size();
    if (idx.dims_ == 0) throw Error(ErrorCode::kDimensionMismatch, "zero-dimensional vectors");
    idx.corpus_id_ = std::move(corpus_id);
    idx.matrix_.reserve(ids.size() * idx.dims_);
    for (std::size_t i : order) {
        if (vectors[i].size() != idx.dims_) {
            throw Error(ErrorCode::kDimensionMismatch, "vector for " + ids[i] + " has " +
                                                           std::to_string(vectors[i].size()) + " dims, expected " +
                                                           std::to_string(idx.dims_));
        }
        if (!idx.ids_.empty() && idx.ids_.back() == ids[i]) {
            throw Error(ErrorCode::kInvalidArgument, "duplicate chunk id " + ids[i]);
        }
        l2_normalize(vectors[i]);
        idx.ids_.push_back(std::move(ids[i]));
        idx.matrix_.insert(idx.matrix_.end(), vectors[i].begin(), vectors[i].end());
    }
    return idx;
}

std::vector<float> DenseIndex::vector(std::size_t ordinal) const {
    const auto begin = matrix_.begin() + static_cast<std::ptrdiff_t>(ordinal * dims_);
    return {begin, begin + static_cast<std::ptrdiff_t>(dims_)};
}

std::vector<RetrievalHit> DenseIndex::search(const std::vector<float>& query, std::size_t k) const {
    if (query.size() != dims_) {
        throw Error(ErrorCode::kDimensionMismatch, "query has " + std::to_string(query.size()) +
                                                       " dims, index has " + std::to_string(dims_));
    }
    if (k == 0 || ids_.empty()) return {};
    std::vector<float> q = query;
    l2_normalize(q);
    std::vector<std::pair<double, uint32_t>> scored;
    scored.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        const float* row = matrix_.data() + i * dims_;
        double dot = 0.0;
        for (std::size_t d = 0; d < dims_; ++d) dot += static_cast<double>(row[d]) * q[d];
        scored.emplace_back(dot, static_cast<uint32_t>(i));
    }
    std::vector<RetrievalHit> hits;
    std::size_t rank = 1;
    for (const auto& [score, ord] : top_k(std::move(scored), k)) {
        hits.push_back({ids_[ord], score, HitPath::kDense, rank++, {}});
    }
    return hits;
}

std::string DenseIndex::serialize() const {
    detail::ByteWriter w;
    w.raw(kDenseMagic);
    w.u32(kIndexFormatVersion);
    w.u64(ids_.size());
    w.u32(static_cast<uint32_t>(dims_));
    w.str(corpus_id_);
    for (const auto& id : ids_) w.str(id);
    for (float x : matrix_) w.f32(x);
    return w.take();
}

DenseIndex DenseIndex::deserialize(std::string_view bytes) {
    detail::ByteReader r(bytes);
    if (r.raw(4) != kDenseMagic) throw Error(ErrorCode::kCorruptIndex, "not a dense index file");
    if (const uint32_t v = r.u32(); v != kIndexFormatVersion) {
        throw Error(ErrorCode::kVersionMismatch, "dense index format version " + std::to_string(v));
    }
    DenseIndex idx;
    const uint64_t n = r.u64();
    idx.dims_ = r.u32();
    if (n > r.remaining() || idx.dims_ == 0) throw Error(ErrorCode::kCorruptIndex, "dense index header out of range");
    idx.corpus_id_ = r.str();
    for (uint64_t i = 0; i < n; ++i) idx.ids_.push_back(r.str());
    if (r.remaining() != n * idx.dims_ * 4) throw Error(ErrorCode::kCorruptIndex, "dense matrix size mismatch");
    idx.matrix_.resize(n * idx.dims_);
    for (auto& x : idx.matrix_) x = r.f32();
    return idx;
}

// ---------------------------------------------------------------------------
// Persistence

void persist_indexes(const fs::path& dir, const SparseIndex& sparse, const DenseIndex* dense) {
    if (dense != nullptr && dense->corpus_id() != sparse.corpus_id()) {
        throw Error(ErrorCode::kIndexMismatch, "sparse and dense indexes were built over different corpora");
    }
    fs::path staging = dir;
    staging += ".staging";
    std::error_code ec;
    fs::remove_all(staging, ec);
    if (!fs::create_directories(staging, ec) && ec) {
        throw Error(ErrorCode::kIoFailure, "cannot create " + staging.string() + ": " + ec.message());
    }

    json files = json::object();
    const std::string sparse_bytes = sparse.serialize();
    write_file(staging / "sparse.bin", sparse_bytes);
    files["sparse"] = {{"name", "sparse.bin"},
                       {"bytes", sparse_bytes.size()},
                       {"count", sparse.size()},
                       {"vocabulary", sparse.vocabulary_size()},
                       {"sha256", text::sha256_hex(sparse_bytes)}};
    if (dense != nullptr) {
        const std::string dense_bytes = dense->serialize();
        write_file(staging / "dense.bin", dense_bytes);
        files["dense"] = {{"name", "dense.bin"},
                          {"bytes", dense_bytes.size()},
                          {"count", dense->size()},
                          {"dims", dense->dims()},
                          {"sha256", text::sha256_hex(dense_bytes)}};
    }
    const json manifest = {{"format", "attrag-index"},
                           {"format_version", kIndexFormatVersion},
                           {"corpus_id", sparse.corpus_id()},
                           {"files", files}};
    write_file(staging / "manifest.json", manifest.dump(2) + "\n");

    fs::remove_all(dir, ec);
    fs::rename(staging, dir, ec);
    if (ec) throw Error(ErrorCode::kIoFailure, "cannot move index into " + dir.string() + ": " + ec.message());
}

namespace {

json read_manifest(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
        throw Error(ErrorCode::kIoFailure, "no index manifest in " + dir.string());
    }
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kCorruptIndex, std::string("unreadable manifest: ") + e.what());
    }
    if (!manifest.is_object() || manifest.value("format", "") != "attrag-index") {
        throw Error(ErrorCode::kCorruptIndex, "manifest is not an attrag index manifest");
    }
    if (!manifest.contains("format_version") || !manifest["format_version"].is_number_integer() ||
        manifest["format_version"].get<int>() != kIndexFormatVersion) {
        throw Error(ErrorCode::kVersionMismatch, "unsupported index format version");
    }
    return manifest;
}

std::string read_verified(const fs::path& dir, const json& entry) {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("sha256")) {
        throw Error(ErrorCode::kCorruptIndex, "malformed manifest file entry");
    }
    const std::string data = read_file(dir / entry["name"].get<std::string>());
    if (text::sha256_hex(data) != entry["sha256"].get<std::string>()) {
        throw Error(ErrorCode::kCorruptIndex, "checksum mismatch for " + entry["name"].get<std::string>());
    }
    return data;
}

}  // namespace

LoadedIndexes load_indexes(const fs::path& dir) {
    const json manifest = read_manifest(dir);
    const json files = manifest.value("files", json::object());
    if (!files.contains("sparse")) throw Error(ErrorCode::kCorruptIndex, "manifest lists no sparse index");
    LoadedIndexes out;
    out.sparse = SparseIndex::deserialize(read_verified(dir, files["sparse"]));
    if (files.contains("dense")) out.dense = DenseIndex::deserialize(read_verified(dir, files["dense"]));
    const std::string corpus_id = manifest.value("corpus_id", "");
    if (out.sparse.corpus_id() != corpus_id || (out.dense && out.dense->corpus_id() != corpus_id)) {
        throw Error(ErrorCode::kCorruptIndex, "index files disagree with the manifest corpus id");
    }
    return out;
}

json inspect_indexes(const fs::path& dir) {
    json manifest = read_manifest(dir);
    for (auto& [name, entry] : manifest["files"].items()) {
        read_verified(dir, entry);
        entry["verified"] = true;
    }
    return manifest;
}

}  // namespace attrag
