// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "attrag/config.hpp"
#include "attrag/ingest.hpp"
#include "attrag/mock_providers.hpp"
#include "attrag/service.hpp"

// Helpers shared by the unit tests and the acceptance runner. The oracles
// here are written independently of the library code they check.
namespace attrag::testing {

std::filesystem::path fixture_dir();
std::filesystem::path golden_dir();
std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& data);

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag = "attrag");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

/// Deterministic hooks: timestamps advance one millisecond per call from
/// 2025-02-18T09:00:00.000Z and ids count up per prefix ("cor_0001").
ServiceHooks deterministic_hooks();

/// Date arithmetic via the C library, independent of <chrono> calendars.
std::string shift_days(const std::string& iso, int days);
/// 0 = Monday .. 6 = Sunday.
int weekday_of(const std::string& iso);

/// Whitespace/ASCII-alnum tokenizer and textbook BM25 over a list of texts.
std::vector<std::string> ascii_tokens(const std::string& s);
std::vector<double> bm25_bruteforce(const std::vector<std::string>& docs, const std::string& query, double k1 = 1.2,
                                    double b = 0.75);

/// Random prose with sentence punctuation, optional headings and blank lines.
std::string random_markdown(std::mt19937_64& rng, std::size_t sentences, bool headings);
std::string random_word(std::mt19937_64& rng, std::size_t min_len = 3, std::size_t max_len = 9);

inline constexpr const char* kClimateQuery = "How does climate change affect coral reefs?";

/// A service over the climate fixtures with a scripted generator that returns
/// the fixture answer, a scripted judge that rejects the off-topic article,
/// and the hashing embedder.
struct ClimateService {
    std::unique_ptr<TempDir> dir;
    std::shared_ptr<ScriptedLlm> generator;
    std::shared_ptr<ScriptedLlm> judger;
    std::unique_ptr<Service> service;
    std::string corpus_id;
    std::string conversation_id;

    /// Reopens the service on the same data directory.
    void restart();

  private:
    friend std::unique_ptr<ClimateService> make_climate_service(bool build);
    ServiceConfig config_;
    ServiceHooks hooks_;
};

std::unique_ptr<ClimateService> make_climate_service(bool build = true);

/// Compares `actual` with golden file `name`; with UPDATE_GOLDEN=1 in the
/// environment the file is rewritten instead. Returns an empty string on a
/// match, otherwise a description of the first difference.
std::string check_golden(const std::string& name, const std::string& actual);

/// Conversation overrides used by the golden run.
nlohmann::json climate_retrieval_config();

}  // namespace attrag::testing
