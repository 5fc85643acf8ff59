// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace attrag::testing {

namespace fs = std::filesystem;

fs::path fixture_dir() { return ATTRAG_FIXTURE_DIR; }
fs::path golden_dir() { return ATTRAG_GOLDEN_DIR; }

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& data) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << data;
}

TempDir::TempDir(const std::string& tag) {
    static std::mutex mu;
    static std::mt19937_64 rng(std::random_device{}());
    std::lock_guard lock(mu);
    for (;;) {
        path_ = fs::temp_directory_path() / (tag + "-" + std::to_string(rng() % 100000000));
        if (fs::create_directories(path_)) break;
    }
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

ServiceHooks deterministic_hooks() {
    struct State {
        std::mutex mu;
        long long tick = 0;
        std::map<std::string, int> ids;
    };
    auto st = std::make_shared<State>();
    ServiceHooks h;
    h.clock = [st] {
        std::lock_guard lock(st->mu);
        const long long t = st->tick++;
        char buf[40];
        std::snprintf(buf, sizeof buf, "2025-02-18T09:%02lld:%02lld.%03lldZ", (t / 60000) % 60, (t / 1000) % 60,
                      t % 1000);
        return std::string(buf);
    };
    h.new_id = [st](std::string_view prefix) {
        std::lock_guard lock(st->mu);
        const int n = ++st->ids[std::string(prefix)];
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d", n);
        return std::string(prefix) + "_" + buf;
    };
    return h;
}

namespace {

std::tm tm_of(const std::string& iso) {
    std::tm tm{};
    if (std::sscanf(iso.c_str(), "%d-%d-%d", &tm.tm_year, &tm.tm_mon, &tm.tm_mday) != 3) {
        throw std::runtime_error("bad date " + iso);
    }
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    tm.tm_hour = 12;
    return tm;
}

}  // namespace

std::string shift_days(const std::string& iso, int days) {
    std::tm tm = tm_of(iso);
    std::time_t t = timegm(&tm) + static_cast<std::time_t>(days) * 86400;
    std::tm out{};
    gmtime_r(&t, &out);
    char buf[16];
    std::strftime(buf, sizeof buf, "%Y-%m-%d", &out);
    return buf;
}

int weekday_of(const std::string& iso) {
    std::tm tm = tm_of(iso);
    std::time_t t = timegm(&tm);
    std::tm out{};
    gmtime_r(&t, &out);
    return (out.tm_wday + 6) % 7;
}

std::vector<std::string> ascii_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            cur += static_cast<char>(std::tolower(u));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<double> bm25_bruteforce(const std::vector<std::string>& docs, const std::string& query, double k1,
                                    double b) {
    std::vector<std::vector<std::string>> toks;
    double total = 0;
    for (const auto& d : docs) {
        toks.push_back(ascii_tokens(d));
        total += static_cast<double>(toks.back().size());
    }
    const double n = static_cast<double>(docs.size());
    const double avgdl = total / n;
    std::vector<std::string> terms = ascii_tokens(query);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    std::vector<double> scores(docs.size(), 0.0);
    for (const auto& term : terms) {
        double df = 0;
        for (const auto& t : toks) df += std::count(t.begin(), t.end(), term) > 0 ? 1 : 0;
        if (df == 0) continue;
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const double tf = static_cast<double>(std::count(toks[i].begin(), toks[i].end(), term));
            if (tf == 0) continue;
            const double dl = static_cast<double>(toks[i].size());
            scores[i] += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl));
        }
    }
    return scores;
}

std::string random_word(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
    static const std::string letters = "abcdefghijklmnopqrstuvwxyz";
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1);
    std::string w;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) w += letters[pick(rng)];
    return w;
}

std::string random_markdown(std::mt19937_64& rng, std::size_t sentences, bool headings) {
    std::uniform_int_distribution<int> words(3, 14);
    std::uniform_int_distribution<int> coin(0, 9);
    static const char* enders[] = {".", "!", "?", "."};
    std::string out;
    for (std::size_t s = 0; s < sentences; ++s) {
        if (headings && s > 0 && coin(rng) == 0) out += "\n\n## " + random_word(rng) + " " + random_word(rng) + "\n\n";
        std::string sent = random_word(rng);
        sent[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sent[0])));
        const int n = words(rng);
        for (int i = 1; i < n; ++i) {
            sent += (coin(rng) == 0 ? ", " : " ") + random_word(rng, 1, 10);
        }
        if (coin(rng) == 1) sent += " caf\xC3\xA9";  // some multibyte text
        sent += enders[coin(rng) % 4];
        out += sent;
        out += coin(rng) < 2 ? "\n\n" : " ";
    }
    return out;
}

std::string check_golden(const std::string& name, const std::string& actual) {
    const fs::path path = golden_dir() / name;
    if (const char* update = std::getenv("UPDATE_GOLDEN"); update != nullptr && std::string(update) == "1") {
        write_file(path, actual);
        return {};
    }
    if (!fs::exists(path)) return "missing golden file " + path.string();
    const std::string want = read_file(path);
    if (want == actual) return {};
    std::size_t at = 0;
    while (at < want.size() && at < actual.size() && want[at] == actual[at]) ++at;
    const auto around = [at](const std::string& s) { return s.substr(at < 40 ? 0 : at - 40, 120); };
    return name + " differs at byte " + std::to_string(at) + "\n  want: " + around(want) + "\n  got:  " +
           around(actual);
}

nlohmann::json climate_retrieval_config() { return {{"max_evidence_sentences", 8}}; }

namespace {

Service* open_service(ClimateService& cs, const ServiceConfig& config, const ServiceHooks& hooks) {
    ProviderRegistry reg;
    reg.llms["mock"] = cs.generator;
    reg.llms["judge"] = cs.judger;
    reg.embedder = std::make_shared<HashingEmbedder>(256);
    cs.service = std::make_unique<Service>(config, std::move(reg), hooks);
    return cs.service.get();
}

}  // namespace

void ClimateService::restart() {
    service.reset();
    open_service(*this, config_, hooks_);
}

std::unique_ptr<ClimateService> make_climate_service(bool build) {
    auto cs = std::make_unique<ClimateService>();
    cs->dir = std::make_unique<TempDir>("attrag-climate");
    cs->generator = std::make_shared<ScriptedLlm>();
    cs->judger = std::make_shared<ScriptedLlm>();
    cs->generator->add_rule({"answer", "", read_file(fixture_dir() / "climate" / "answer.md")});
    cs->generator->set_stream_piece_size(96);
    cs->judger->add_rule({"usefulness", "Quarterly Market Update",
                          R"({"useful": false, "rationale": "financial news, unrelated to coral reefs"})"});

    cs->config_.data_dir = cs->dir->path() / "data";
    cs->config_.llms = {{"mock", {}}, {"judge", {}}};
    cs->config_.default_llm = "mock";
    cs->config_.default_judger = "judge";
    cs->hooks_ = deterministic_hooks();
    Service& svc = *open_service(*cs, cs->config_, cs->hooks_);

    cs->corpus_id = svc.create_corpus("climate")["id"].get<std::string>();
    const Metadata dated{{"publish_date", "2025-02-18"}};
    for (const char* name : {"ocean_heat.md", "heat_stress.md", "iconic_reefs.html", "markets.json"}) {
        Metadata md = dated;
        md["source_uri"] = name;
        svc.upload_document(cs->corpus_id, name, read_file(fixture_dir() / "climate" / name), std::nullopt, md);
    }
    if (build) {
        svc.build_index(cs->corpus_id);
        cs->conversation_id =
            svc.create_conversation(cs->corpus_id, climate_retrieval_config())["id"].get<std::string>();
    }
    return cs;
}

}  // namespace attrag::testing
