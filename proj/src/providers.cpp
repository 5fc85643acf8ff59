// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <sstream>
#include <thread>

#include "attrag/error.hpp"
#include "attrag/mock_providers.hpp"
#include "attrag/prompts.hpp"
#include "attrag/text.hpp"

namespace attrag {

void l2_normalize(std::vector<float>& v) {
    double sq = 0.0;
    for (float x : v) sq += static_cast<double>(x) * x;
    if (sq <= 0.0) return;
    const double inv = 1.0 / std::sqrt(sq);
    for (float& x : v) x = static_cast<float>(x * inv);
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------

namespace {

uint64_t fnv1a(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::vector<float> HashingEmbedder::embed_one(const std::string& text_in) const {
    std::vector<float> v(dims_, 0.0f);
    const auto tokens = text::tokenize(text_in);
    for (const auto& tok : tokens) {
        const uint64_t h = fnv1a(tok);
        const float sign = (h >> 63) != 0 ? -1.0f : 1.0f;
        v[h % dims_] += sign;
    }
    bool zero = true;
    for (float x : v) zero = zero && x == 0.0f;
    if (zero) v[0] = 1.0f;
    l2_normalize(v);
    return v;
}

std::vector<std::vector<float>> HashingEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t));
    return out;
}

std::vector<std::vector<float>> InstrumentedEmbedder::embed(const std::vector<std::string>& texts) {
    ++calls_;
    if (const auto ms = delay_ms_.load(); ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    if (down_) throw Error(ErrorCode::kEmbedderUnavailable, "embedding provider is down");
    return inner_.embed(texts);
}

// ---------------------------------------------------------------------------

namespace {

std::string between(const std::string& s, const std::string& open, const std::string& close, std::size_t from = 0) {
    const std::size_t a = s.find(open, from);
    if (a == std::string::npos) return {};
    const std::size_t start = a + open.size();
    const std::size_t b = s.find(close, start);
    return std::string(text::trim(s.substr(start, b == std::string::npos ? std::string::npos : b - start)));
}

std::string coreference_response(const std::string& prompt) {
    // The worked example comes first; the real passage is the last one.
    const std::string example_passage = between(prompt, "PASSAGE:", "\n");
    const std::string example_rewrite = between(prompt, "REWRITTEN:", "\n");
    const std::size_t last = prompt.rfind("PASSAGE:");
    const std::string passage = between(prompt, "PASSAGE:", "\nREWRITTEN:", last);
    if (passage == example_passage) return example_rewrite;
    return passage;
}

}  // namespace

std::string extractive_answer(const std::string& prompt) {
    struct Block {
        std::string title;
        std::vector<std::string> sentences;
    };
    std::vector<Block> blocks;
    std::istringstream in(prompt);
    std::string line;
    bool in_context = false;
    while (std::getline(in, line)) {
        if (line.starts_with("Context blocks:")) {
            in_context = true;
            continue;
        }
        if (line.starts_with("Question:")) break;
        if (!in_context) continue;
        if (line.starts_with("[")) {
            const std::size_t close = line.find("] ");
            blocks.push_back({close == std::string::npos ? line : line.substr(close + 2), {}});
        } else if (line.starts_with("- ") && !blocks.empty()) {
            blocks.back().sentences.push_back(line.substr(2));
        }
    }
    if (blocks.empty() || blocks.front().sentences.empty()) {
        return "The provided context does not contain enough information to answer the question.";
    }
    std::string out = blocks.front().sentences.front() + "\n";
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].sentences.empty()) continue;
        out += "\n**" + std::to_string(i + 1) + ". " + blocks[i].title + "**\n";
        for (const auto& s : blocks[i].sentences) out += "- " + s + "\n";
    }
    return out;
}

void ScriptedLlm::add_rule(Rule rule) {
    std::lock_guard lock(mu_);
    rules_.push_back(std::move(rule));
}

void ScriptedLlm::set_down(const std::string& task, bool down) {
    std::lock_guard lock(mu_);
    if (down) {
        down_.insert(task);
    } else {
        down_.erase(task);
    }
}

std::string ScriptedLlm::prompt_text(const std::vector<ChatMessage>& messages) {
    std::string all;
    for (const auto& m : messages) {
        if (!all.empty()) all += "\n";
        all += m.content;
    }
    return all;
}

std::vector<std::string> ScriptedLlm::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::size_t ScriptedLlm::call_count(const std::string& task) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& c : calls_) n += prompts::task_of(c) == task ? 1 : 0;
    return n;
}

std::string ScriptedLlm::respond(const std::string& prompt) {
    const std::string task = prompts::task_of(prompt);
    {
        std::lock_guard lock(mu_);
        calls_.push_back(prompt);
        if (down_.contains("*") || down_.contains(task)) {
            throw Error(ErrorCode::kLlmUnavailable, "mock provider is down for task '" + task + "'");
        }
        for (const auto& r : rules_) {
            if (!r.task.empty() && r.task != task) continue;
            if (!r.contains.empty() && prompt.find(r.contains) == std::string::npos) continue;
            return r.response;
        }
    }
    if (task == prompts::kCoreference) return coreference_response(prompt);
    if (task == prompts::kUsefulness) return R"({"useful": true, "rationale": "mock judge accepts every passage"})";
    if (task.starts_with("query_")) return "[]";
    if (task == "answer") return extractive_answer(prompt);
    return {};
}

std::string ScriptedLlm::complete(const std::vector<ChatMessage>& messages) {
    return respond(prompt_text(messages));
}

std::string ScriptedLlm::stream(const std::vector<ChatMessage>& messages, const DeltaCallback& on_delta) {
    const std::string full = respond(prompt_text(messages));
    std::size_t piece;
    std::chrono::milliseconds delay;
    {
        std::lock_guard lock(mu_);
        piece = piece_size_ == 0 ? full.size() : piece_size_;
        delay = delay_per_delta_;
    }
    for (std::size_t at = 0; at < full.size(); at += piece) {
        if (delay.count() > 0) std::this_thread::sleep_for(delay);
        if (on_delta) on_delta(std::string_view(full).substr(at, piece));
    }
    return full;
}

}  // namespace attrag
