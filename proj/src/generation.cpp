// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/generation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>

#include "attrag/error.hpp"
#include "attrag/prompts.hpp"
#include "attrag/text.hpp"

namespace attrag {

using nlohmann::json;

std::string ContextBlock::render() const {
    std::string out = "[" + std::to_string(id) + "] " + title;
    for (const auto& s : sentences) out += "\n- " + text::collapse_whitespace(s.text);
    return out;
}

std::string Prompt::rendered_context() const {
    std::string out;
    for (const auto& b : blocks) {
        if (!out.empty()) out += "\n\n";
        out += b.render();
    }
    return out;
}

std::vector<ChatMessage> Prompt::messages() const {
    std::vector<ChatMessage> out{{"system", system}};
    out.insert(out.end(), history.begin(), history.end());
    out.push_back({"user", prompts::render(prompts::get(prompts::kAnswerUser),
                                           {{"context", rendered_context()}, {"query", user_query}})});
    return out;
}

Prompt assemble_prompt(std::string_view query, const std::vector<EvidenceSpan>& evidence, const DocumentLookup& docs,
                       const std::vector<ChatMessage>& history, std::size_t budget_chars) {
    if (evidence.empty()) throw Error(ErrorCode::kEmptyEvidence, "no evidence to build a prompt from");
    Prompt prompt;
    prompt.system = std::string(prompts::get(prompts::kAnswerSystem));
    prompt.user_query = std::string(query);
    prompt.history = history;

    std::map<std::string, std::size_t> block_of;
    std::set<std::pair<std::string, std::size_t>> seen;
    for (const auto& e : evidence) {
        if (!seen.insert({e.doc_id, e.sentence_index}).second) continue;
        auto [it, inserted] = block_of.try_emplace(e.doc_id, prompt.blocks.size());
        if (inserted) {
            const Document* doc = docs ? docs(e.doc_id) : nullptr;
            prompt.blocks.push_back({prompt.blocks.size() + 1, e.doc_id, doc ? doc->title : e.doc_id, {}});
        }
        prompt.blocks[it->second].sentences.push_back(e);
    }
    for (auto& b : prompt.blocks) {
        std::sort(b.sentences.begin(), b.sentences.end(),
                  [](const EvidenceSpan& x, const EvidenceSpan& y) { return x.sentence_index < y.sentence_index; });
    }

    while (prompt.blocks.size() > 1 && prompt.rendered_context().size() > budget_chars) prompt.blocks.pop_back();
    auto& first = prompt.blocks.front().sentences;
    while (first.size() > 1 && prompt.rendered_context().size() > budget_chars) first.pop_back();
    return prompt;
}

namespace {

// Thrown from inside the delta callback to abandon a stream past its deadline.
struct DeadlineExceeded {};

}  // namespace

std::string generate(const Prompt& prompt, LlmProvider& llm, const GenerateOptions& options) {
    using Clock = std::chrono::steady_clock;
    const auto start = Clock::now();
    const bool has_deadline = options.timeout.count() > 0;
    auto expired = [&] { return has_deadline && Clock::now() - start > options.timeout; };
    auto timeout_error = [&] {
        return Error(ErrorCode::kProviderTimeout,
                     "generation exceeded " + std::to_string(options.timeout.count()) + " ms");
    };

    const auto messages = prompt.messages();
    std::string text;
    try {
        if (options.stream) {
            text = llm.stream(messages, [&](std::string_view delta) {
                if (expired()) throw DeadlineExceeded{};
                if (options.on_delta) options.on_delta(delta);
            });
        } else {
            text = llm.complete(messages);
        }
    } catch (const DeadlineExceeded&) {
        throw timeout_error();
    }
    if (expired()) throw timeout_error();
    return text;
}

// ---------------------------------------------------------------------------
// Structured answers

std::string_view sentence_kind_name(SentenceKind k) {
    switch (k) {
        case SentenceKind::kSummary: return "summary";
        case SentenceKind::kHeading: return "heading";
        case SentenceKind::kContent: return "content";
    }
    return "content";
}

std::string StructuredAnswer::summary_text() const {
    std::string out;
    for (std::size_t i : summary) {
        if (!out.empty()) out += " ";
        out += sentences[i].text;
    }
    return out;
}

std::string StructuredAnswer::heading_text(const AnswerSection& s) const {
    return s.heading ? sentences[*s.heading].text : std::string();
}

namespace {

const std::set<std::string>& function_words() {
    static const std::set<std::string> words = {
        "a",       "an",    "and",   "are",   "as",     "at",    "be",      "been",  "but",  "by",
        "can",     "could", "do",    "does",  "for",    "from",  "had",     "has",   "have", "here",
        "how",     "i",     "if",    "in",    "into",   "is",    "it",      "its",   "may",  "might",
        "more",    "most",  "of",    "on",    "or",     "our",   "so",      "some",  "such", "than",
        "that",    "the",   "their", "them",  "then",   "there", "these",   "they",  "this", "those",
        "to",      "too",   "us",    "was",   "we",     "were",  "what",    "when",  "where", "which",
        "while",   "who",   "why",   "will",  "with",   "would", "you",     "your",  "also", "however",
        "overall", "thus",  "therefore", "furthermore", "moreover", "additionally", "finally", "first",
        "firstly", "second", "secondly", "third", "thirdly", "next", "lastly", "summary", "conclusion",
        "short",   "brief", "sum",   "up",    "below",  "above", "following", "follows", "key", "points",
        "aspects", "answer", "question", "note", "sources", "source", "references"};
    return words;
}

const std::vector<std::regex>& structural_patterns() {
    static const std::vector<std::regex> patterns = [] {
        const auto flags = std::regex::ECMAScript | std::regex::icase;
        return std::vector<std::regex>{
            // Bare connectives and sign-posts, optionally punctuated.
            std::regex(R"(^(in summary|in conclusion|in short|in brief|to summarize|to sum up|overall|additionally|furthermore|moreover|however|therefore|thus|finally|first(ly)?|second(ly)?|third(ly)?|lastly|next|also)\W*$)",
                       flags),
            // Lead-ins that only announce a list.
            std::regex(R"(^(here (is|are)|the following|below (is|are)|key (points|aspects|findings))\b.*:\s*$)", flags),
            std::regex(R"(^.*\b(as follows|the following)\s*:\s*$)", flags),
            // Declining to answer.
            std::regex(R"(^(the )?(provided )?(context|documents?|sources?) (does|do) not (contain|provide)\b.*$)", flags),
            std::regex(R"(^(i|we) (do not|don't|cannot|can't) (know|find|answer)\b.*$)", flags),
        };
    }();
    return patterns;
}

std::string strip_inline_markup(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '*' || c == '`') continue;
        out.push_back(c);
    }
    std::string collapsed = text::collapse_whitespace(out);
    // "__bold__" without the intraword underscores of identifiers.
    std::string result;
    for (std::size_t i = 0; i < collapsed.size(); ++i) {
        if (collapsed.compare(i, 2, "__") == 0) {
            ++i;
            continue;
        }
        result.push_back(collapsed[i]);
    }
    return result;
}

struct Line {
    std::size_t start;  // first byte of the line
    std::size_t end;    // one past the last byte, excluding '\n'
};

std::vector<Line> split_lines(std::string_view raw) {
    std::vector<Line> lines;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        std::size_t nl = raw.find('\n', pos);
        if (nl == std::string_view::npos) nl = raw.size();
        lines.push_back({pos, nl});
        pos = nl + 1;
    }
    return lines;
}

struct HeadingMatch {
    std::size_t start;
    std::size_t end;
    std::string text;
};

std::optional<HeadingMatch> match_heading(std::string_view raw, const Line& line) {
    static const std::regex atx(R"(^[ \t]{0,3}(#{1,6})[ \t]+(.*?)[ \t]*#*[ \t]*$)");
    static const std::regex bold(R"(^[ \t]*((\d+[.)][ \t]*)?(\*\*|__)([^*_\n]|[*_](?![*_]))+?(\*\*|__))[ \t]*:?[ \t]*$)");
    static const std::regex bold_inner(R"(^(\d+[.)][ \t]*)?(\*\*|__)(.*)(\*\*|__)$)");
    const std::string s(raw.substr(line.start, line.end - line.start));
    std::smatch m;
    if (std::regex_match(s, m, atx)) {
        const std::size_t begin = line.start + static_cast<std::size_t>(m.position(2));
        const std::string body = m.str(2);
        if (body.empty()) return std::nullopt;
        return HeadingMatch{begin, begin + body.size(), strip_inline_markup(body)};
    }
    if (std::regex_match(s, m, bold)) {
        const std::string whole = m.str(1);
        std::smatch inner;
        if (!std::regex_match(whole, inner, bold_inner) || inner.str(2) != inner.str(4)) return std::nullopt;
        const std::size_t begin = line.start + static_cast<std::size_t>(m.position(1));
        std::string label = inner.str(1);
        std::string heading = strip_inline_markup(label + inner.str(3));
        if (heading.empty()) return std::nullopt;
        return HeadingMatch{begin, begin + whole.size(), heading};
    }
    return std::nullopt;
}

/// Length of a list marker plus its trailing whitespace, or 0.
std::size_t bullet_marker(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    if (j < line.size() && (line[j] == '-' || line[j] == '*' || line[j] == '+')) {
        ++j;
    } else if (line.substr(j).starts_with("•")) {
        j += 3;
    } else {
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
        if (j == i || j - i > 3 || j >= line.size() || (line[j] != '.' && line[j] != ')')) return 0;
        ++j;
    }
    if (j >= line.size() || (line[j] != ' ' && line[j] != '\t')) return 0;
    while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) ++j;
    return j;
}

}  // namespace

bool is_opinion_bearing(std::string_view sentence) {
    std::string cleaned = strip_inline_markup(sentence);
    for (const auto& re : structural_patterns()) {
        if (std::regex_match(cleaned, re)) return false;
    }
    const auto& stop = function_words();
    for (const auto& t : text::tokenize(cleaned)) {
        if (!stop.contains(t)) return true;
    }
    return false;
}

StructuredAnswer parse_structured_answer(std::string_view raw_in) {
    StructuredAnswer answer;
    answer.raw = std::string(raw_in);
    const std::string_view raw = answer.raw;
    const auto lines = split_lines(raw);

    // Segments of prose: (start, end) in raw plus the section they belong
    // to, where npos stands for the summary.
    constexpr std::size_t kSummary = std::string::npos;
    struct Segment {
        std::size_t start;
        std::size_t end;
        std::size_t section;
    };
    struct Item {
        enum Kind { kHeading, kSegment } kind;
        HeadingMatch heading;
        Segment segment;
    };
    std::vector<Item> items;

    bool any_heading = false;
    for (const auto& l : lines) {
        if (match_heading(raw, l)) {
            any_heading = true;
            break;
        }
    }
    std::size_t section = any_heading ? kSummary : 0;
    if (!any_heading) answer.sections.push_back({});

    std::optional<Segment> open;
    auto close = [&] {
        if (open && open->end > open->start) items.push_back({Item::kSegment, {}, *open});
        open.reset();
    };
    std::size_t section_count = any_heading ? 0 : 1;
    for (const auto& l : lines) {
        const std::string_view line = raw.substr(l.start, l.end - l.start);
        if (text::is_blank(line)) {
            close();
            continue;
        }
        if (auto h = match_heading(raw, l)) {
            close();
            section = section_count++;
            items.push_back({Item::kHeading, *h, {0, 0, section}});
            continue;
        }
        const std::size_t marker = bullet_marker(line);
        if (marker > 0) {
            close();
            open = Segment{l.start + marker, l.end, section};
            continue;
        }
        if (open) {
            open->end = l.end;
        } else {
            std::size_t lead = 0;
            while (lead < line.size() && (line[lead] == ' ' || line[lead] == '\t' || line[lead] == '>')) ++lead;
            open = Segment{l.start + lead, l.end, section};
        }
    }
    close();

    answer.sections.resize(section_count);
    for (const auto& item : items) {
        if (item.kind == Item::kHeading) {
            const std::size_t idx = answer.sentences.size();
            answer.sentences.push_back(
                {item.heading.text, idx, SentenceKind::kHeading, false, item.heading.start, item.heading.end});
            answer.sections[item.segment.section].heading = idx;
            continue;
        }
        const auto& seg = item.segment;
        const auto spans = segment_sentences(raw.substr(seg.start, seg.end - seg.start));
        for (const auto& sp : spans) {
            const std::size_t idx = answer.sentences.size();
            const std::size_t a = seg.start + sp.start;
            const std::size_t b = seg.start + sp.end;
            std::string cleaned = strip_inline_markup(raw.substr(a, b - a));
            if (cleaned.empty()) continue;
            const bool in_summary = seg.section == kSummary;
            AnswerSentence s{std::move(cleaned), idx, in_summary ? SentenceKind::kSummary : SentenceKind::kContent,
                             false, a, b};
            s.opinion_bearing = is_opinion_bearing(s.text);
            answer.sentences.push_back(std::move(s));
            if (in_summary) {
                answer.summary.push_back(idx);
            } else {
                answer.sections[seg.section].body.push_back(idx);
            }
        }
    }
    return answer;
}

std::string render_markdown(const StructuredAnswer& answer) {
    std::string out = answer.summary_text();
    for (const auto& sec : answer.sections) {
        if (!out.empty()) out += "\n\n";
        if (sec.heading) out += "**" + answer.sentences[*sec.heading].text + "**";
        for (std::size_t i : sec.body) {
            if (!out.empty() && out.back() != '\n') out += "\n";
            out += "- " + answer.sentences[i].text;
        }
    }
    return out;
}

json to_json(const Prompt& prompt) {
    json blocks = json::array();
    for (const auto& b : prompt.blocks) {
        json sentences = json::array();
        for (const auto& s : b.sentences) sentences.push_back(to_json(s));
        blocks.push_back({{"id", b.id}, {"doc_id", b.doc_id}, {"title", b.title}, {"sentences", sentences}});
    }
    return {{"blocks", blocks}, {"context", prompt.rendered_context()}, {"query", prompt.user_query}};
}

}  // namespace attrag
