// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/citation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <set>

#include "attrag/error.hpp"
#include "attrag/text.hpp"

namespace attrag {

using nlohmann::json;

std::string_view match_kind_name(MatchKind k) { return k == MatchKind::kExact ? "exact" : "aligned"; }

SentenceScore sentence_score(std::string_view answer_sentence, std::string_view source_sentence) {
    const std::string a = text::case_fold(text::collapse_whitespace(answer_sentence));
    const std::string s = text::case_fold(text::collapse_whitespace(source_sentence));
    if (!a.empty() && !s.empty() && (s.find(a) != std::string::npos || a.find(s) != std::string::npos)) {
        return {1.0, MatchKind::kExact};
    }
    const auto a_tokens = text::tokenize(answer_sentence);
    const std::set<std::string> ta(a_tokens.begin(), a_tokens.end());
    if (ta.empty()) return {0.0, MatchKind::kAligned};
    const auto s_tokens = text::tokenize(source_sentence);
    const std::set<std::string> ts(s_tokens.begin(), s_tokens.end());
    std::size_t shared = 0;
    for (const auto& t : ta) shared += ts.count(t);
    return {static_cast<double>(shared) / static_cast<double>(ta.size()), MatchKind::kAligned};
}

CitationResult match_citations(const StructuredAnswer& answer, const std::vector<EvidenceSpan>& evidence,
                               const CitationOptions& options) {
    if (!(options.tau > 0.0 && options.tau <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "citation threshold must lie in (0, 1]");
    }
    // Unique evidence sentences with the rank of their document.
    struct Candidate {
        const EvidenceSpan* span;
        std::size_t doc_rank;
    };
    std::vector<Candidate> pool;
    std::map<std::string, std::size_t> doc_rank;
    std::set<std::pair<std::string, std::size_t>> seen;
    for (const auto& e : evidence) {
        if (!seen.insert({e.doc_id, e.start}).second) continue;
        auto [it, inserted] = doc_rank.try_emplace(e.doc_id, doc_rank.size());
        pool.push_back({&e, it->second});
    }

    CitationResult result;
    for (const auto& sentence : answer.sentences) {
        bool eligible = false;
        switch (sentence.kind) {
            case SentenceKind::kContent: eligible = sentence.opinion_bearing; break;
            case SentenceKind::kSummary: eligible = options.cite_summary && sentence.opinion_bearing; break;
            case SentenceKind::kHeading: eligible = options.cite_headings; break;
        }
        if (!eligible) continue;

        struct Scored {
            SentenceScore s;
            const Candidate* c;
        };
        std::vector<Scored> hits;
        for (const auto& c : pool) {
            const SentenceScore s = sentence_score(sentence.text, c.span->text);
            if (s.score >= options.tau) hits.push_back({s, &c});
        }
        std::sort(hits.begin(), hits.end(), [](const Scored& x, const Scored& y) {
            if (x.s.score != y.s.score) return x.s.score > y.s.score;
            if (x.c->doc_rank != y.c->doc_rank) return x.c->doc_rank < y.c->doc_rank;
            return x.c->span->start < y.c->span->start;
        });
        if (hits.size() > options.max_per_sentence) hits.resize(options.max_per_sentence);
        if (hits.empty()) {
            result.unsupported.push_back(sentence.index);
            continue;
        }
        for (const auto& h : hits) {
            result.citations.push_back(
                {sentence.index, h.c->span->doc_id, h.c->span->start, h.c->span->end, h.s.score, h.s.kind});
        }
    }
    return result;
}

std::vector<CitationGroup> group_citations(const std::vector<Citation>& citations) {
    std::vector<const Citation*> ordered;
    for (const auto& c : citations) ordered.push_back(&c);
    std::stable_sort(ordered.begin(), ordered.end(), [](const Citation* a, const Citation* b) {
        return a->answer_sentence_index < b->answer_sentence_index;
    });
    std::vector<CitationGroup> groups;
    std::map<std::string, std::size_t> group_of;
    for (const Citation* c : ordered) {
        auto [it, inserted] = group_of.try_emplace(c->doc_id, groups.size());
        if (inserted) groups.push_back({groups.size() + 1, c->doc_id, {}});
        groups[it->second].members.push_back(*c);
    }
    for (auto& g : groups) {
        std::stable_sort(g.members.begin(), g.members.end(), [](const Citation& a, const Citation& b) {
            if (a.start != b.start) return a.start < b.start;
            return a.answer_sentence_index < b.answer_sentence_index;
        });
    }
    return groups;
}

std::vector<CrossReference> cross_reference(const std::vector<CitationGroup>& groups) {
    std::vector<std::set<std::size_t>> cited(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (const auto& m : groups[g].members) cited[g].insert(m.answer_sentence_index);
    }
    std::vector<CrossReference> out;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            std::vector<std::size_t> shared;
            std::set_intersection(cited[i].begin(), cited[i].end(), cited[j].begin(), cited[j].end(),
                                  std::back_inserter(shared));
            if (shared.empty()) continue;
            std::size_t a = groups[i].id;
            std::size_t b = groups[j].id;
            if (a > b) std::swap(a, b);
            out.push_back({a, b, std::move(shared)});
        }
    }
    std::sort(out.begin(), out.end(), [](const CrossReference& x, const CrossReference& y) {
        return std::pair(x.from_group, x.to_group) < std::pair(y.from_group, y.to_group);
    });
    return out;
}

namespace {

/// Group ids cited by each answer sentence, ascending and distinct.
std::map<std::size_t, std::vector<std::size_t>> labels_by_sentence(const std::vector<CitationGroup>& groups) {
    std::map<std::size_t, std::set<std::size_t>> sets;
    for (const auto& g : groups) {
        for (const auto& m : g.members) sets[m.answer_sentence_index].insert(g.id);
    }
    std::map<std::size_t, std::vector<std::size_t>> out;
    for (const auto& [idx, ids] : sets) out[idx].assign(ids.begin(), ids.end());
    return out;
}

}  // namespace

std::string annotate_text(const StructuredAnswer& answer, const std::vector<CitationGroup>& groups) {
    const auto labels = labels_by_sentence(groups);
    std::string out;
    std::size_t pos = 0;
    for (const auto& s : answer.sentences) {
        auto it = labels.find(s.index);
        if (it == labels.end()) continue;
        out.append(answer.raw, pos, s.raw_end - pos);
        out += " ";
        for (std::size_t g : it->second) out += "[" + std::to_string(g) + "]";
        pos = s.raw_end;
    }
    out.append(answer.raw, pos, std::string::npos);
    return out;
}

json annotated_answer_json(const StructuredAnswer& answer, const CitationResult& result,
                           const std::vector<CitationGroup>& groups, const std::vector<CrossReference>& cross_refs,
                           const DocumentLookup& docs) {
    std::map<std::string, std::size_t> group_of;
    for (const auto& g : groups) group_of[g.doc_id] = g.id;
    std::map<std::size_t, std::vector<const Citation*>> by_sentence;
    for (const auto& c : result.citations) by_sentence[c.answer_sentence_index].push_back(&c);
    const std::set<std::size_t> unsupported(result.unsupported.begin(), result.unsupported.end());

    auto sentence_json = [&](std::size_t idx) {
        const auto& s = answer.sentences[idx];
        json cites = json::array();
        for (const Citation* c : by_sentence[idx]) {
            cites.push_back({{"group", group_of.at(c->doc_id)},
                             {"doc_id", c->doc_id},
                             {"span", {c->start, c->end}},
                             {"score", c->score},
                             {"kind", match_kind_name(c->kind)}});
        }
        return json{{"index", s.index},
                    {"text", s.text},
                    {"kind", sentence_kind_name(s.kind)},
                    {"opinion_bearing", s.opinion_bearing},
                    {"citations", cites},
                    {"unsupported", unsupported.contains(idx)}};
    };

    json summary_sentences = json::array();
    for (std::size_t i : answer.summary) summary_sentences.push_back(sentence_json(i));
    json sections = json::array();
    for (const auto& sec : answer.sections) {
        json body = json::array();
        for (std::size_t i : sec.body) body.push_back(sentence_json(i));
        sections.push_back({{"heading", sec.heading ? json(answer.sentences[*sec.heading].text) : json(nullptr)},
                            {"heading_index", sec.heading ? json(*sec.heading) : json(nullptr)},
                            {"sentences", body}});
    }
    json group_list = json::array();
    for (const auto& g : groups) {
        const Document* doc = docs ? docs(g.doc_id) : nullptr;
        json spans = json::array();
        for (const auto& m : g.members) {
            spans.push_back({{"span", {m.start, m.end}},
                             {"sentence_index", m.answer_sentence_index},
                             {"text", doc ? doc->body.substr(m.start, m.end - m.start) : std::string()}});
        }
        group_list.push_back(
            {{"id", g.id},
             {"label", g.label()},
             {"doc_id", g.doc_id},
             {"title", doc ? json(doc->title) : json(nullptr)},
             {"source_uri", doc ? json(doc->source_uri) : json(nullptr)},
             {"publish_date", doc && doc->publish_date ? json(format_iso_date(*doc->publish_date)) : json(nullptr)},
             {"spans", spans}});
    }
    json xrefs = json::array();
    for (const auto& x : cross_refs) {
        xrefs.push_back({{"from_group", x.from_group},
                         {"to_group", x.to_group},
                         {"shared_sentence_indexes", x.shared_sentence_indexes}});
    }
    return {{"summary", {{"text", answer.summary_text()}, {"sentences", summary_sentences}}},
            {"sections", sections},
            {"groups", group_list},
            {"cross_references", xrefs},
            {"annotated_text", annotate_text(answer, groups)},
            {"raw", answer.raw}};
}

}  // namespace attrag
