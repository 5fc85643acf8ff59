// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "attrag/dates.hpp"

namespace attrag {

using Metadata = std::map<std::string, std::string>;

/// Half-open byte range [start, end) into Document::body.
struct SentenceSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t index = 0;

    bool operator==(const SentenceSpan&) const = default;
};

/// A section heading below the title. `offset` is where the section's
/// content begins in the body.
struct Heading {
    int level = 1;
    std::string text;
    std::size_t offset = 0;

    bool operator==(const Heading&) const = default;
};

struct Document {
    std::string id;
    std::string title;
    std::string source_uri;
    std::optional<Date> publish_date;
    std::string body;
    std::vector<SentenceSpan> sentences;
    std::vector<Heading> headings;
    Metadata metadata;

    std::string_view sentence_text(std::size_t i) const {
        const auto& s = sentences.at(i);
        return std::string_view(body).substr(s.start, s.end - s.start);
    }

    bool operator==(const Document&) const = default;
};

enum class Format { kText, kMarkdown, kHtml, kJson };

std::string_view format_name(Format f);
std::optional<Format> parse_format(std::string_view name);
/// Maps ".txt", ".md", ".markdown", ".html", ".htm", ".json".
std::optional<Format> format_from_filename(std::string_view filename);

/// Abbreviations whose trailing period does not end a sentence.
class SentenceSegmenter {
  public:
    /// Uses the bundled English abbreviation list.
    SentenceSegmenter();
    explicit SentenceSegmenter(std::set<std::string> abbreviations);

    std::vector<SentenceSpan> segment(std::string_view body) const;

    const std::set<std::string>& abbreviations() const { return abbreviations_; }

    static const SentenceSegmenter& default_instance();

  private:
    bool is_abbreviation(std::string_view word) const;

    std::set<std::string> abbreviations_;  // lowercase, with trailing '.'
};

std::vector<SentenceSpan> segment_sentences(std::string_view body);

/// Parses raw bytes into a normalized Document.
///
/// Recognized metadata keys: "publish_date" (YYYY-MM-DD) and "source_uri".
/// Every other entry is copied into Document::metadata.
///
/// Throws Error with kUndecodableInput, kMalformedJson or kEmptyDocument.
Document parse_document(std::string_view raw, Format format, const Metadata& metadata = {});

/// Content hash over (source_uri, body).
std::string document_id(std::string_view source_uri, std::string_view body);

/// Exposed for tests: entity decoding used by the HTML parser.
std::string decode_html_entities(std::string_view s);

}  // namespace attrag
