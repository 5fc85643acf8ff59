// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/ingest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

#include "attrag/error.hpp"
#include "attrag/resources.hpp"
#include "attrag/text.hpp"

namespace attrag {

namespace {

bool is_terminator(char32_t cp) {
    switch (cp) {
        case U'.':
        case U'!':
        case U'?':
        case U'…':
        case U'‼':
        case U'。':
        case U'！':
        case U'？':
        case U'．':
            return true;
        default:
            return false;
    }
}

bool is_cjk_terminator(char32_t cp) {
    return cp == U'。' || cp == U'！' || cp == U'？' || cp == U'．';
}

bool is_closer(char32_t cp) {
    switch (cp) {
        case U'"':
        case U'\'':
        case U')':
        case U']':
        case U'”':
        case U'’':
        case U'»':
        case U'」':
        case U'』':
        case U'）':
            return true;
        default:
            return false;
    }
}

std::set<std::string> load_abbreviations() {
    std::set<std::string> out;
    std::istringstream in{std::string(resource("abbreviations.txt"))};
    std::string line;
    while (std::getline(in, line)) {
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.insert(text::to_lower_ascii(t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Body assembly shared by the markup parsers: blocks become paragraphs
// separated by one blank line; headings point at the next block.

class BodyBuilder {
  public:
    void add_block(std::string_view block) {
        auto t = text::trim(block);
        if (t.empty()) return;
        blocks_.push_back(text::to_nfc(t));
    }

    void add_heading(int level, std::string_view heading_text) {
        std::string t = text::to_nfc(text::collapse_whitespace(heading_text));
        if (t.empty()) return;
        headings_.push_back({level, std::move(t), blocks_.size()});
    }

    struct PendingHeading {
        int level;
        std::string text;
        std::size_t block_index;
    };

    std::vector<PendingHeading>& headings() { return headings_; }

    std::string build(std::vector<Heading>& out_headings) const {
        std::string body;
        std::vector<std::size_t> offsets;
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            if (i > 0) body += "\n\n";
            offsets.push_back(body.size());
            body += blocks_[i];
        }
        for (const auto& h : headings_) {
            const std::size_t off = h.block_index < offsets.size() ? offsets[h.block_index] : body.size();
            out_headings.push_back({h.level, h.text, off});
        }
        return body;
    }

    std::string first_line() const {
        if (blocks_.empty()) return {};
        const auto& b = blocks_.front();
        return std::string(text::trim(b.substr(0, b.find('\n'))));
    }

  private:
    std::vector<std::string> blocks_;
    std::vector<PendingHeading> headings_;
};

std::string unify_newlines(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '\r') {
            out.push_back('\n');
            if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
        } else {
            out.push_back(raw[i]);
        }
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find('\n', start);
        if (end == std::string_view::npos) end = s.size();
        lines.push_back(s.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::string first_nonblank_line(std::string_view body) {
    for (auto line : split_lines(body)) {
        auto t = text::trim(line);
        if (!t.empty()) return std::string(t);
    }
    return {};
}

// ---------------------------------------------------------------------------
// Markdown

bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

bool is_word_byte(std::string_view s, std::size_t i) {
    if (i >= s.size()) return false;
    const auto c = static_cast<unsigned char>(s[i]);
    return std::isalnum(c) || c >= 0x80;
}

std::string strip_markdown_inline(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (c == '\\' && i + 1 < s.size() && is_ascii_punct(s[i + 1])) {
            out.push_back(s[i + 1]);
            i += 2;
            continue;
        }
        if (c == '`') {
            std::size_t ticks = 0;
            while (i + ticks < s.size() && s[i + ticks] == '`') ++ticks;
            const std::string fence(ticks, '`');
            const std::size_t close = s.find(fence, i + ticks);
            if (close != std::string_view::npos) {
                out.append(s.substr(i + ticks, close - i - ticks));
                i = close + ticks;
            } else {
                i += ticks;
            }
            continue;
        }
        // [text](url), ![alt](url), [text][ref]
        if (c == '[' || (c == '!' && i + 1 < s.size() && s[i + 1] == '[')) {
            const std::size_t open = c == '!' ? i + 1 : i;
            const std::size_t close = s.find(']', open + 1);
            if (close != std::string_view::npos && close + 1 < s.size() &&
                (s[close + 1] == '(' || s[close + 1] == '[')) {
                const char end_char = s[close + 1] == '(' ? ')' : ']';
                const std::size_t end = s.find(end_char, close + 2);
                if (end != std::string_view::npos) {
                    out += strip_markdown_inline(s.substr(open + 1, close - open - 1));
                    i = end + 1;
                    continue;
                }
            }
        }
        if (c == '<') {
            const std::size_t end = s.find('>', i + 1);
            if (end != std::string_view::npos && end > i + 1) {
                const std::string_view inner = s.substr(i + 1, end - i - 1);
                if (inner.find("://") != std::string_view::npos || inner.starts_with("mailto:")) {
                    out.append(inner);
                    i = end + 1;
                    continue;
                }
                if (std::isalpha(static_cast<unsigned char>(inner[0])) || inner[0] == '/') {
                    i = end + 1;
                    continue;
                }
            }
        }
        if (c == '*' || c == '~') {
            ++i;
            continue;
        }
        if (c == '_') {
            // Intraword underscores (snake_case) are literal.
            if (i > 0 && is_word_byte(s, i - 1) && is_word_byte(s, i + 1)) {
                out.push_back(c);
            }
            ++i;
            continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

int atx_heading_level(std::string_view line, std::string_view& heading_text) {
    std::size_t indent = 0;
    while (indent < line.size() && indent < 3 && line[indent] == ' ') ++indent;
    std::size_t hashes = 0;
    while (indent + hashes < line.size() && line[indent + hashes] == '#') ++hashes;
    if (hashes == 0 || hashes > 6) return 0;
    const std::size_t after = indent + hashes;
    if (after < line.size() && line[after] != ' ' && line[after] != '\t') return 0;
    std::string_view rest = text::trim(line.substr(after));
    while (!rest.empty() && rest.back() == '#') rest.remove_suffix(1);
    heading_text = text::trim(rest);
    return static_cast<int>(hashes);
}

bool is_thematic_break(std::string_view t) {
    if (t.size() < 3) return false;
    const char m = t[0];
    if (m != '-' && m != '*' && m != '_') return false;
    int count = 0;
    for (char c : t) {
        if (c == m) {
            ++count;
        } else if (c != ' ' && c != '\t') {
            return false;
        }
    }
    return count >= 3;
}

bool all_of_char(std::string_view t, char m) {
    return !t.empty() && std::all_of(t.begin(), t.end(), [m](char c) { return c == m; });
}

/// Returns the item content when `line` is a list item.
std::optional<std::string_view> list_item_content(std::string_view line) {
    std::string_view t = line;
    while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.remove_prefix(1);
    if (t.size() >= 2 && (t[0] == '-' || t[0] == '*' || t[0] == '+') && (t[1] == ' ' || t[1] == '\t')) {
        t.remove_prefix(2);
    } else {
        std::size_t digits = 0;
        while (digits < t.size() && digits < 9 && std::isdigit(static_cast<unsigned char>(t[digits]))) ++digits;
        if (digits == 0 || digits + 1 >= t.size()) return std::nullopt;
        if ((t[digits] != '.' && t[digits] != ')') || (t[digits + 1] != ' ' && t[digits + 1] != '\t')) {
            return std::nullopt;
        }
        t.remove_prefix(digits + 2);
    }
    t = text::trim(t);
    if (t.starts_with("[ ] ") || t.starts_with("[x] ") || t.starts_with("[X] ")) t.remove_prefix(4);
    return t;
}

bool is_table_separator(std::string_view t) {
    if (t.empty() || t.front() != '|') return false;
    return std::all_of(t.begin(), t.end(), [](char c) { return c == '|' || c == '-' || c == ':' || c == ' '; });
}

std::string table_row_text(std::string_view t) {
    std::string out;
    std::size_t start = 0;
    while (start < t.size()) {
        std::size_t bar = t.find('|', start);
        if (bar == std::string_view::npos) bar = t.size();
        auto cell = text::trim(t.substr(start, bar - start));
        if (!cell.empty()) {
            if (!out.empty()) out += " | ";
            out += strip_markdown_inline(cell);
        }
        start = bar + 1;
    }
    return out;
}

void parse_markdown(std::string_view raw, BodyBuilder& builder) {
    std::vector<std::string> paragraph;
    bool in_fence = false;
    std::string fence_marker;

    auto flush = [&](bool inline_markup = true) {
        if (paragraph.empty()) return;
        std::string joined;
        for (std::size_t i = 0; i < paragraph.size(); ++i) {
            if (i > 0) joined += '\n';
            joined += paragraph[i];
        }
        paragraph.clear();
        builder.add_block(inline_markup ? strip_markdown_inline(joined) : joined);
    };

    for (std::string_view line : split_lines(raw)) {
        const std::string_view t = text::trim(line);
        if (in_fence) {
            if (t.starts_with(fence_marker)) {
                flush(false);
                in_fence = false;
            } else if (t.empty()) {
                flush(false);
            } else {
                paragraph.emplace_back(line);
            }
            continue;
        }
        if (t.starts_with("```") || t.starts_with("~~~")) {
            flush();
            in_fence = true;
            fence_marker = std::string(t.substr(0, 3));
            continue;
        }
        if (t.empty()) {
            flush();
            continue;
        }
        std::string_view heading_text;
        if (int level = atx_heading_level(line, heading_text); level > 0) {
            flush();
            builder.add_heading(level, strip_markdown_inline(heading_text));
            continue;
        }
        // Setext underline: only valid directly below paragraph text.
        if (!paragraph.empty() && (all_of_char(t, '=') || (all_of_char(t, '-') && t.size() >= 2))) {
            const int level = t.front() == '=' ? 1 : 2;
            std::string heading = strip_markdown_inline(paragraph.back());
            paragraph.pop_back();
            flush();
            builder.add_heading(level, heading);
            continue;
        }
        if (is_thematic_break(t)) {
            flush();
            continue;
        }
        if (auto item = list_item_content(line)) {
            flush();
            paragraph.emplace_back(*item);
            continue;
        }
        if (t.front() == '>') {
            std::string_view q = t;
            while (!q.empty() && (q.front() == '>' || q.front() == ' ')) q.remove_prefix(1);
            if (q.empty()) {
                flush();
            } else {
                paragraph.emplace_back(q);
            }
            continue;
        }
        if (t.front() == '|') {
            flush();
            if (!is_table_separator(t)) builder.add_block(table_row_text(t));
            continue;
        }
        paragraph.emplace_back(line);
    }
    flush(!in_fence);
}

// ---------------------------------------------------------------------------
// HTML

const std::map<std::string_view, std::string_view>& named_entities() {
    static const std::map<std::string_view, std::string_view> m = {
        {"amp", "&"},       {"lt", "<"},        {"gt", ">"},        {"quot", "\""},
        {"apos", "'"},      {"nbsp", " "}, {"mdash", "—"}, {"ndash", "–"},
        {"hellip", "…"}, {"lsquo", "‘"}, {"rsquo", "’"}, {"ldquo", "“"},
        {"rdquo", "”"}, {"copy", "©"}, {"reg", "®"},  {"trade", "™"},
        {"deg", "°"},  {"middot", "·"}, {"bull", "•"}, {"laquo", "«"},
        {"raquo", "»"}, {"times", "×"}, {"euro", "€"}, {"pound", "£"},
        {"cent", "¢"}, {"sect", "§"},  {"para", "¶"},
        {"aacute", "á"}, {"agrave", "à"}, {"acirc", "â"}, {"auml", "ä"}, {"aring", "å"},
        {"eacute", "é"}, {"egrave", "è"}, {"ecirc", "ê"}, {"euml", "ë"},
        {"iacute", "í"}, {"igrave", "ì"}, {"icirc", "î"}, {"iuml", "ï"},
        {"oacute", "ó"}, {"ograve", "ò"}, {"ocirc", "ô"}, {"ouml", "ö"}, {"oslash", "ø"},
        {"uacute", "ú"}, {"ugrave", "ù"}, {"ucirc", "û"}, {"uuml", "ü"},
        {"ccedil", "ç"}, {"ntilde", "ñ"}, {"szlig", "ß"},
        {"Aacute", "Á"}, {"Auml", "Ä"}, {"Eacute", "É"}, {"Ouml", "Ö"}, {"Uuml", "Ü"},
        {"Ccedil", "Ç"}, {"Ntilde", "Ñ"},
    };
    return m;
}

void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_block_tag(std::string_view name) {
    static const std::set<std::string_view> kBlock = {
        "p",       "div",     "br",     "li",      "ul",       "ol",      "table",    "tr",
        "section", "article", "header", "footer",  "nav",      "aside",   "main",     "blockquote",
        "pre",     "hr",      "dd",     "dt",      "dl",       "figure",  "figcaption", "form",
        "fieldset", "address", "details", "summary", "body",   "html",    "head",     "caption",
        "thead",   "tbody",   "tfoot",  "center",  "hgroup",   "menu"};
    return kBlock.contains(name);
}

bool is_raw_text_tag(std::string_view name) {
    return name == "script" || name == "style" || name == "noscript" || name == "template" ||
           name == "svg" || name == "iframe" || name == "object";
}

std::string ascii_lower(std::string_view s) { return text::to_lower_ascii(s); }

void parse_html(std::string_view raw, BodyBuilder& builder, std::string& title_out) {
    std::string buffer;
    std::string title_text;
    bool in_title = false;
    int heading_level = 0;

    auto flush = [&] {
        if (heading_level > 0) return;
        builder.add_block(text::collapse_whitespace(decode_html_entities(buffer)));
        buffer.clear();
    };

    std::size_t i = 0;
    while (i < raw.size()) {
        const char c = raw[i];
        if (c != '<') {
            if (in_title) {
                title_text.push_back(c);
            } else {
                buffer.push_back(c);
            }
            ++i;
            continue;
        }
        if (raw.substr(i, 4) == "<!--") {
            const std::size_t end = raw.find("-->", i + 4);
            i = end == std::string_view::npos ? raw.size() : end + 3;
            continue;
        }
        const std::size_t end = raw.find('>', i + 1);
        if (end == std::string_view::npos) {
            buffer.append(raw.substr(i));
            break;
        }
        std::string_view tag = raw.substr(i + 1, end - i - 1);
        i = end + 1;
        if (tag.empty()) continue;
        if (tag.front() == '!' || tag.front() == '?') continue;
        const bool closing = tag.front() == '/';
        if (closing) tag.remove_prefix(1);
        std::size_t name_len = 0;
        while (name_len < tag.size() && (std::isalnum(static_cast<unsigned char>(tag[name_len])) ||
                                         tag[name_len] == '-')) {
            ++name_len;
        }
        const std::string name = ascii_lower(tag.substr(0, name_len));
        if (name.empty()) continue;

        if (!closing && is_raw_text_tag(name)) {
            const std::string close = "</" + name;
            std::size_t pos = i;
            while (true) {
                pos = raw.find('<', pos);
                if (pos == std::string_view::npos) break;
                if (ascii_lower(raw.substr(pos, close.size())) == close) break;
                ++pos;
            }
            if (pos == std::string_view::npos) {
                i = raw.size();
            } else {
                const std::size_t gt = raw.find('>', pos);
                i = gt == std::string_view::npos ? raw.size() : gt + 1;
            }
            continue;
        }
        if (name == "title") {
            in_title = !closing;
            continue;
        }
        if (name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6') {
            if (!closing) {
                flush();
                heading_level = name[1] - '0';
            } else if (heading_level > 0) {
                const std::string heading = text::collapse_whitespace(decode_html_entities(buffer));
                buffer.clear();
                builder.add_heading(heading_level, heading);
                heading_level = 0;
            }
            continue;
        }
        if (name == "td" || name == "th") {
            buffer.push_back(' ');
            continue;
        }
        if (is_block_tag(name)) flush();
    }
    flush();
    title_out = text::collapse_whitespace(decode_html_entities(title_text));
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view format_name(Format f) {
    switch (f) {
        case Format::kText: return "text";
        case Format::kMarkdown: return "markdown";
        case Format::kHtml: return "html";
        case Format::kJson: return "json";
    }
    return "text";
}

std::optional<Format> parse_format(std::string_view name) {
    const std::string n = text::to_lower_ascii(name);
    if (n == "text" || n == "txt") return Format::kText;
    if (n == "markdown" || n == "md") return Format::kMarkdown;
    if (n == "html" || n == "htm") return Format::kHtml;
    if (n == "json") return Format::kJson;
    return std::nullopt;
}

std::optional<Format> format_from_filename(std::string_view filename) {
    const std::size_t dot = filename.rfind('.');
    if (dot == std::string_view::npos) return std::nullopt;
    const std::string ext = text::to_lower_ascii(filename.substr(dot + 1));
    if (ext == "markdown") return Format::kMarkdown;
    return parse_format(ext);
}

std::string decode_html_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        const std::size_t semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back(s[i++]);
            continue;
        }
        const std::string_view ent = s.substr(i + 1, semi - i - 1);
        if (!ent.empty() && ent[0] == '#') {
            uint32_t cp = 0;
            bool ok = ent.size() > 1;
            const bool hex = ok && (ent[1] == 'x' || ent[1] == 'X');
            for (std::size_t k = hex ? 2 : 1; ok && k < ent.size(); ++k) {
                const char d = ent[k];
                if (hex && std::isxdigit(static_cast<unsigned char>(d))) {
                    cp = cp * 16 + static_cast<uint32_t>(std::isdigit(static_cast<unsigned char>(d)) ? d - '0' : (std::tolower(d) - 'a' + 10));
                } else if (!hex && std::isdigit(static_cast<unsigned char>(d))) {
                    cp = cp * 10 + static_cast<uint32_t>(d - '0');
                } else {
                    ok = false;
                }
                if (cp > 0x10FFFF) ok = false;
            }
            if (hex && ent.size() == 2) ok = false;
            if (ok && cp != 0 && !(cp >= 0xD800 && cp <= 0xDFFF)) {
                append_utf8(out, cp);
                i = semi + 1;
                continue;
            }
        } else if (auto it = named_entities().find(ent); it != named_entities().end()) {
            out.append(it->second);
            i = semi + 1;
            continue;
        }
        out.push_back(s[i++]);
    }
    return out;
}

// ---------------------------------------------------------------------------

SentenceSegmenter::SentenceSegmenter() : abbreviations_(load_abbreviations()) {}

SentenceSegmenter::SentenceSegmenter(std::set<std::string> abbreviations)
    : abbreviations_(std::move(abbreviations)) {}

const SentenceSegmenter& SentenceSegmenter::default_instance() {
    static const SentenceSegmenter instance;
    return instance;
}

bool SentenceSegmenter::is_abbreviation(std::string_view word) const {
    while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'' ||
                             word.front() == '[')) {
        word.remove_prefix(1);
    }
    return abbreviations_.contains(text::to_lower_ascii(word));
}

std::vector<SentenceSpan> SentenceSegmenter::segment(std::string_view body) const {
    std::vector<SentenceSpan> spans;
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::size_t start = kNone;
    std::size_t last_end = 0;
    auto close = [&](std::size_t end) {
        spans.push_back({start, end, spans.size()});
        start = kNone;
    };

    std::size_t pos = 0;
    while (pos < body.size()) {
        const std::size_t cp_start = pos;
        const char32_t cp = text::next_code_point(body, pos);
        if (cp == U'\n') {
            std::size_t q = pos;
            while (q < body.size() && (body[q] == ' ' || body[q] == '\t')) ++q;
            if (q < body.size() && body[q] == '\n' && start != kNone) close(last_end);
            continue;
        }
        if (text::is_space(cp)) continue;
        if (start == kNone) start = cp_start;
        last_end = pos;
        if (!is_terminator(cp)) continue;

        std::size_t q = pos;
        while (q < body.size()) {
            std::size_t next = q;
            const char32_t follow = text::next_code_point(body, next);
            if (!is_terminator(follow) && !is_closer(follow)) break;
            q = next;
        }
        last_end = q;
        const bool at_boundary = q >= body.size() || text::is_space_at(body, q) || is_cjk_terminator(cp);
        bool abbreviation = false;
        if (at_boundary && cp == U'.' && q == pos) {
            std::size_t w = cp_start;
            while (w > start && !text::is_space_at(body, w - 1)) --w;
            abbreviation = is_abbreviation(body.substr(w, pos - w));
            // A leading enumerator such as "1." or "12." opens its item.
            const std::string_view lead = body.substr(start, cp_start - start);
            abbreviation = abbreviation || (!lead.empty() && lead.size() <= 3 &&
                                            std::all_of(lead.begin(), lead.end(), [](char c) {
                                                return c >= '0' && c <= '9';
                                            }));
        }
        if (at_boundary && !abbreviation) {
            close(q);
        }
        pos = q;
    }
    if (start != kNone) close(last_end);
    return spans;
}

std::vector<SentenceSpan> segment_sentences(std::string_view body) {
    return SentenceSegmenter::default_instance().segment(body);
}

std::string document_id(std::string_view source_uri, std::string_view body) {
    std::string material;
    material.reserve(source_uri.size() + body.size() + 1);
    material.append(source_uri);
    material.push_back('\0');
    material.append(body);
    return text::sha256_hex(material);
}

Document parse_document(std::string_view raw, Format format, const Metadata& metadata) {
    if (!text::is_valid_utf8(raw)) {
        throw Error(ErrorCode::kUndecodableInput, "input is not valid UTF-8");
    }
    Document doc;
    std::optional<std::string> json_date;
    std::string json_source;
    Metadata extra;

    const std::string unified = unify_newlines(text::to_nfc(raw));
    switch (format) {
        case Format::kText: {
            doc.body = text::normalize_body(unified);
            doc.title = first_nonblank_line(doc.body);
            break;
        }
        case Format::kMarkdown: {
            BodyBuilder builder;
            parse_markdown(unified, builder);
            auto& headings = builder.headings();
            auto h1 = std::find_if(headings.begin(), headings.end(), [](const auto& h) { return h.level == 1; });
            if (h1 != headings.end()) {
                doc.title = h1->text;
                headings.erase(h1);
            }
            doc.body = builder.build(doc.headings);
            if (doc.title.empty()) doc.title = builder.first_line();
            break;
        }
        case Format::kHtml: {
            BodyBuilder builder;
            std::string title_tag;
            parse_html(unified, builder, title_tag);
            auto& headings = builder.headings();
            auto h1 = std::find_if(headings.begin(), headings.end(), [](const auto& h) { return h.level == 1; });
            if (!title_tag.empty()) {
                doc.title = title_tag;
                if (h1 != headings.end() && h1->text == title_tag) headings.erase(h1);
            } else if (h1 != headings.end()) {
                doc.title = h1->text;
                headings.erase(h1);
            }
            doc.body = builder.build(doc.headings);
            if (doc.title.empty()) doc.title = builder.first_line();
            break;
        }
        case Format::kJson: {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(unified);
            } catch (const nlohmann::json::parse_error& e) {
                throw Error(ErrorCode::kMalformedJson, e.what());
            }
            if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
                throw Error(ErrorCode::kMalformedJson, "expected an object with a string \"text\" field");
            }
            for (const auto& [key, value] : j.items()) {
                if (!value.is_string() && key != "text") continue;
                if (key == "text") continue;
                if (key == "title") {
                    doc.title = text::collapse_whitespace(value.get<std::string>());
                } else if (key == "publish_date") {
                    json_date = value.get<std::string>();
                } else if (key == "source_uri") {
                    json_source = value.get<std::string>();
                } else {
                    extra[key] = value.get<std::string>();
                }
            }
            doc.body = text::normalize_body(j["text"].get<std::string>());
            if (doc.title.empty()) doc.title = first_nonblank_line(doc.body);
            break;
        }
    }

    if (text::is_blank(doc.body)) {
        throw Error(ErrorCode::kEmptyDocument, "document body is empty after parsing");
    }

    doc.metadata = extra;
    for (const auto& [key, value] : metadata) {
        if (key == "publish_date" || key == "source_uri") continue;
        doc.metadata[key] = value;
    }
    if (auto it = metadata.find("source_uri"); it != metadata.end()) {
        doc.source_uri = it->second;
    } else {
        doc.source_uri = json_source;
    }
    std::optional<std::string> date_text = json_date;
    if (auto it = metadata.find("publish_date"); it != metadata.end()) date_text = it->second;
    if (date_text) {
        doc.publish_date = parse_iso_date(text::trim(*date_text));
        if (!doc.publish_date) doc.metadata["publish_date_error"] = *date_text;
    }

    doc.sentences = segment_sentences(doc.body);
    doc.id = document_id(doc.source_uri, doc.body);
    return doc;
}

}  // namespace attrag
