// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/dates.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <regex>

#include "attrag/text.hpp"

namespace attrag {

using std::chrono::days;
using std::chrono::sys_days;
using std::chrono::weekday;

namespace {

constexpr std::array<std::string_view, 7> kWeekdayNames = {
    "sunday", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday"};

constexpr std::array<std::string_view, 31> kNumberWords = {
    "zero",    "one",       "two",      "three",    "four",     "five",       "six",
    "seven",   "eight",     "nine",     "ten",      "eleven",   "twelve",     "thirteen",
    "fourteen", "fifteen",  "sixteen",  "seventeen", "eighteen", "nineteen",  "twenty",
    "twenty-one", "twenty-two", "twenty-three", "twenty-four", "twenty-five", "twenty-six",
    "twenty-seven", "twenty-eight", "twenty-nine", "thirty"};

unsigned iso_weekday(sys_days d) { return weekday{d}.iso_encoding(); }  // Mon=1..Sun=7

const std::regex& relative_date_pattern() {
    static const std::regex re = [] {
        std::string numbers = "\\d+|a|an";
        // Longest alternatives first so "twenty-one" wins over "twenty".
        for (auto it = kNumberWords.rbegin(); it != kNumberWords.rend(); ++it) {
            numbers += "|";
            numbers += *it;
        }
        std::string weekdays;
        for (auto w : kWeekdayNames) {
            if (!weekdays.empty()) weekdays += "|";
            weekdays += w;
        }
        std::string pattern = "\\b(?:(today|yesterday|tomorrow)"
                              "|(" + numbers + ")\\s+days?\\s+ago"
                              "|(last|this|next)\\s+(" + weekdays + ")"
                              "|last\\s+(week|month|year))\\b";
        return std::regex(pattern, std::regex::ECMAScript | std::regex::icase);
    }();
    return re;
}

std::optional<long> parse_count(std::string_view word) {
    std::string w = text::to_lower_ascii(word);
    if (w == "a" || w == "an") return 1;
    if (!w.empty() && std::isdigit(static_cast<unsigned char>(w[0]))) {
        if (w.size() > 6) return std::nullopt;
        return std::stol(w);
    }
    for (std::size_t i = 0; i < kNumberWords.size(); ++i) {
        if (kNumberWords[i] == w) return static_cast<long>(i);
    }
    return std::nullopt;
}

unsigned weekday_index(std::string_view name) {
    std::string w = text::to_lower_ascii(name);
    for (unsigned i = 0; i < kWeekdayNames.size(); ++i) {
        if (kWeekdayNames[i] == w) return i;
    }
    return 0;
}

std::optional<std::string> resolve(const std::smatch& m, const Date& publish_date) {
    const sys_days base{publish_date};
    if (m[1].matched) {
        std::string w = text::to_lower_ascii(m[1].str());
        if (w == "today") return format_iso_date(base);
        if (w == "yesterday") return format_iso_date(Date{base - days{1}});
        return format_iso_date(Date{base + days{1}});
    }
    if (m[2].matched) {
        auto n = parse_count(m[2].str());
        if (!n) return std::nullopt;
        return format_iso_date(Date{base - days{*n}});
    }
    if (m[3].matched) {
        const std::string mode = text::to_lower_ascii(m[3].str());
        const weekday target{weekday_index(m[4].str())};
        const weekday current{base};
        if (mode == "last") {
            auto back = (current - target).count();  // 0..6
            if (back == 0) back = 7;
            return format_iso_date(Date{base - days{back}});
        }
        if (mode == "next") {
            auto ahead = (target - current).count();
            if (ahead == 0) ahead = 7;
            return format_iso_date(Date{base + days{ahead}});
        }
        const sys_days monday = base - days{iso_weekday(base) - 1};
        return format_iso_date(Date{monday + days{target.iso_encoding() - 1}});
    }
    const std::string unit = text::to_lower_ascii(m[5].str());
    if (unit == "week") return format_iso_week(Date{base - days{7}});
    if (unit == "month") {
        const auto ym = publish_date.year() / publish_date.month() - std::chrono::months{1};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ym.year()),
                      static_cast<unsigned>(ym.month()));
        return std::string(buf);
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d", static_cast<int>(publish_date.year()) - 1);
    return std::string(buf);
}

}  // namespace

std::optional<Date> parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    }
    const int y = std::stoi(std::string(s.substr(0, 4)));
    const unsigned mo = static_cast<unsigned>(std::stoi(std::string(s.substr(5, 2))));
    const unsigned d = static_cast<unsigned>(std::stoi(std::string(s.substr(8, 2))));
    Date date{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
    if (!date.ok()) return std::nullopt;
    return date;
}

std::string format_iso_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::string format_iso_week(const Date& d) {
    const sys_days day{d};
    const sys_days thursday = day + days{4 - static_cast<int>(iso_weekday(day))};
    const Date thursday_date{thursday};
    const sys_days jan1{thursday_date.year() / std::chrono::January / 1};
    const auto week = (thursday - jan1).count() / 7 + 1;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-W%02d", static_cast<int>(thursday_date.year()),
                  static_cast<int>(week));
    return buf;
}

std::string normalize_relative_dates(std::string_view text, const Date& publish_date) {
    const std::string input(text);
    std::string out;
    out.reserve(input.size());
    auto cursor = input.cbegin();
    const auto& re = relative_date_pattern();
    for (auto it = std::sregex_iterator(input.cbegin(), input.cend(), re); it != std::sregex_iterator();
         ++it) {
        const std::smatch& m = *it;
        out.append(cursor, m[0].first);
        if (auto replacement = resolve(m, publish_date)) {
            out += *replacement;
        } else {
            out.append(m[0].first, m[0].second);
        }
        cursor = m[0].second;
    }
    out.append(cursor, input.cend());
    return out;
}

}  // namespace attrag
