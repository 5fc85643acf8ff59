// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace attrag {

using Date = std::chrono::year_month_day;

/// Strict "YYYY-MM-DD"; nullopt for anything else, including invalid days.
std::optional<Date> parse_iso_date(std::string_view s);
std::string format_iso_date(const Date& d);
/// "YYYY-Www" for the ISO-8601 week containing `d`.
std::string format_iso_week(const Date& d);

/// Rewrites relative time expressions as absolute dates anchored at
/// `publish_date`:
///
///   today / yesterday / tomorrow           -> YYYY-MM-DD
///   N days ago (digits, "a", or one..thirty) -> YYYY-MM-DD
///   last <weekday>   most recent such day strictly before publish_date
///   this <weekday>   that day in the Monday..Sunday week of publish_date
///   next <weekday>   first such day strictly after publish_date
///   last week        ISO week of publish_date - 7 days (YYYY-Www)
///   last month       YYYY-MM
///   last year        YYYY
///
/// Matching is case-insensitive on whole words; text outside a match is
/// copied byte for byte.
std::string normalize_relative_dates(std::string_view text, const Date& publish_date);

}  // namespace attrag
