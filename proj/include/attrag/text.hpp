// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Unicode-aware text helpers shared by every stage. All offsets are byte
// offsets into UTF-8 strings.
namespace attrag::text {

bool is_valid_utf8(std::string_view s);

/// Decodes the code point starting at `pos` and advances `pos`. Invalid
/// sequences decode as U+FFFD and advance by one byte.
char32_t next_code_point(std::string_view s, std::size_t& pos);

bool is_space(char32_t cp);
bool is_alnum(char32_t cp);

/// True when s[pos] starts a whitespace code point.
bool is_space_at(std::string_view s, std::size_t pos);

bool is_blank(std::string_view s);

std::string to_nfc(std::string_view s);

/// NFC, CRLF/CR to LF, whitespace-only lines emptied, more than two
/// consecutive blank lines collapsed to two, outer whitespace trimmed.
std::string normalize_body(std::string_view s);

/// Lowercased maximal runs of alphanumeric code points.
std::vector<std::string> tokenize(std::string_view s);

std::string case_fold(std::string_view s);

/// Runs of whitespace become one ASCII space; ends trimmed.
std::string collapse_whitespace(std::string_view s);

std::string_view trim(std::string_view s);

std::string to_lower_ascii(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

std::string sha256_hex(std::string_view data);

/// Length of the longest prefix of `s` that does not end inside a UTF-8
/// sequence. Used to re-join streamed deltas split at arbitrary bytes.
std::size_t utf8_complete_prefix(std::string_view s);

}  // namespace attrag::text
