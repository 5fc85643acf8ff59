// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/text.hpp"

#include <openssl/evp.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <array>
#include <cstdio>
#include <stdexcept>

namespace attrag::text {

bool is_valid_utf8(std::string_view s) {
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    const auto n = static_cast<int32_t>(s.size());
    int32_t pos = 0;
    while (pos < n) {
        UChar32 c;
        U8_NEXT(p, pos, n, c);
        if (c < 0) return false;
    }
    return true;
}

char32_t next_code_point(std::string_view s, std::size_t& pos) {
    const auto* p = reinterpret_cast<const uint8_t*>(s.data());
    auto ipos = static_cast<int32_t>(pos);
    UChar32 c;
    U8_NEXT(p, ipos, static_cast<int32_t>(s.size()), c);
    if (c < 0) {
        pos += 1;
        return U'\uFFFD';
    }
    pos = static_cast<std::size_t>(ipos);
    return static_cast<char32_t>(c);
}

bool is_space(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

bool is_alnum(char32_t cp) { return u_isalnum(static_cast<UChar32>(cp)); }

bool is_space_at(std::string_view s, std::size_t pos) {
    const auto c = static_cast<unsigned char>(s[pos]);
    if (c < 0x80) return c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
    return is_space(next_code_point(s, pos));
}

bool is_blank(std::string_view s) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        if (!is_space(next_code_point(s, pos))) return false;
    }
    return true;
}

std::string to_nfc(std::string_view s) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
    icu::UnicodeString in = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    if (nfc->isNormalized(in, status) && U_SUCCESS(status)) return std::string(s);
    status = U_ZERO_ERROR;
    icu::UnicodeString out = nfc->normalize(in, status);
    if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
    std::string result;
    out.toUTF8String(result);
    return result;
}

std::string normalize_body(std::string_view s) {
    std::string nfc = to_nfc(s);

    // Line endings first, so blank-line detection sees only '\n'.
    std::string lf;
    lf.reserve(nfc.size());
    for (std::size_t i = 0; i < nfc.size(); ++i) {
        if (nfc[i] == '\r') {
            lf.push_back('\n');
            if (i + 1 < nfc.size() && nfc[i + 1] == '\n') ++i;
        } else {
            lf.push_back(nfc[i]);
        }
    }

    std::string out;
    out.reserve(lf.size());
    int blank_run = 0;
    std::size_t start = 0;
    bool first = true;
    while (start <= lf.size()) {
        std::size_t end = lf.find('\n', start);
        if (end == std::string::npos) end = lf.size();
        std::string_view line(lf.data() + start, end - start);
        if (is_blank(line)) {
            ++blank_run;
            if (blank_run <= 2 && !first) out.push_back('\n');
        } else {
            if (!first) out.push_back('\n');
            out.append(line);
            blank_run = 0;
            first = false;
        }
        start = end + 1;
    }
    return std::string(trim(out));
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    icu::UnicodeString current;
    std::size_t pos = 0;
    auto flush = [&] {
        if (current.isEmpty()) return;
        std::string tok;
        current.toUTF8String(tok);
        tokens.push_back(std::move(tok));
        current.remove();
    };
    while (pos < s.size()) {
        char32_t cp = next_code_point(s, pos);
        if (is_alnum(cp)) {
            current.append(static_cast<UChar32>(u_tolower(static_cast<UChar32>(cp))));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

std::string case_fold(std::string_view s) {
    icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    u.foldCase();
    std::string out;
    u.toUTF8String(out);
    return out;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t begin = pos;
        char32_t cp = next_code_point(s, pos);
        if (is_space(cp)) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.append(s.substr(begin, pos - begin));
    }
    return out;
}

std::string_view trim(std::string_view s) {
    std::size_t begin = 0;
    while (begin < s.size() && is_space_at(s, begin)) {
        std::size_t p = begin;
        next_code_point(s, p);
        begin = p;
    }
    std::size_t end = s.size();
    while (end > begin) {
        // Step back to the start of the previous code point.
        std::size_t prev = end - 1;
        while (prev > begin && (static_cast<unsigned char>(s[prev]) & 0xC0) == 0x80) --prev;
        if (!is_space_at(s, prev)) break;
        end = prev;
    }
    return s.substr(begin, end - begin);
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    return to_lower_ascii(s.substr(0, prefix.size())) == to_lower_ascii(prefix);
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

}  // namespace attrag::text

namespace attrag::text {

std::size_t utf8_complete_prefix(std::string_view s) {
    // Look back at most three bytes for the lead byte of a trailing sequence.
    const std::size_t n = s.size();
    for (std::size_t back = 1; back <= 4 && back <= n; ++back) {
        const auto c = static_cast<unsigned char>(s[n - back]);
        if ((c & 0xC0) == 0x80) continue;  // continuation byte
        std::size_t need = 1;
        if ((c & 0xE0) == 0xC0) {
            need = 2;
        } else if ((c & 0xF0) == 0xE0) {
            need = 3;
        } else if ((c & 0xF8) == 0xF0) {
            need = 4;
        }
        return back < need ? n - back : n;
    }
    return n;
}

}  // namespace attrag::text
