// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "attrag/prompts.hpp"

#include "attrag/resources.hpp"
#include "attrag/text.hpp"

namespace attrag::prompts {

std::string_view get(std::string_view name) {
    return resource("prompts/" + std::string(name) + ".txt");
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        const std::size_t open = tmpl.find("{{", i);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        const std::size_t close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) {
            out.append(tmpl.substr(i));
            break;
        }
        out.append(tmpl.substr(i, open - i));
        const std::string key(text::trim(tmpl.substr(open + 2, close - open - 2)));
        if (auto it = vars.find(key); it != vars.end()) {
            out += it->second;
        } else {
            out.append(tmpl.substr(open, close + 2 - open));
        }
        i = close + 2;
    }
    return out;
}

std::string task_of(std::string_view prompt_text) {
    constexpr std::string_view kMarker = "### task:";
    const std::size_t at = prompt_text.find(kMarker);
    if (at == std::string_view::npos) return {};
    std::size_t end = prompt_text.find('\n', at);
    if (end == std::string_view::npos) end = prompt_text.size();
    return std::string(text::trim(prompt_text.substr(at + kMarker.size(), end - at - kMarker.size())));
}

}  // namespace attrag::prompts
