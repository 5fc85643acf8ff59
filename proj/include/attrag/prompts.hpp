// Copyright 2026 The attrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <string_view>

namespace attrag::prompts {

// Template names. Each template file starts with a "### task: <name>" line
// so that scripted providers can route on it.
inline constexpr std::string_view kCoreference = "coreference";
inline constexpr std::string_view kUsefulness = "usefulness";
inline constexpr std::string_view kAnswerSystem = "answer_system";
inline constexpr std::string_view kAnswerUser = "answer_user";
inline constexpr std::string_view kQueryExpansion = "query_expansion";
inline constexpr std::string_view kQueryDecomposition = "query_decomposition";
inline constexpr std::string_view kQueryDisambiguation = "query_disambiguation";
inline constexpr std::string_view kQueryAbstraction = "query_abstraction";

/// Raw template text from data/prompts/<name>.txt.
std::string_view get(std::string_view name);

/// Substitutes "{{key}}" placeholders. Unknown placeholders are kept.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// The "<name>" of the leading "### task: <name>" marker, or "" if absent.
std::string task_of(std::string_view prompt_text);

}  // namespace attrag::prompts
